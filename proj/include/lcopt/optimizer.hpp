#pragma once

// Minimum sum-energy operating point, the uniform-power baseline, and the
// parameter sweeps used to study energy versus demand and load.

#include "lcopt/load_solver.hpp"
#include "lcopt/model.hpp"
#include "lcopt/power_solver.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lcopt {

struct OptimizationResult {
    PowerVector p_star;
    LoadVector x_star;
    RateVector r_star;
    EnergyReport energy;
    SolveReport report;
};

struct OptimizeOptions {
    IapOptions iap;
    /// Target load is (1 - epsilon_prime) * 1; zero targets full load.
    double epsilon_prime = 0.0;
    std::optional<std::vector<double>> weights;
};

/// Serves exactly d_min at full load: solves 1 = f(1; d_min, p*) with IAP
/// and reports the energy sum_i p*_i.
///
/// Throws UnsatisfiableError when d_min fails the spectral test and
/// NotImplementableError when full load cannot be reached (then no load
/// <= 1 can be, so the problem has no feasible point).
OptimizationResult minimize_energy(const Network& net, const RateVector& d_min,
                                   const OptimizeOptions& opts = {});

struct BaselineResult {
    double beta = 0.0;
    PowerVector p;
    LoadVector x;
    EnergyReport energy;
    std::size_t bisection_steps = 0;
};

struct BaselineOptions {
    double beta_lo = 1e-6;
    /// Upper bracket; when unset it doubles from 1 W up to beta_max.
    std::optional<double> beta_hi;
    double beta_max = 1e6;
    /// Relative bracket width at which bisection stops.
    double tol = 1e-9;
    LoadSolveOptions load;
};

/// Smallest beta such that the load solved at p = beta * 1 stays <= 1.
/// Load decreases in beta, so the feasible set is [beta_min, inf) and a
/// bisection brackets its left end. Throws NotImplementableError when no
/// beta in the bracket is feasible.
BaselineResult uniform_power_baseline(const Network& net, const RateVector& d_min,
                                      const BaselineOptions& opts = {});

struct SweepRow {
    double param = 0.0;
    std::optional<double> total_energy;
    std::size_t iterations = 0;
    bool feasible() const { return total_energy.has_value(); }
};

struct SweepTable {
    std::string param_name;
    std::vector<SweepRow> rows;
};

enum class DemandScheme { full_load, uniform_load, uniform_power };

struct DemandSweepOptions {
    DemandScheme scheme = DemandScheme::full_load;
    double phi = 1.0;  // target load for uniform_load
    IapOptions iap;
    BaselineOptions baseline;
};

/// For each xi, r = xi * 1: unsatisfiable rows and rows whose solve fails are
/// marked infeasible; a failing row never aborts the table.
SweepTable sweep_demand(const Network& net, const std::vector<double>& xi_values,
                        const DemandSweepOptions& opts = {});

/// For each phi, IAP at x = phi * 1 with demands d; energy = phi * sum p.
SweepTable sweep_load(const Network& net, const RateVector& d, const std::vector<double>& phi_values,
                      const IapOptions& opts = {});

struct TracePoint {
    std::size_t iteration = 0;
    double distance = 0.0;  // ||f(x*; d, p_k) - x*||_2
};

struct ConvergenceTrace {
    std::vector<TracePoint> points;
    SolveReport report;
};

ConvergenceTrace convergence_trace(const Network& net, const RateVector& d,
                                   const LoadVector& x_target, const IapOptions& opts = {});

struct RegionSample {
    PowerVector p;
    LoadVector x;
    bool converged = false;
};

/// Draws p uniformly from (0, p_max]^n with a seeded 64-bit Mersenne twister
/// and solves the load for each draw.
std::vector<RegionSample> sample_load_region(const Network& net, const RateVector& r,
                                             std::size_t num_samples, double p_max,
                                             std::uint64_t seed);

}  // namespace lcopt
