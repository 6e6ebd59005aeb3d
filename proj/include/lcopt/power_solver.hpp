#pragma once

// Power coupling: for a target load x and rates r, the power satisfying the
// load coupling equation is the fixed point p = h(p; x, r), where h_i is the
// unique root of eta_i(p_i) = 1 given the other cells' powers. h has no
// closed form; each evaluation is a bracketed bisection on eta_i.

#include "lcopt/load_solver.hpp"
#include "lcopt/model.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace lcopt {

/// Coefficients of eta_i for one cell with the other cells' powers frozen:
/// a_j = r_j / x_i and b_j = g_ij / (sum_{k != i} p_k g_kj x_k + sigma^2).
/// Neither depends on p_i.
struct EtaContext {
    std::size_t cell = 0;
    std::vector<double> a;
    std::vector<double> b;
};

EtaContext make_eta_context(const Network& net, const LoadVector& x, const PowerVector& p,
                            const RateVector& r, std::size_t cell);

/// eta(p_i) = sum_j a_j / log(1 + p_i b_j). Strictly decreasing in p_i.
/// Throws std::domain_error for p_i <= 0.
double eta(const EtaContext& ctx, double p_i);

struct CellPowerOptions {
    double inner_tol = 1e-9;
    /// Bracket expansion starts here (typically the cell's current power).
    double start = 1.0;
    /// Doubling the right bracket past this value signals divergence.
    double divergence_power = 1e6;
    std::optional<double> cap;
};

struct CellPowerResult {
    double power = 0.0;
    /// False when no right bracket with eta < 1 exists below divergence_power.
    bool bracketed = true;
    /// True when the cap was binding and `power` equals it.
    bool pinned = false;
    std::size_t evaluations = 0;
};

/// h_i: the p_i with |eta(p_i) - 1| <= inner_tol, found by halving/doubling
/// from `start` to bracket the root and then bisecting. With a cap the
/// result is min(h_i, cap). Bisection also stops once the bracket cannot
/// shrink in double precision, so inner_tol = 0 requests full precision.
CellPowerResult solve_cell_power(const EtaContext& ctx, const CellPowerOptions& opts = {});

/// Synchronous evaluation of h(p; x, r) for every cell. Throws
/// NotImplementableError when a cell cannot be bracketed.
PowerVector power_map(const Network& net, const LoadVector& x, const RateVector& r,
                      const PowerVector& p, double inner_tol = 1e-9,
                      double divergence_power = 1e6);

enum class IapMode { synchronous, asynchronous };

struct IapOptions {
    IapMode mode = IapMode::asynchronous;
    double outer_tol = 1e-5;
    double inner_tol = 1e-9;
    std::size_t max_outer = 10000;
    /// Initial power; all ones (watts) when empty.
    PowerVector p0;
    std::optional<PowerVector> p_cap;
    double divergence_power = 1e6;
    /// Asynchronous update order; ascending cell index when empty.
    std::vector<std::size_t> sweep_order;
};

struct PowerSolution {
    PowerVector p;
    SolveReport report;
    /// f(x_target; r, p) at the returned power.
    LoadVector realized_load;
    /// Cells whose capped update was binding at termination.
    std::vector<bool> pinned;
    /// ||f(x_target; r, p_k) - x_target||_2 for k = 0 (initial power) .. iterations.
    std::vector<double> distance_trace;
};

/// Iterative algorithm for power. Initializes x = f(x*; r, p0) and, while
/// ||x - x*||_inf > outer_tol, sweeps every cell through solve_cell_power
/// (synchronously from the previous iterate or asynchronously in place),
/// then re-evaluates x = f(x*; r, p).
///
/// Termination is infeasible_detected when a cell's power passes
/// divergence_power or the run hits max_outer while still growing
/// monotonically. With p_cap set each update is min(h_i, cap_i), and a
/// pinned cell counts as settled once its realized load is at or above its
/// target. Throws UnsatisfiableError for rates that fail the spectral test.
PowerSolution iap(const Network& net, const LoadVector& x_target, const RateVector& r,
                  const IapOptions& opts = {});

/// iap with per-cell power caps; throws std::invalid_argument without caps.
PowerSolution iap_capped(const Network& net, const LoadVector& x_target, const RateVector& r,
                         const IapOptions& opts);

}  // namespace lcopt
