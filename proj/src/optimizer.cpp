#include "lcopt/optimizer.hpp"

#include "lcopt/errors.hpp"
#include "lcopt/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <numeric>
#include <random>

namespace lcopt {

namespace {

double sum(const PowerVector& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

double max_entry(const LoadVector& x) { return *std::max_element(x.begin(), x.end()); }

void require_positive_demand(const RateVector& d) {
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (!(d[j] > 0.0) || !std::isfinite(d[j])) {
            throw std::invalid_argument(
                fmt::format("demand of user {} must be positive and finite, got {}", j, d[j]));
        }
    }
}

}  // namespace

OptimizationResult minimize_energy(const Network& net, const RateVector& d_min,
                                   const OptimizeOptions& opts) {
    require_user_vector(net, d_min.size(), "demand vector");
    require_positive_demand(d_min);
    if (!(opts.epsilon_prime >= 0.0 && opts.epsilon_prime < 1.0)) {
        throw std::invalid_argument("epsilon' must lie in [0, 1)");
    }
    require_satisfiable(net, d_min);

    const LoadVector target = uniform_load(net.num_cells(), 1.0 - opts.epsilon_prime);
    PowerSolution sol = iap(net, target, d_min, opts.iap);
    if (sol.report.termination == Termination::infeasible_detected) {
        throw NotImplementableError(fmt::format(
            "full load is not implementable: power diverged past {} W after {} outer "
            "iterations, so no load vector <= 1 can serve the demand",
            opts.iap.divergence_power, sol.report.iterations));
    }
    if (sol.report.termination != Termination::converged) {
        throw ConvergenceError(fmt::format(
            "power iteration did not converge within {} outer iterations (residual {:.3g})",
            sol.report.iterations, sol.report.final_residual()));
    }

    OptimizationResult out;
    out.p_star = sol.p;
    out.x_star = target;
    out.r_star = d_min;
    out.energy = energy(target, sol.p, opts.weights);
    out.report = std::move(sol.report);
    return out;
}

BaselineResult uniform_power_baseline(const Network& net, const RateVector& d_min,
                                      const BaselineOptions& opts) {
    require_user_vector(net, d_min.size(), "demand vector");
    require_positive_demand(d_min);
    if (!(opts.beta_lo > 0.0) || !(opts.tol > 0.0)) {
        throw std::invalid_argument("baseline needs beta_lo > 0 and tol > 0");
    }
    require_satisfiable(net, d_min);

    const std::size_t n = net.num_cells();
    LoadSolveOptions load_opts = opts.load;
    load_opts.verify_satisfiable = false;

    BaselineResult res;
    LoadVector warm;
    LoadVector at_hi;
    auto feasible = [&](double beta, LoadVector* out) {
        LoadSolution s = solve_load(net, uniform_power(n, beta), d_min, warm, load_opts);
        if (!s.report.converged()) return false;
        warm = s.x;
        const bool ok = max_entry(s.x) <= 1.0;
        if (ok && out) *out = s.x;
        return ok;
    };

    double hi;
    if (opts.beta_hi) {
        hi = *opts.beta_hi;
        if (!feasible(hi, &at_hi)) {
            throw NotImplementableError(
                fmt::format("uniform power {} W leaves some load above one", hi));
        }
    } else {
        hi = 1.0;
        while (!feasible(hi, &at_hi)) {
            hi *= 2.0;
            if (hi > opts.beta_max) {
                throw NotImplementableError(fmt::format(
                    "no uniform power up to {} W keeps every load at or below one",
                    opts.beta_max));
            }
        }
    }

    double lo = std::min(opts.beta_lo, hi);
    LoadVector at_lo;
    if (feasible(lo, &at_lo)) {
        hi = lo;
        at_hi = at_lo;
    } else {
        while (hi - lo > opts.tol * hi) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            ++res.bisection_steps;
            LoadVector at_mid;
            if (feasible(mid, &at_mid)) {
                hi = mid;
                at_hi = std::move(at_mid);
            } else {
                lo = mid;
            }
        }
    }

    res.beta = hi;
    res.p = uniform_power(n, hi);
    res.x = at_hi;
    res.energy = energy(res.x, res.p);
    return res;
}

SweepTable sweep_demand(const Network& net, const std::vector<double>& xi_values,
                        const DemandSweepOptions& opts) {
    SweepTable table;
    table.param_name = "xi";
    for (double xi : xi_values) {
        SweepRow row;
        row.param = xi;
        try {
            const RateVector r(net.num_users(), xi);
            if (!is_satisfiable(net, r).satisfiable) {
                table.rows.push_back(row);
                continue;
            }
            switch (opts.scheme) {
                case DemandScheme::full_load:
                case DemandScheme::uniform_load: {
                    const double phi = opts.scheme == DemandScheme::full_load ? 1.0 : opts.phi;
                    const PowerSolution sol = iap(net, uniform_load(net.num_cells(), phi), r, opts.iap);
                    row.iterations = sol.report.iterations;
                    if (sol.report.converged()) row.total_energy = phi * sum(sol.p);
                    break;
                }
                case DemandScheme::uniform_power: {
                    const BaselineResult b = uniform_power_baseline(net, r, opts.baseline);
                    row.iterations = b.bisection_steps;
                    row.total_energy = b.energy.total;
                    break;
                }
            }
        } catch (const std::exception&) {
            row.total_energy.reset();
        }
        table.rows.push_back(row);
    }
    return table;
}

SweepTable sweep_load(const Network& net, const RateVector& d, const std::vector<double>& phi_values,
                      const IapOptions& opts) {
    SweepTable table;
    table.param_name = "phi";
    for (double phi : phi_values) {
        SweepRow row;
        row.param = phi;
        try {
            const PowerSolution sol = iap(net, uniform_load(net.num_cells(), phi), d, opts);
            row.iterations = sol.report.iterations;
            if (sol.report.converged()) row.total_energy = phi * sum(sol.p);
        } catch (const std::exception&) {
            row.total_energy.reset();
        }
        table.rows.push_back(row);
    }
    return table;
}

ConvergenceTrace convergence_trace(const Network& net, const RateVector& d,
                                   const LoadVector& x_target, const IapOptions& opts) {
    PowerSolution sol = iap(net, x_target, d, opts);
    ConvergenceTrace trace;
    for (std::size_t k = 0; k < sol.distance_trace.size(); ++k) {
        trace.points.push_back({k, sol.distance_trace[k]});
    }
    trace.report = std::move(sol.report);
    return trace;
}

std::vector<RegionSample> sample_load_region(const Network& net, const RateVector& r,
                                             std::size_t num_samples, double p_max,
                                             std::uint64_t seed) {
    if (!(p_max > 0.0)) throw std::invalid_argument("p_max must be positive");
    require_satisfiable(net, r);
    LoadSolveOptions load_opts;
    load_opts.verify_satisfiable = false;

    std::mt19937_64 rng(seed);
    // (0, p_max] from the top 53 bits, independent of the standard library's
    // distribution implementation.
    auto draw = [&] {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return p_max * (1.0 - u);
    };

    std::vector<RegionSample> samples;
    samples.reserve(num_samples);
    for (std::size_t s = 0; s < num_samples; ++s) {
        RegionSample sample;
        sample.p = PowerVector(net.num_cells(), 0.0);
        for (std::size_t i = 0; i < net.num_cells(); ++i) sample.p[i] = draw();
        LoadSolution sol = solve_load(net, sample.p, r, {}, load_opts);
        sample.x = std::move(sol.x);
        sample.converged = sol.report.converged();
        samples.push_back(std::move(sample));
    }
    return samples;
}

}  // namespace lcopt
