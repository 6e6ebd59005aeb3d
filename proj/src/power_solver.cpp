#include "lcopt/power_solver.hpp"

#include "lcopt/errors.hpp"
#include "lcopt/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <numeric>

namespace lcopt {

EtaContext make_eta_context(const Network& net, const LoadVector& x, const PowerVector& p,
                            const RateVector& r, std::size_t cell) {
    if (!(x[cell] > 0.0)) {
        throw std::domain_error(fmt::format("target load of cell {} must be positive", cell));
    }
    EtaContext ctx;
    ctx.cell = cell;
    const auto& users = net.users_of(cell);
    ctx.a.reserve(users.size());
    ctx.b.reserve(users.size());
    for (std::size_t j : users) {
        ctx.a.push_back(r[j] / x[cell]);
        ctx.b.push_back(net.gain(cell, j) / interference_plus_noise(net, x, p, cell, j));
    }
    return ctx;
}

double eta(const EtaContext& ctx, double p_i) {
    if (!(p_i > 0.0)) {
        throw std::domain_error(fmt::format("eta evaluated at non-positive power {}", p_i));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < ctx.a.size(); ++j) {
        if (ctx.a[j] == 0.0) continue;
        sum += ctx.a[j] / std::log1p(p_i * ctx.b[j]);
    }
    return sum;
}

CellPowerResult solve_cell_power(const EtaContext& ctx, const CellPowerOptions& opts) {
    CellPowerResult res;
    auto eval = [&](double p) {
        ++res.evaluations;
        return eta(ctx, p);
    };

    double hi_limit = opts.divergence_power;
    if (opts.cap) {
        const double cap = *opts.cap;
        if (!(cap > 0.0)) throw std::invalid_argument("power cap must be positive");
        if (eval(cap) >= 1.0) {
            res.power = cap;
            res.pinned = true;
            return res;
        }
        hi_limit = cap;
    }

    double p = opts.start > 0.0 && std::isfinite(opts.start) ? opts.start : 1.0;
    p = std::min(p, hi_limit);
    double value = eval(p);
    if (std::abs(value - 1.0) <= opts.inner_tol) {
        res.power = p;
        return res;
    }

    double lo = p;
    double hi = p;
    if (value > 1.0) {
        // Grow the right end until eta drops below one.
        while (true) {
            if (hi >= hi_limit) {
                res.power = hi;
                res.bracketed = false;
                return res;
            }
            lo = hi;
            hi = std::min(2.0 * hi, hi_limit);
            const double v = eval(hi);
            if (v < 1.0) break;
            if (std::abs(v - 1.0) <= opts.inner_tol) {
                res.power = hi;
                return res;
            }
        }
    } else {
        // eta -> infinity as p -> 0, so halving terminates unless eta is
        // identically zero (no positive rate in the cell).
        while (true) {
            hi = lo;
            lo = 0.5 * lo;
            if (!(lo > std::numeric_limits<double>::min())) {
                throw std::domain_error(fmt::format(
                    "cell {}: eta stays below one as power vanishes (zero rate demand?)",
                    ctx.cell));
            }
            const double v = eval(lo);
            if (v > 1.0) break;
            if (std::abs(v - 1.0) <= opts.inner_tol) {
                res.power = lo;
                return res;
            }
        }
    }

    p = 0.5 * (lo + hi);
    while (true) {
        const double v = eval(p);
        if (std::abs(v - 1.0) <= opts.inner_tol) break;
        if (v <= 1.0) {
            hi = p;
        } else {
            lo = p;
        }
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        p = mid;
    }
    res.power = p;
    return res;
}

PowerVector power_map(const Network& net, const LoadVector& x, const RateVector& r,
                      const PowerVector& p, double inner_tol, double divergence_power) {
    require_cell_vector(net, x.size(), "load vector");
    require_cell_vector(net, p.size(), "power vector");
    require_user_vector(net, r.size(), "rate vector");
    PowerVector out(net.num_cells(), 0.0);
    for (std::size_t i = 0; i < net.num_cells(); ++i) {
        CellPowerOptions co;
        co.inner_tol = inner_tol;
        co.start = p[i];
        co.divergence_power = divergence_power;
        const CellPowerResult cr = solve_cell_power(make_eta_context(net, x, p, r, i), co);
        if (!cr.bracketed) {
            throw NotImplementableError(fmt::format(
                "cell {}: required power exceeds {} W", i, divergence_power));
        }
        out[i] = cr.power;
    }
    return out;
}

namespace {

struct Residuals {
    double inf = 0.0;
    double l2 = 0.0;
};

// Uncapped: |f_i - x*_i|. Capped and pinned cells only count when their
// realized load falls below the target, which means the cap should release.
Residuals residuals(const LoadVector& realized, const LoadVector& target,
                    const std::vector<bool>& pinned) {
    Residuals res;
    double sq = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double diff = realized[i] - target[i];
        sq += diff * diff;
        const double counted = pinned[i] ? std::max(0.0, -diff) : std::abs(diff);
        res.inf = std::max(res.inf, counted);
    }
    res.l2 = std::sqrt(sq);
    return res;
}

void validate(const Network& net, const LoadVector& x_target, const RateVector& r,
              const IapOptions& opts) {
    require_cell_vector(net, x_target.size(), "target load");
    require_user_vector(net, r.size(), "rate vector");
    if (!(net.noise_power() > 0.0)) {
        throw std::invalid_argument("solvers require a strictly positive noise power");
    }
    for (std::size_t i = 0; i < x_target.size(); ++i) {
        if (!(x_target[i] > 0.0) || !std::isfinite(x_target[i])) {
            throw std::invalid_argument(
                fmt::format("target load of cell {} must be positive, got {}", i, x_target[i]));
        }
    }
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (!(r[j] > 0.0) || !std::isfinite(r[j])) {
            throw std::invalid_argument(
                fmt::format("rate of user {} must be positive, got {}", j, r[j]));
        }
    }
    if (!(opts.outer_tol > 0.0) || !(opts.inner_tol >= 0.0)) {
        throw std::invalid_argument("IAP tolerances must be positive");
    }
    if (!(opts.divergence_power > 0.0)) {
        throw std::invalid_argument("divergence power must be positive");
    }
    if (!opts.p0.empty()) {
        require_cell_vector(net, opts.p0.size(), "initial power");
        for (std::size_t i = 0; i < opts.p0.size(); ++i) {
            if (!(opts.p0[i] > 0.0)) {
                throw std::invalid_argument(
                    fmt::format("initial power of cell {} must be positive", i));
            }
        }
    }
    if (opts.p_cap) {
        require_cell_vector(net, opts.p_cap->size(), "power cap");
        for (std::size_t i = 0; i < opts.p_cap->size(); ++i) {
            if (!((*opts.p_cap)[i] > 0.0)) {
                throw std::invalid_argument(fmt::format("power cap of cell {} must be positive", i));
            }
        }
    }
    if (!opts.sweep_order.empty()) {
        std::vector<std::size_t> sorted = opts.sweep_order;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted.size() != net.num_cells() || sorted[i] != i) {
                throw std::invalid_argument("sweep order must be a permutation of the cells");
            }
        }
    }
}

// Growth streak length that, at max_outer, is read as divergence.
constexpr std::size_t kGrowthWindow = 10;

}  // namespace

PowerSolution iap(const Network& net, const LoadVector& x_target, const RateVector& r,
                  const IapOptions& opts) {
    validate(net, x_target, r, opts);
    require_satisfiable(net, r);

    const std::size_t n = net.num_cells();
    std::vector<std::size_t> order = opts.sweep_order;
    if (order.empty()) {
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
    }

    PowerSolution sol;
    SolveReport& rep = sol.report;
    PowerVector p = opts.p0.empty() ? PowerVector(n, 1.0) : opts.p0;
    sol.pinned.assign(n, false);
    if (opts.p_cap) {
        for (std::size_t i = 0; i < n; ++i) {
            if (p[i] >= (*opts.p_cap)[i]) {
                p[i] = (*opts.p_cap)[i];
                sol.pinned[i] = true;
            }
        }
    }

    LoadVector realized = load_map(net, x_target, p, r);
    Residuals res = residuals(realized, x_target, sol.pinned);
    rep.residual_trace.push_back(res.inf);
    sol.distance_trace.push_back(res.l2);

    std::size_t growth_streak = 0;
    bool diverged = false;
    while (res.inf > opts.outer_tol) {
        if (rep.iterations >= opts.max_outer) break;
        ++rep.iterations;

        const PowerVector previous = p;
        for (std::size_t i : order) {
            const PowerVector& source = opts.mode == IapMode::synchronous ? previous : p;
            CellPowerOptions co;
            co.inner_tol = opts.inner_tol;
            co.start = p[i];
            co.divergence_power = opts.divergence_power;
            if (opts.p_cap) co.cap = (*opts.p_cap)[i];
            const CellPowerResult cr =
                solve_cell_power(make_eta_context(net, x_target, source, r, i), co);
            if (!cr.bracketed || cr.power > opts.divergence_power) {
                diverged = true;
                p[i] = cr.power;
                break;
            }
            p[i] = cr.power;
            sol.pinned[i] = cr.pinned;
        }
        if (diverged) break;

        bool grew = false;
        bool none_fell = true;
        for (std::size_t i = 0; i < n; ++i) {
            grew = grew || p[i] > previous[i];
            none_fell = none_fell && p[i] >= previous[i];
        }
        growth_streak = (grew && none_fell) ? growth_streak + 1 : 0;

        realized = load_map(net, x_target, p, r);
        res = residuals(realized, x_target, sol.pinned);
        rep.residual_trace.push_back(res.inf);
        sol.distance_trace.push_back(res.l2);
    }

    if (diverged) {
        rep.termination = Termination::infeasible_detected;
        realized = load_map(net, x_target, p, r);
    } else if (res.inf <= opts.outer_tol) {
        rep.termination = Termination::converged;
    } else if (growth_streak >= kGrowthWindow) {
        rep.termination = Termination::infeasible_detected;
    } else {
        rep.termination = Termination::max_iter;
    }
    sol.p = p;
    sol.realized_load = realized;
    rep.result = p.values();
    return sol;
}

PowerSolution iap_capped(const Network& net, const LoadVector& x_target, const RateVector& r,
                         const IapOptions& opts) {
    if (!opts.p_cap) throw std::invalid_argument("iap_capped needs per-cell power caps");
    return iap(net, x_target, r, opts);
}

}  // namespace lcopt
