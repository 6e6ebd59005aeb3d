#include "lcopt/load_solver.hpp"

#include "lcopt/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>

namespace lcopt {

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iter: return "max_iter";
        case Termination::infeasible_detected: return "infeasible_detected";
    }
    return "unknown";
}

LoadSolution solve_load(const Network& net, const PowerVector& p, const RateVector& r,
                        const LoadVector& x0, const LoadSolveOptions& opts) {
    const std::size_t n = net.num_cells();
    require_cell_vector(net, p.size(), "power vector");
    require_user_vector(net, r.size(), "rate vector");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(p[i] > 0.0) || !std::isfinite(p[i])) {
            throw std::invalid_argument(
                fmt::format("power of cell {} must be positive and finite, got {}", i, p[i]));
        }
    }
    if (!(net.noise_power() > 0.0)) {
        throw std::invalid_argument("solvers require a strictly positive noise power");
    }
    if (!(opts.tol > 0.0)) throw std::invalid_argument("load tolerance must be positive");
    if (opts.verify_satisfiable) require_satisfiable(net, r);

    LoadVector x = x0.empty() ? LoadVector(n, 1.0) : x0;
    require_cell_vector(net, x.size(), "initial load");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0)) {
            throw std::invalid_argument(
                fmt::format("initial load of cell {} must be positive, got {}", i, x[i]));
        }
    }

    LoadSolution sol;
    SolveReport& rep = sol.report;
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        LoadVector next = load_map(net, x, p, r);
        double residual = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            finite = finite && std::isfinite(next[i]);
            residual = std::max(residual, std::abs(next[i] - x[i]));
        }
        rep.iterations = it;
        if (!finite) {
            rep.residual_trace.push_back(std::numeric_limits<double>::infinity());
            rep.termination = Termination::infeasible_detected;
            break;
        }
        rep.residual_trace.push_back(residual);
        if (residual <= opts.tol) {
            rep.termination = Termination::converged;
            break;
        }
        x = std::move(next);
    }
    sol.x = x;
    rep.result = x.values();
    return sol;
}

bool check_feasible_load(const LoadVector& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0 && v <= 1.0; });
}

}  // namespace lcopt
