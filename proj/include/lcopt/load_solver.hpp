#pragma once

// Iterative algorithm for load (IAL): synchronous fixed-point sweeps
// x <- f(x; r, p) converging to the unique load of the coupling equation.

#include "lcopt/model.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace lcopt {

enum class Termination { converged, max_iter, infeasible_detected };

std::string_view to_string(Termination t);

/// Outcome of an iterative solve.
struct SolveReport {
    std::vector<double> result;
    std::size_t iterations = 0;
    std::vector<double> residual_trace;  // infinity-norm residual per iteration
    Termination termination = Termination::max_iter;

    bool converged() const { return termination == Termination::converged; }
    double final_residual() const { return residual_trace.empty() ? 0.0 : residual_trace.back(); }
};

struct LoadSolveOptions {
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    /// Run the spectral-radius check before iterating. Callers that already
    /// verified the rates (e.g. inside a bisection) may switch it off.
    bool verify_satisfiable = true;
};

struct LoadSolution {
    LoadVector x;
    SolveReport report;
};

/// Fixed point x = f(x; r, p) from the start x0 (all ones when empty).
///
/// Returns the last iterate x_L with ||x_L - f(x_L)||_inf <= tol on
/// convergence. Loads above one are reported, never clamped. Throws
/// UnsatisfiableError when verify_satisfiable is set and the rates fail the
/// spectral test.
LoadSolution solve_load(const Network& net, const PowerVector& p, const RateVector& r,
                        const LoadVector& x0 = {}, const LoadSolveOptions& opts = {});

/// True iff 0 < x_i <= 1 for every cell.
bool check_feasible_load(const LoadVector& x);

}  // namespace lcopt
