#include "lcopt/feasibility.hpp"

#include "lcopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <numeric>

namespace lcopt {

CouplingMatrix::CouplingMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), data_(std::move(row_major)) {
    if (data_.size() != n_ * n_) {
        throw std::invalid_argument(
            fmt::format("coupling matrix needs {} entries, got {}", n_ * n_, data_.size()));
    }
    for (double v : data_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("coupling matrix entries must be finite and >= 0");
        }
    }
}

CouplingMatrix build_lambda(const Network& net, const RateVector& r) {
    require_user_vector(net, r.size(), "rate vector");
    const std::size_t n = net.num_cells();
    CouplingMatrix lambda(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : net.users_of(i)) {
            const double own = net.gain(i, j);
            if (!(own > 0.0)) {
                throw std::domain_error(
                    fmt::format("serving gain of user {} in cell {} is zero", j, i));
            }
            if (!(r[j] >= 0.0) || !std::isfinite(r[j])) {
                throw std::domain_error(fmt::format("rate of user {} is {}", j, r[j]));
            }
            const double scaled = r[j] / own;
            for (std::size_t k = 0; k < n; ++k) {
                if (k != i) lambda(i, k) += net.gain(k, j) * scaled;
            }
        }
    }
    return lambda;
}

namespace {

// Tarjan's algorithm over the dense adjacency i -> k iff m(i, k) > 0.
std::vector<std::vector<std::size_t>> strongly_connected_components(const CouplingMatrix& m) {
    const std::size_t n = m.size();
    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> components;
    std::size_t counter = 0;

    struct Frame {
        std::size_t node;
        std::size_t next;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            const std::size_t v = f.node;
            if (f.next < n) {
                const std::size_t w = f.next++;
                if (!(m(v, w) > 0.0)) continue;
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
            frames.pop_back();
            if (!frames.empty()) {
                const std::size_t parent = frames.back().node;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    return components;
}

SpectralRadiusResult irreducible_block_radius(const CouplingMatrix& m,
                                              const std::vector<std::size_t>& block, double tol,
                                              std::size_t max_iter) {
    const std::size_t s = block.size();
    SpectralRadiusResult res;
    if (s == 1) {
        res.rho = res.lower = res.upper = m(block[0], block[0]);
        return res;
    }

    double shift = 0.0;
    for (std::size_t a = 0; a < s; ++a)
        for (std::size_t b = 0; b < s; ++b) shift += m(block[a], block[b]);
    shift /= static_cast<double>(s);

    std::vector<double> v(s, 1.0), mv(s);
    for (std::size_t it = 1; it <= max_iter; ++it) {
        double lower = std::numeric_limits<double>::infinity();
        double upper = 0.0;
        for (std::size_t a = 0; a < s; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < s; ++b) acc += m(block[a], block[b]) * v[b];
            mv[a] = acc;
            const double ratio = acc / v[a];
            lower = std::min(lower, ratio);
            upper = std::max(upper, ratio);
        }
        res.iterations = it;
        res.lower = lower;
        res.upper = upper;
        res.rho = 0.5 * (lower + upper);
        if (upper - lower <= tol * std::max(1.0, upper)) {
            res.converged = true;
            return res;
        }
        double scale = 0.0;
        for (std::size_t a = 0; a < s; ++a) {
            v[a] = mv[a] + shift * v[a];
            scale = std::max(scale, v[a]);
        }
        for (double& e : v) e /= scale;
    }
    res.converged = false;
    return res;
}

}  // namespace

SpectralRadiusResult spectral_radius(const CouplingMatrix& m, double tol, std::size_t max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("spectral radius tolerance must be positive");
    SpectralRadiusResult total;
    if (m.size() == 0) return total;
    for (const auto& block : strongly_connected_components(m)) {
        const SpectralRadiusResult r = irreducible_block_radius(m, block, tol, max_iter);
        total.iterations += r.iterations;
        total.converged = total.converged && r.converged;
        if (r.rho > total.rho) total.rho = r.rho;
        total.lower = std::max(total.lower, r.lower);
        total.upper = std::max(total.upper, r.upper);
    }
    return total;
}

SatisfiabilityReport is_satisfiable(const Network& net, const RateVector& r, double tol,
                                    std::size_t max_iter) {
    const SpectralRadiusResult sr = spectral_radius(build_lambda(net, r), tol, max_iter);
    SatisfiabilityReport report;
    report.rho = sr.rho;
    report.iterations = sr.iterations;
    report.converged = sr.converged;
    report.satisfiable = sr.rho < 1.0 - kSatisfiabilityMargin;
    return report;
}

SatisfiabilityReport require_satisfiable(const Network& net, const RateVector& r) {
    SatisfiabilityReport report = is_satisfiable(net, r);
    if (!report.satisfiable) {
        throw UnsatisfiableError(
            fmt::format("rate demand is not satisfiable: spectral radius of the coupling "
                        "matrix is {:.12g} (must be < 1)",
                        report.rho),
            report.rho);
    }
    return report;
}

}  // namespace lcopt
