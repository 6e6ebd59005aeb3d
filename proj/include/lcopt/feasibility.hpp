#pragma once

// Rate satisfiability: a rate vector r admits a unique positive load fixed
// point for every positive power iff the spectral radius of the coupling
// matrix Lambda(r) is strictly below one.

#include "lcopt/model.hpp"

#include <cstddef>
#include <vector>

namespace lcopt {

/// Dense n x n non-negative matrix with zero diagonal.
/// lambda(i, k) = sum_{j in J_i} g_kj r_j / g_ij for i != k.
class CouplingMatrix {
public:
    CouplingMatrix() = default;
    explicit CouplingMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
    /// Row-major entries; throws std::invalid_argument on negative or
    /// non-finite entries or a non-square size.
    CouplingMatrix(std::size_t n, std::vector<double> row_major);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t k) const { return data_[i * n_ + k]; }
    double& operator()(std::size_t i, std::size_t k) { return data_[i * n_ + k]; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

struct SpectralRadiusResult {
    double rho = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
    // Collatz-Wielandt bracket that certified (or last bounded) rho.
    double lower = 0.0;
    double upper = 0.0;
};

struct SatisfiabilityReport {
    double rho = 0.0;
    bool satisfiable = false;
    std::size_t iterations = 0;
    bool converged = true;
};

inline constexpr double kSpectralTol = 1e-12;
inline constexpr std::size_t kSpectralMaxIter = 100000;
/// rho must be below 1 - kSatisfiabilityMargin to count as satisfiable.
inline constexpr double kSatisfiabilityMargin = 1e-12;

CouplingMatrix build_lambda(const Network& net, const RateVector& r);

/// Perron root of a non-negative square matrix.
///
/// The matrix is split into strongly connected components; on each
/// irreducible block a shifted power iteration (all-ones start) runs until
/// the Collatz-Wielandt bounds min_i (Av)_i/v_i <= rho <= max_i (Av)_i/v_i
/// are within tol * max(1, rho). The shift makes every irreducible block
/// primitive, so periodic blocks such as permutations converge too.
/// rho of the whole matrix is the maximum over blocks.
SpectralRadiusResult spectral_radius(const CouplingMatrix& m, double tol = kSpectralTol,
                                     std::size_t max_iter = kSpectralMaxIter);

SatisfiabilityReport is_satisfiable(const Network& net, const RateVector& r,
                                    double tol = kSpectralTol,
                                    std::size_t max_iter = kSpectralMaxIter);

/// Throws UnsatisfiableError unless is_satisfiable(net, r) holds.
SatisfiabilityReport require_satisfiable(const Network& net, const RateVector& r);

}  // namespace lcopt
