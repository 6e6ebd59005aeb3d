#pragma once

#include <stdexcept>
#include <string>

namespace lcopt {

/// The rate vector admits no positive load fixed point for any power
/// (spectral radius of the coupling matrix is not below one).
class UnsatisfiableError : public std::domain_error {
public:
    UnsatisfiableError(const std::string& what, double rho) : std::domain_error(what), rho_(rho) {}
    double rho() const { return rho_; }

private:
    double rho_;
};

/// The requested load vector could not be reached by any power vector the
/// solver found before its divergence heuristics fired.
class NotImplementableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative solve ran out of iterations without converging or being
/// classified as divergent.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lcopt
