#pragma once

// Network data model and the pure evaluation kernels of the load-coupled
// downlink: SINR, the load map f(x; r, p) and transmit energy.
//
// Conventions: rates are in nats normalized by the resource-unit budget
// (M * B = 1), logarithms are natural, gains are linear power gains and
// powers are watts per resource unit.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lcopt {

/// Dense vector of doubles tagged with the quantity it carries, so a load
/// vector cannot be passed where a power vector is expected.
template <typename Tag>
class TaggedVector {
public:
    TaggedVector() = default;
    explicit TaggedVector(std::vector<double> values) : values_(std::move(values)) {}
    TaggedVector(std::size_t n, double fill) : values_(n, fill) {}
    TaggedVector(std::initializer_list<double> init) : values_(init) {}

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }
    auto begin() { return values_.begin(); }
    auto end() { return values_.end(); }

    const std::vector<double>& values() const { return values_; }
    std::span<const double> view() const { return values_; }

    friend bool operator==(const TaggedVector&, const TaggedVector&) = default;

private:
    std::vector<double> values_;
};

/// Per-cell load: fraction of the cell's resource units in use.
using LoadVector = TaggedVector<struct LoadTag>;
/// Per-cell transmit power per resource unit, watts.
using PowerVector = TaggedVector<struct PowerTag>;
/// Per-user rate (or demand) in normalized nats, indexed by global user id.
using RateVector = TaggedVector<struct RateTag>;

/// Static scenario: cells, their users and the dense gain matrix.
///
/// Gains are stored row-major as an n x U matrix where row i is a cell and
/// column j a global user index. A zero entry means "no path". Every user is
/// served by exactly one cell and every cell serves at least one user.
class Network {
public:
    /// Validates every structural invariant; throws std::invalid_argument
    /// naming the offending cell/user on violation.
    Network(std::vector<std::vector<std::size_t>> users, std::vector<double> gains,
            double noise_power);

    std::size_t num_cells() const { return users_.size(); }
    std::size_t num_users() const { return serving_.size(); }

    const std::vector<std::size_t>& users_of(std::size_t cell) const { return users_[cell]; }
    const std::vector<std::vector<std::size_t>>& users() const { return users_; }
    std::size_t serving_cell(std::size_t user) const { return serving_[user]; }

    double gain(std::size_t cell, std::size_t user) const {
        return gains_[cell * num_users() + user];
    }
    const std::vector<double>& gains() const { return gains_; }
    double noise_power() const { return noise_power_; }

private:
    std::vector<std::vector<std::size_t>> users_;
    std::vector<std::size_t> serving_;
    std::vector<double> gains_;
    double noise_power_;
};

/// Per-cell and total (optionally weighted) transmit energy x_i * p_i.
struct EnergyReport {
    std::vector<double> per_cell;
    double total = 0.0;
    std::optional<std::vector<double>> weights;
};

/// Aggregate interference plus noise seen by user j when served by cell i:
/// sum_{k != i} p_k g_kj x_k + sigma^2.
double interference_plus_noise(const Network& net, const LoadVector& x, const PowerVector& p,
                               std::size_t cell, std::size_t user);

/// SINR of user j in its serving cell i. Independent of x_i.
/// Throws std::domain_error when the denominator vanishes.
double sinr(const Network& net, const LoadVector& x, const PowerVector& p, std::size_t cell,
            std::size_t user);

/// f_i(x) = sum_{j in J_i} r_j / log(1 + SINR_ij(x, p)) for every cell.
LoadVector load_map(const Network& net, const LoadVector& x, const PowerVector& p,
                    const RateVector& r);

/// e_i = x_i p_i and total = sum w_i e_i (w_i = 1 when no weights given).
EnergyReport energy(const LoadVector& x, const PowerVector& p,
                    std::optional<std::vector<double>> weights = std::nullopt);

/// True iff r >= d_min elementwise.
bool meets_demand(const RateVector& r, const RateVector& d_min);

/// Uniform vector helpers.
inline LoadVector uniform_load(std::size_t n, double phi) { return LoadVector(n, phi); }
inline PowerVector uniform_power(std::size_t n, double beta) { return PowerVector(n, beta); }

// Shape checks shared by the solvers.
void require_cell_vector(const Network& net, std::size_t size, const char* what);
void require_user_vector(const Network& net, std::size_t size, const char* what);

}  // namespace lcopt
