#include "lcopt/model.hpp"

#include <cmath>
#include <fmt/core.h>

namespace lcopt {

Network::Network(std::vector<std::vector<std::size_t>> users, std::vector<double> gains,
                 double noise_power)
    : users_(std::move(users)), gains_(std::move(gains)), noise_power_(noise_power) {
    if (users_.empty()) {
        throw std::invalid_argument("network must contain at least one cell");
    }
    std::size_t total = 0;
    for (const auto& cell_users : users_) total += cell_users.size();

    constexpr std::size_t unassigned = static_cast<std::size_t>(-1);
    serving_.assign(total, unassigned);
    for (std::size_t i = 0; i < users_.size(); ++i) {
        if (users_[i].empty()) {
            throw std::invalid_argument(fmt::format("cell {} serves no users", i));
        }
        for (std::size_t j : users_[i]) {
            if (j >= total) {
                throw std::invalid_argument(fmt::format(
                    "cell {} lists user {} but only {} users exist", i, j, total));
            }
            if (serving_[j] != unassigned) {
                throw std::invalid_argument(fmt::format(
                    "user {} is listed by both cell {} and cell {}", j, serving_[j], i));
            }
            serving_[j] = i;
        }
    }

    if (gains_.size() != users_.size() * total) {
        throw std::invalid_argument(fmt::format(
            "gain matrix has {} entries, expected {} cells x {} users", gains_.size(),
            users_.size(), total));
    }
    for (std::size_t i = 0; i < users_.size(); ++i) {
        for (std::size_t j = 0; j < total; ++j) {
            const double g = gains_[i * total + j];
            if (!std::isfinite(g) || g < 0.0) {
                throw std::invalid_argument(
                    fmt::format("gain from cell {} to user {} is {} (must be finite, >= 0)", i,
                                j, g));
            }
        }
        for (std::size_t j : users_[i]) {
            if (!(gains_[i * total + j] > 0.0)) {
                throw std::invalid_argument(fmt::format(
                    "serving gain from cell {} to its user {} must be positive", i, j));
            }
        }
    }
    if (!std::isfinite(noise_power_) || noise_power_ < 0.0) {
        throw std::invalid_argument(
            fmt::format("noise power must be finite and >= 0, got {}", noise_power_));
    }
}

void require_cell_vector(const Network& net, std::size_t size, const char* what) {
    if (size != net.num_cells()) {
        throw std::invalid_argument(
            fmt::format("{} has {} entries, network has {} cells", what, size, net.num_cells()));
    }
}

void require_user_vector(const Network& net, std::size_t size, const char* what) {
    if (size != net.num_users()) {
        throw std::invalid_argument(
            fmt::format("{} has {} entries, network has {} users", what, size, net.num_users()));
    }
}

double interference_plus_noise(const Network& net, const LoadVector& x, const PowerVector& p,
                               std::size_t cell, std::size_t user) {
    double total = net.noise_power();
    for (std::size_t k = 0; k < net.num_cells(); ++k) {
        if (k == cell) continue;
        total += p[k] * net.gain(k, user) * x[k];
    }
    return total;
}

double sinr(const Network& net, const LoadVector& x, const PowerVector& p, std::size_t cell,
            std::size_t user) {
    require_cell_vector(net, x.size(), "load vector");
    require_cell_vector(net, p.size(), "power vector");
    if (user >= net.num_users() || cell >= net.num_cells() || net.serving_cell(user) != cell) {
        throw std::invalid_argument(fmt::format("user {} is not served by cell {}", user, cell));
    }
    const double denom = interference_plus_noise(net, x, p, cell, user);
    if (!(denom > 0.0)) {
        throw std::domain_error(fmt::format(
            "SINR of user {} in cell {} undefined: zero noise and zero interference", user, cell));
    }
    return p[cell] * net.gain(cell, user) / denom;
}

LoadVector load_map(const Network& net, const LoadVector& x, const PowerVector& p,
                    const RateVector& r) {
    require_cell_vector(net, x.size(), "load vector");
    require_cell_vector(net, p.size(), "power vector");
    require_user_vector(net, r.size(), "rate vector");

    LoadVector out(net.num_cells(), 0.0);
    for (std::size_t i = 0; i < net.num_cells(); ++i) {
        double sum = 0.0;
        for (std::size_t j : net.users_of(i)) {
            if (r[j] == 0.0) continue;
            const double denom = interference_plus_noise(net, x, p, i, j);
            if (!(denom > 0.0)) {
                throw std::domain_error(fmt::format(
                    "SINR of user {} in cell {} undefined: zero noise and zero interference", j,
                    i));
            }
            const double s = p[i] * net.gain(i, j) / denom;
            const double rate = std::log1p(s);
            if (!(rate > 0.0)) {
                throw std::domain_error(fmt::format(
                    "user {} in cell {} has zero achievable rate (SINR {})", j, i, s));
            }
            sum += r[j] / rate;
        }
        out[i] = sum;
    }
    return out;
}

EnergyReport energy(const LoadVector& x, const PowerVector& p,
                    std::optional<std::vector<double>> weights) {
    if (x.size() != p.size()) {
        throw std::invalid_argument(
            fmt::format("load has {} entries but power has {}", x.size(), p.size()));
    }
    if (weights) {
        if (weights->size() != x.size()) {
            throw std::invalid_argument(fmt::format("weights have {} entries, expected {}",
                                                    weights->size(), x.size()));
        }
        for (double w : *weights) {
            if (!(w > 0.0)) throw std::invalid_argument("energy weights must be positive");
        }
    }
    EnergyReport report;
    report.per_cell.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        report.per_cell[i] = x[i] * p[i];
        report.total += (weights ? (*weights)[i] : 1.0) * report.per_cell[i];
    }
    report.weights = std::move(weights);
    return report;
}

bool meets_demand(const RateVector& r, const RateVector& d_min) {
    if (r.size() != d_min.size()) return false;
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j] < d_min[j]) return false;
    }
    return true;
}

}  // namespace lcopt
