#include "lcopt/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/core.h>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

namespace lcopt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

const json& field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(fmt::format("scenario is missing required field '{}'", key));
    return *it;
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(fmt::format("{} must be a number", where));
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(fmt::format("{} must be finite", where));
    return d;
}

std::vector<double> number_array(const json& v, const std::string& where) {
    if (!v.is_array()) fail(fmt::format("{} must be an array", where));
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        out.push_back(number(v[k], fmt::format("{}[{}]", where, k)));
    }
    return out;
}

std::size_t index_value(const json& v, const std::string& where) {
    if (!v.is_number_unsigned()) fail(fmt::format("{} must be a non-negative integer", where));
    return v.get<std::size_t>();
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& prefix) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return number(*it, prefix + key);
}

json solver_to_json(const SolverDefaults& s) {
    json out = json::object();
    if (s.outer_tol) out["outer_tol"] = *s.outer_tol;
    if (s.inner_tol) out["inner_tol"] = *s.inner_tol;
    if (s.mode) out["mode"] = *s.mode == IapMode::synchronous ? "sync" : "async";
    if (s.max_outer) out["max_outer"] = *s.max_outer;
    if (s.initial_power) out["initial_power"] = *s.initial_power;
    if (s.divergence_power) out["divergence_power"] = *s.divergence_power;
    return out;
}

SolverDefaults solver_from_json(const json& v) {
    if (!v.is_object()) fail("solver must be an object");
    SolverDefaults s;
    s.outer_tol = optional_number(v, "outer_tol", "solver.");
    s.inner_tol = optional_number(v, "inner_tol", "solver.");
    s.divergence_power = optional_number(v, "divergence_power", "solver.");
    if (auto it = v.find("mode"); it != v.end()) {
        if (*it == "sync") {
            s.mode = IapMode::synchronous;
        } else if (*it == "async") {
            s.mode = IapMode::asynchronous;
        } else {
            fail("solver.mode must be \"sync\" or \"async\"");
        }
    }
    if (auto it = v.find("max_outer"); it != v.end()) {
        s.max_outer = index_value(*it, "solver.max_outer");
    }
    if (auto it = v.find("initial_power"); it != v.end()) {
        s.initial_power = number_array(*it, "solver.initial_power");
    }
    return s;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(fmt::format("scenario is not valid JSON: {}", e.what()));
    }
    if (!doc.is_object()) fail("scenario must be a JSON object");
    if (field(doc, "format") != kScenarioFormat) {
        fail(fmt::format("scenario format must be \"{}\"", kScenarioFormat));
    }
    const std::size_t version = index_value(field(doc, "version"), "version");
    if (version != static_cast<std::size_t>(kScenarioVersion)) {
        fail(fmt::format("unsupported scenario version {} (expected {})", version,
                         kScenarioVersion));
    }

    const std::size_t n = index_value(field(doc, "cells"), "cells");
    const json& users_json = field(doc, "users");
    if (!users_json.is_array() || users_json.size() != n) {
        fail(fmt::format("users must be an array with one list per cell ({} cells)", n));
    }
    std::vector<std::vector<std::size_t>> users(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const json& list = users_json[i];
        if (!list.is_array()) fail(fmt::format("users[{}] must be an array", i));
        for (std::size_t k = 0; k < list.size(); ++k) {
            users[i].push_back(index_value(list[k], fmt::format("users[{}][{}]", i, k)));
        }
        total += users[i].size();
    }

    const json& gains_json = field(doc, "gains");
    if (!gains_json.is_array() || gains_json.size() != n) {
        fail(fmt::format("gains must have one row per cell ({} rows)", n));
    }
    std::vector<double> gains;
    gains.reserve(n * total);
    for (std::size_t i = 0; i < n; ++i) {
        const json& row = gains_json[i];
        if (!row.is_array() || row.size() != total) {
            fail(fmt::format("gains[{}] must have {} entries (one per user)", i, total));
        }
        for (std::size_t j = 0; j < total; ++j) {
            const double g = number(row[j], fmt::format("gains[{}][{}] (cell {}, user {})", i, j, i, j));
            if (g < 0.0) fail(fmt::format("gains[{}][{}] (cell {}, user {}) is negative", i, j, i, j));
            gains.push_back(g);
        }
    }

    const double noise = number(field(doc, "noise_power"), "noise_power");
    if (noise < 0.0) fail("noise_power must be >= 0");

    Network net(std::move(users), std::move(gains), noise);

    std::vector<double> demand = number_array(field(doc, "demand"), "demand");
    if (demand.size() != total) {
        fail(fmt::format("demand must have {} entries (one per user), got {}", total, demand.size()));
    }
    for (std::size_t j = 0; j < total; ++j) {
        if (!(demand[j] > 0.0)) {
            fail(fmt::format("demand[{}] (user {}, cell {}) must be positive, got {}", j, j,
                             net.serving_cell(j), demand[j]));
        }
    }

    Scenario sc{std::move(net), RateVector(std::move(demand)), std::nullopt, {}, {}};

    if (auto it = doc.find("power_cap"); it != doc.end() && !it->is_null()) {
        std::vector<double> cap = number_array(*it, "power_cap");
        if (cap.size() != n) fail(fmt::format("power_cap must have {} entries", n));
        for (std::size_t i = 0; i < n; ++i) {
            if (!(cap[i] > 0.0)) fail(fmt::format("power_cap[{}] (cell {}) must be positive", i, i));
        }
        sc.power_cap = PowerVector(std::move(cap));
    }
    if (auto it = doc.find("metadata"); it != doc.end()) {
        if (!it->is_object()) fail("metadata must be an object");
        sc.metadata.resource_units = optional_number(*it, "resource_units", "metadata.");
        sc.metadata.unit_bandwidth_hz = optional_number(*it, "unit_bandwidth_hz", "metadata.");
        if (auto d = it->find("description"); d != it->end()) {
            if (!d->is_string()) fail("metadata.description must be a string");
            sc.metadata.description = d->get<std::string>();
        }
    }
    if (auto it = doc.find("solver"); it != doc.end()) {
        sc.solver = solver_from_json(*it);
        if (sc.solver.initial_power && sc.solver.initial_power->size() != n) {
            fail(fmt::format("solver.initial_power must have {} entries", n));
        }
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(fmt::format("cannot open scenario file '{}'", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& sc) {
    const Network& net = sc.network;
    json doc = json::object();
    doc["format"] = kScenarioFormat;
    doc["version"] = kScenarioVersion;
    doc["cells"] = net.num_cells();
    doc["users"] = net.users();
    json gains = json::array();
    for (std::size_t i = 0; i < net.num_cells(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < net.num_users(); ++j) row.push_back(net.gain(i, j));
        gains.push_back(std::move(row));
    }
    doc["gains"] = std::move(gains);
    doc["noise_power"] = net.noise_power();
    doc["demand"] = sc.demand.values();
    if (sc.power_cap) doc["power_cap"] = sc.power_cap->values();

    json meta = json::object();
    if (sc.metadata.resource_units) meta["resource_units"] = *sc.metadata.resource_units;
    if (sc.metadata.unit_bandwidth_hz) meta["unit_bandwidth_hz"] = *sc.metadata.unit_bandwidth_hz;
    if (sc.metadata.description) meta["description"] = *sc.metadata.description;
    if (!meta.empty()) doc["metadata"] = std::move(meta);

    json solver = solver_to_json(sc.solver);
    if (!solver.empty()) doc["solver"] = std::move(solver);
    return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(fmt::format("cannot write scenario file '{}'", path.string()));
    out << serialize_scenario(sc);
}

IapOptions apply_solver_defaults(const Scenario& sc, IapOptions base) {
    const SolverDefaults& s = sc.solver;
    if (s.outer_tol) base.outer_tol = *s.outer_tol;
    if (s.inner_tol) base.inner_tol = *s.inner_tol;
    if (s.mode) base.mode = *s.mode;
    if (s.max_outer) base.max_outer = *s.max_outer;
    if (s.initial_power) base.p0 = PowerVector(*s.initial_power);
    if (s.divergence_power) base.divergence_power = *s.divergence_power;
    if (sc.power_cap && !base.p_cap) base.p_cap = sc.power_cap;
    return base;
}

Scenario generate_synthetic(const SyntheticSpec& spec) {
    if (spec.cells == 0) fail("synthetic scenario needs at least one cell");
    if (spec.users_per_cell == 0) fail("synthetic scenario needs at least one user per cell");
    if (!(spec.path_loss_exponent > 0.0)) fail("path-loss exponent must be positive");
    if (!(spec.cell_spacing_m > 0.0)) fail("cell spacing must be positive");
    if (!(spec.reference_gain > 0.0)) fail("reference gain must be positive");
    if (!(spec.noise_power > 0.0)) fail("noise power must be positive");
    if (!(spec.demand > 0.0)) fail("demand must be positive");

    const std::size_t cols = spec.grid_columns > 0
                                 ? spec.grid_columns
                                 : static_cast<std::size_t>(
                                       std::ceil(std::sqrt(static_cast<double>(spec.cells))));
    std::mt19937_64 rng(spec.rng_seed);
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    struct Point {
        double x, y;
    };
    std::vector<Point> sites(spec.cells);
    for (std::size_t i = 0; i < spec.cells; ++i) {
        sites[i] = {(static_cast<double>(i % cols) + 0.5) * spec.cell_spacing_m,
                    (static_cast<double>(i / cols) + 0.5) * spec.cell_spacing_m};
    }

    const std::size_t total = spec.cells * spec.users_per_cell;
    std::vector<std::vector<std::size_t>> users(spec.cells);
    std::vector<Point> positions(total);
    for (std::size_t i = 0; i < spec.cells; ++i) {
        for (std::size_t u = 0; u < spec.users_per_cell; ++u) {
            const std::size_t j = i * spec.users_per_cell + u;
            positions[j] = {sites[i].x + (unit() - 0.5) * spec.cell_spacing_m,
                            sites[i].y + (unit() - 0.5) * spec.cell_spacing_m};
            users[i].push_back(j);
        }
    }

    std::vector<double> gains(spec.cells * total);
    for (std::size_t i = 0; i < spec.cells; ++i) {
        for (std::size_t j = 0; j < total; ++j) {
            const double d = std::max(
                1.0, std::hypot(positions[j].x - sites[i].x, positions[j].y - sites[i].y));
            gains[i * total + j] = spec.reference_gain * std::pow(d, -spec.path_loss_exponent);
        }
    }

    Scenario sc{Network(std::move(users), std::move(gains), spec.noise_power),
                RateVector(total, spec.demand), std::nullopt, {}, {}};
    sc.metadata.description =
        fmt::format("synthetic grid: {} cells, {} users/cell, spacing {} m, exponent {}, seed {}",
                    spec.cells, spec.users_per_cell, spec.cell_spacing_m,
                    spec.path_loss_exponent, spec.rng_seed);
    return sc;
}

Scenario import_gain_table(std::string_view csv, double noise_power, double demand,
                           bool gains_in_db) {
    struct Row {
        std::size_t user;
        std::size_t cell;
        std::vector<double> gains;
    };
    std::vector<Row> rows;
    std::size_t line_no = 0;
    std::size_t n = 0;
    std::istringstream in{std::string(csv)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cols.push_back(cell);
        if (cols.size() < 3) fail(fmt::format("gain table line {}: expected user,cell,gains...", line_no));
        auto parse = [&](const std::string& s, const char* what) {
            double v = 0.0;
            const char* first = s.data();
            const char* last = s.data() + s.size();
            while (first < last && *first == ' ') ++first;
            const auto res = std::from_chars(first, last, v);
            if (res.ec != std::errc{} || !std::isfinite(v)) {
                fail(fmt::format("gain table line {}: bad {} '{}'", line_no, what, s));
            }
            return v;
        };
        Row row;
        row.user = static_cast<std::size_t>(parse(cols[0], "user id"));
        row.cell = static_cast<std::size_t>(parse(cols[1], "serving cell"));
        for (std::size_t k = 2; k < cols.size(); ++k) {
            const double g = parse(cols[k], "gain");
            row.gains.push_back(gains_in_db ? std::pow(10.0, g / 10.0) : g);
        }
        if (n == 0) n = row.gains.size();
        if (row.gains.size() != n) {
            fail(fmt::format("gain table line {}: {} gains, expected {}", line_no,
                             row.gains.size(), n));
        }
        if (row.cell >= n) fail(fmt::format("gain table line {}: serving cell {} out of range", line_no, row.cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail("gain table is empty");

    const std::size_t total = rows.size();
    std::vector<std::vector<std::size_t>> users(n);
    std::vector<double> gains(n * total, 0.0);
    std::vector<bool> seen(total, false);
    for (const Row& row : rows) {
        if (row.user >= total || seen[row.user]) {
            fail(fmt::format("gain table: user ids must be a permutation of 0..{}", total - 1));
        }
        seen[row.user] = true;
        users[row.cell].push_back(row.user);
        for (std::size_t i = 0; i < n; ++i) gains[i * total + row.user] = row.gains[i];
    }
    for (auto& list : users) std::sort(list.begin(), list.end());
    return Scenario{Network(std::move(users), std::move(gains), noise_power),
                    RateVector(total, demand), std::nullopt, {}, {}};
}

std::string format_sweep_csv(const SweepTable& table) {
    std::string out = "param,total_energy,feasible,iterations\n";
    for (const SweepRow& row : table.rows) {
        out += format_double(row.param);
        out += ',';
        if (row.total_energy) out += format_double(*row.total_energy);
        out += row.feasible() ? ",1," : ",0,";
        out += std::to_string(row.iterations);
        out += '\n';
    }
    return out;
}

}  // namespace lcopt
