#pragma once

// Scenario files, synthetic scenario generation and CSV output.
//
// The on-disk format is JSON, documented in docs/scenario-format.md. Units
// on disk are linear gains, watts and normalized nats.

#include "lcopt/model.hpp"
#include "lcopt/optimizer.hpp"
#include "lcopt/power_solver.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lcopt {

inline constexpr std::string_view kScenarioFormat = "lcopt-scenario";
inline constexpr int kScenarioVersion = 1;

/// Display-only information; solvers consume normalized rates.
struct ScenarioMetadata {
    std::optional<double> resource_units;     // M
    std::optional<double> unit_bandwidth_hz;  // B
    std::optional<std::string> description;
};

/// Solver overrides stored with a scenario. Unset fields keep module defaults.
struct SolverDefaults {
    std::optional<double> outer_tol;
    std::optional<double> inner_tol;
    std::optional<IapMode> mode;
    std::optional<std::size_t> max_outer;
    std::optional<std::vector<double>> initial_power;
    std::optional<double> divergence_power;
};

struct Scenario {
    Network network;
    RateVector demand;
    std::optional<PowerVector> power_cap;
    ScenarioMetadata metadata;
    SolverDefaults solver;
};

/// Parses and validates scenario JSON. Throws std::invalid_argument whose
/// message names the offending field with its cell/user coordinates.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text: two-space indented JSON, shortest round-trip doubles.
std::string serialize_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Overlays the scenario's stored solver settings (and caps) on `base`.
IapOptions apply_solver_defaults(const Scenario& scenario, IapOptions base = {});

struct SyntheticSpec {
    std::size_t cells = 1;
    /// Cells are laid out row-major; 0 picks ceil(sqrt(cells)).
    std::size_t grid_columns = 0;
    double cell_spacing_m = 500.0;
    std::size_t users_per_cell = 1;
    double path_loss_exponent = 3.5;
    /// Linear gain at 1 m; distances below 1 m are clamped to 1 m.
    double reference_gain = 1e-3;
    double noise_power = 5.56e-13;
    /// Per-user demand written to the scenario, nats.
    double demand = 0.05;
    std::uint64_t rng_seed = 1;
};

/// Places cell sites on a square grid and draws each cell's users uniformly
/// in its own square; g = reference_gain * distance^-exponent.
/// Deterministic in the spec (including the seed).
Scenario generate_synthetic(const SyntheticSpec& spec);

/// Converts a per-user gain table (for instance exported from a pixel-based
/// propagation dataset) into a scenario. Each non-comment line is
///   user_id,serving_cell,g_0,g_1,...,g_{n-1}
/// with users numbered 0..U-1 and gains linear (or dB when gains_in_db).
/// Lines starting with '#' are skipped. Every user gets `demand` nats.
Scenario import_gain_table(std::string_view csv, double noise_power, double demand,
                           bool gains_in_db = false);

/// Columns param,total_energy,feasible,iterations; infeasible rows leave
/// total_energy empty.
std::string format_sweep_csv(const SweepTable& table);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace lcopt
