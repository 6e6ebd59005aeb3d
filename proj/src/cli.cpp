#include "lcopt/cli.hpp"

#include "lcopt/errors.hpp"
#include "lcopt/feasibility.hpp"
#include "lcopt/load_solver.hpp"
#include "lcopt/optimizer.hpp"
#include "lcopt/power_solver.hpp"
#include "lcopt/scenario_io.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fmt/core.h>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

namespace lcopt::cli {

namespace {

struct Args {
    std::string scenario;
    std::string out;
    std::optional<double> tol_outer;
    std::optional<double> tol_inner;
    std::optional<double> tol_load;
    std::optional<std::size_t> max_outer;
    std::string mode;
    std::vector<double> p_cap;
    std::vector<double> phi;
    std::vector<double> xi;
    std::vector<double> power;
    std::vector<double> load;
    std::optional<std::uint64_t> seed;
    double epsilon_prime = 0.0;
    std::string scheme = "full";
    std::string rate_unit = "nats";

    // region
    std::size_t samples = 1000;
    double p_max = 2.0;

    // generate / import
    SyntheticSpec synth;
    std::optional<double> ref_gain_db;
    std::optional<double> noise_dbm;
    std::string gains_path;
    bool gains_db = false;
};

// Writes `content` to `path` through a temporary sibling so a failed run
// never leaves a truncated file behind.
void write_atomically(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::invalid_argument(fmt::format("cannot write output file '{}'", path));
        f << content;
        if (!f) throw std::invalid_argument(fmt::format("failed writing output file '{}'", path));
    }
    std::filesystem::rename(tmp, target);
}

double rate_factor(const Args& a) { return a.rate_unit == "bits" ? std::numbers::ln2 : 1.0; }

IapOptions solver_options(const Args& a, const Scenario& sc) {
    IapOptions o = apply_solver_defaults(sc);
    if (a.tol_outer) o.outer_tol = *a.tol_outer;
    if (a.tol_inner) o.inner_tol = *a.tol_inner;
    if (a.max_outer) o.max_outer = *a.max_outer;
    if (a.mode == "sync") o.mode = IapMode::synchronous;
    if (a.mode == "async") o.mode = IapMode::asynchronous;
    if (!a.p_cap.empty()) {
        const std::size_t n = sc.network.num_cells();
        if (a.p_cap.size() == 1) {
            o.p_cap = PowerVector(n, a.p_cap[0]);
        } else if (a.p_cap.size() == n) {
            o.p_cap = PowerVector(a.p_cap);
        } else {
            throw std::invalid_argument(
                fmt::format("--p-cap needs 1 or {} values, got {}", n, a.p_cap.size()));
        }
    }
    return o;
}

LoadSolveOptions load_options(const Args& a) {
    LoadSolveOptions o;
    if (a.tol_load) o.tol = *a.tol_load;
    return o;
}

// Expands a scalar into a per-cell vector.
std::vector<double> per_cell(const std::vector<double>& v, std::size_t n, const char* flag) {
    if (v.size() == 1) return std::vector<double>(n, v[0]);
    if (v.size() == n) return v;
    throw std::invalid_argument(fmt::format("{} needs 1 or {} values, got {}", flag, n, v.size()));
}

struct Output {
    std::string stdout_text;
    std::string file_text;
    // A completed report can still carry a nonzero verdict (check on rho >= 1).
    int exit_code = kExitOk;
    std::string error_text;
};

std::string per_cell_csv(const PowerVector& p, const LoadVector& x) {
    std::string csv = "cell,power,load,energy\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        csv += fmt::format("{},{},{},{}\n", i, format_double(p[i]), format_double(x[i]),
                           format_double(p[i] * x[i]));
    }
    return csv;
}

Output cmd_check(const Args&, const Scenario& sc) {
    const SatisfiabilityReport rep = is_satisfiable(sc.network, sc.demand);
    Output o;
    o.stdout_text = fmt::format("rho = {:.12g}\niterations = {}\nverdict: {}\n", rep.rho,
                                rep.iterations, rep.satisfiable ? "satisfiable" : "unsatisfiable");
    if (!rep.converged) o.stdout_text += "warning: spectral radius estimate did not converge\n";
    o.file_text = fmt::format("rho,satisfiable,iterations\n{},{},{}\n", format_double(rep.rho),
                              rep.satisfiable ? 1 : 0, rep.iterations);
    if (!rep.satisfiable) {
        o.exit_code = kExitInfeasible;
        o.error_text = fmt::format("unsatisfiable: spectral radius {:.12g} is not below 1\n", rep.rho);
    }
    return o;
}

Output cmd_solve_load(const Args& a, const Scenario& sc) {
    const std::size_t n = sc.network.num_cells();
    PowerVector p = a.power.empty()
                        ? (sc.solver.initial_power ? PowerVector(*sc.solver.initial_power)
                                                   : PowerVector(n, 1.0))
                        : PowerVector(per_cell(a.power, n, "--power"));
    const LoadSolution sol = solve_load(sc.network, p, sc.demand, {}, load_options(a));
    if (!sol.report.converged()) {
        throw ConvergenceError(fmt::format("load iteration stopped ({}) after {} iterations",
                                           to_string(sol.report.termination),
                                           sol.report.iterations));
    }
    Output o;
    o.stdout_text = fmt::format("termination: {}\niterations: {}\nresidual: {:.3g}\n",
                                to_string(sol.report.termination), sol.report.iterations,
                                sol.report.final_residual());
    for (std::size_t i = 0; i < n; ++i) {
        o.stdout_text += fmt::format("cell {}: power {:.10g} load {:.10g}\n", i, p[i], sol.x[i]);
    }
    o.stdout_text += fmt::format("load feasible (0 < x <= 1): {}\n",
                                 check_feasible_load(sol.x) ? "yes" : "no");
    o.file_text = per_cell_csv(p, sol.x);
    return o;
}

Output cmd_solve_power(const Args& a, const Scenario& sc) {
    const std::size_t n = sc.network.num_cells();
    LoadVector target = !a.load.empty()  ? LoadVector(per_cell(a.load, n, "--load"))
                        : !a.phi.empty() ? LoadVector(per_cell(a.phi, n, "--phi"))
                                         : LoadVector(n, 1.0);
    const PowerSolution sol = iap(sc.network, target, sc.demand, solver_options(a, sc));
    if (sol.report.termination == Termination::infeasible_detected) {
        throw NotImplementableError(
            "target load is not implementable: power diverged (infeasible_detected)");
    }
    if (!sol.report.converged()) {
        throw ConvergenceError(fmt::format("power iteration did not converge in {} iterations",
                                           sol.report.iterations));
    }
    Output o;
    o.stdout_text = fmt::format("termination: {}\nouter iterations: {}\nresidual: {:.3g}\n",
                                to_string(sol.report.termination), sol.report.iterations,
                                sol.report.final_residual());
    std::string csv = "cell,power,target_load,realized_load,pinned\n";
    for (std::size_t i = 0; i < n; ++i) {
        o.stdout_text += fmt::format("cell {}: power {:.10g} target {:.10g} realized {:.10g}{}\n",
                                     i, sol.p[i], target[i], sol.realized_load[i],
                                     sol.pinned[i] ? " (pinned at cap)" : "");
        csv += fmt::format("{},{},{},{},{}\n", i, format_double(sol.p[i]),
                           format_double(target[i]), format_double(sol.realized_load[i]),
                           sol.pinned[i] ? 1 : 0);
    }
    o.file_text = std::move(csv);
    return o;
}

Output cmd_optimize(const Args& a, const Scenario& sc) {
    OptimizeOptions opts;
    opts.iap = solver_options(a, sc);
    opts.epsilon_prime = a.epsilon_prime;
    const OptimizationResult res = minimize_energy(sc.network, sc.demand, opts);
    Output o;
    o.stdout_text = fmt::format(
        "minimum sum energy: {:.10g}\ntarget load: {:.10g}\nouter iterations: {}\nresidual: {:.3g}\n",
        res.energy.total, 1.0 - a.epsilon_prime, res.report.iterations,
        res.report.final_residual());
    for (std::size_t i = 0; i < res.p_star.size(); ++i) {
        o.stdout_text += fmt::format("cell {}: power {:.10g}\n", i, res.p_star[i]);
    }
    o.file_text = per_cell_csv(res.p_star, res.x_star);
    return o;
}

Output cmd_baseline(const Args& a, const Scenario& sc) {
    BaselineOptions opts;
    opts.load = load_options(a);
    const BaselineResult res = uniform_power_baseline(sc.network, sc.demand, opts);
    Output o;
    o.stdout_text = fmt::format("uniform power beta: {:.10g}\nsum energy: {:.10g}\nbisection steps: {}\n",
                                res.beta, res.energy.total, res.bisection_steps);
    for (std::size_t i = 0; i < res.x.size(); ++i) {
        o.stdout_text += fmt::format("cell {}: load {:.10g}\n", i, res.x[i]);
    }
    o.file_text = per_cell_csv(res.p, res.x);
    return o;
}

Output cmd_sweep_demand(const Args& a, const Scenario& sc) {
    if (a.xi.empty()) throw std::invalid_argument("sweep-demand needs --xi");
    DemandSweepOptions opts;
    opts.iap = solver_options(a, sc);
    opts.baseline.load = load_options(a);
    if (a.scheme == "full") {
        opts.scheme = DemandScheme::full_load;
    } else if (a.scheme == "uniform-load") {
        opts.scheme = DemandScheme::uniform_load;
        if (a.phi.size() != 1) throw std::invalid_argument("uniform-load scheme needs one --phi");
        opts.phi = a.phi[0];
    } else {
        opts.scheme = DemandScheme::uniform_power;
    }
    std::vector<double> xi = a.xi;
    for (double& v : xi) v *= rate_factor(a);
    Output o;
    o.file_text = format_sweep_csv(sweep_demand(sc.network, xi, opts));
    return o;
}

Output cmd_sweep_load(const Args& a, const Scenario& sc) {
    if (a.phi.empty()) throw std::invalid_argument("sweep-load needs --phi");
    Output o;
    o.file_text = format_sweep_csv(sweep_load(sc.network, sc.demand, a.phi, solver_options(a, sc)));
    return o;
}

Output cmd_trace(const Args& a, const Scenario& sc) {
    const std::size_t n = sc.network.num_cells();
    LoadVector target = !a.load.empty()  ? LoadVector(per_cell(a.load, n, "--load"))
                        : !a.phi.empty() ? LoadVector(per_cell(a.phi, n, "--phi"))
                                         : LoadVector(n, 1.0 - a.epsilon_prime);
    const ConvergenceTrace tr = convergence_trace(sc.network, sc.demand, target, solver_options(a, sc));
    if (tr.report.termination == Termination::infeasible_detected) {
        throw NotImplementableError("target load is not implementable: power diverged");
    }
    Output o;
    o.file_text = "iteration,distance_l2\n";
    for (const TracePoint& pt : tr.points) {
        o.file_text += fmt::format("{},{}\n", pt.iteration, format_double(pt.distance));
    }
    return o;
}

Output cmd_region(const Args& a, const Scenario& sc) {
    if (!a.seed) throw std::invalid_argument("region needs --seed");
    const auto samples = sample_load_region(sc.network, sc.demand, a.samples, a.p_max, *a.seed);
    const std::size_t n = sc.network.num_cells();
    Output o;
    o.file_text = "sample";
    for (std::size_t i = 0; i < n; ++i) o.file_text += fmt::format(",p{}", i + 1);
    for (std::size_t i = 0; i < n; ++i) o.file_text += fmt::format(",x{}", i + 1);
    o.file_text += ",converged\n";
    for (std::size_t s = 0; s < samples.size(); ++s) {
        o.file_text += std::to_string(s);
        for (double v : samples[s].p) o.file_text += "," + format_double(v);
        for (double v : samples[s].x) o.file_text += "," + format_double(v);
        o.file_text += samples[s].converged ? ",1\n" : ",0\n";
    }
    return o;
}

Output cmd_generate(const Args& a) {
    if (!a.seed) throw std::invalid_argument("generate needs --seed");
    SyntheticSpec spec = a.synth;
    spec.rng_seed = *a.seed;
    if (a.ref_gain_db) spec.reference_gain = std::pow(10.0, *a.ref_gain_db / 10.0);
    if (a.noise_dbm) spec.noise_power = std::pow(10.0, (*a.noise_dbm - 30.0) / 10.0);
    spec.demand *= rate_factor(a);
    Output o;
    o.file_text = serialize_scenario(generate_synthetic(spec));
    return o;
}

Output cmd_import(const Args& a) {
    std::ifstream in(a.gains_path, std::ios::binary);
    if (!in) throw std::invalid_argument(fmt::format("cannot open gain table '{}'", a.gains_path));
    std::stringstream buf;
    buf << in.rdbuf();
    double noise = a.synth.noise_power;
    if (a.noise_dbm) noise = std::pow(10.0, (*a.noise_dbm - 30.0) / 10.0);
    Output o;
    o.file_text = serialize_scenario(
        import_gain_table(buf.str(), noise, a.synth.demand * rate_factor(a), a.gains_db));
    return o;
}

void add_scenario_flags(CLI::App* sub, Args& a) {
    sub->add_option("--scenario", a.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", a.out, "Output CSV path");
}

void add_solver_flags(CLI::App* sub, Args& a) {
    sub->add_option("--tol-outer", a.tol_outer, "IAP load tolerance (infinity norm)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol-inner", a.tol_inner, "Bisection tolerance on |eta - 1|")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--max-outer", a.max_outer, "Maximum IAP outer iterations");
    sub->add_option("--mode", a.mode, "IAP update mode")->check(CLI::IsMember({"sync", "async"}));
    sub->add_option("--p-cap", a.p_cap, "Per-cell power cap in watts (one value or one per cell)")
        ->delimiter(',');
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Args a;
    CLI::App app{"Energy minimization for load-coupled cellular networks", "lcopt"};
    app.require_subcommand(1);

    auto* check = app.add_subcommand("check", "Spectral-radius satisfiability of the demand");
    add_scenario_flags(check, a);

    auto* solve_load_cmd = app.add_subcommand("solve-load", "Load fixed point for a given power");
    add_scenario_flags(solve_load_cmd, a);
    solve_load_cmd->add_option("--power", a.power, "Power per cell (one value or one per cell)")
        ->delimiter(',');
    solve_load_cmd->add_option("--tol-load", a.tol_load, "Load iteration tolerance")
        ->check(CLI::PositiveNumber);

    auto* solve_power_cmd = app.add_subcommand("solve-power", "Power achieving a target load");
    add_scenario_flags(solve_power_cmd, a);
    add_solver_flags(solve_power_cmd, a);
    solve_power_cmd->add_option("--load", a.load, "Target load per cell")->delimiter(',');
    solve_power_cmd->add_option("--phi", a.phi, "Uniform target load")->delimiter(',');

    auto* optimize = app.add_subcommand("optimize", "Minimum sum-energy operating point");
    add_scenario_flags(optimize, a);
    add_solver_flags(optimize, a);
    optimize->add_option("--epsilon-prime", a.epsilon_prime, "Target load is 1 - epsilon'")
        ->check(CLI::Range(0.0, 0.999999));

    auto* baseline = app.add_subcommand("baseline", "Smallest uniform power keeping loads <= 1");
    add_scenario_flags(baseline, a);
    baseline->add_option("--tol-load", a.tol_load, "Load iteration tolerance")
        ->check(CLI::PositiveNumber);

    auto* sweep_demand_cmd = app.add_subcommand("sweep-demand", "Energy versus uniform demand xi");
    add_scenario_flags(sweep_demand_cmd, a);
    add_solver_flags(sweep_demand_cmd, a);
    sweep_demand_cmd->add_option("--xi", a.xi, "Comma-separated demand values")->delimiter(',');
    sweep_demand_cmd->add_option("--scheme", a.scheme, "full | uniform-load | uniform-power")
        ->check(CLI::IsMember({"full", "uniform-load", "uniform-power"}));
    sweep_demand_cmd->add_option("--phi", a.phi, "Target load for the uniform-load scheme")
        ->delimiter(',');
    sweep_demand_cmd->add_option("--rate-unit", a.rate_unit, "Unit of --xi values")
        ->check(CLI::IsMember({"nats", "bits"}));

    auto* sweep_load_cmd = app.add_subcommand("sweep-load", "Energy versus uniform load phi");
    add_scenario_flags(sweep_load_cmd, a);
    add_solver_flags(sweep_load_cmd, a);
    sweep_load_cmd->add_option("--phi", a.phi, "Comma-separated load values")->delimiter(',');

    auto* trace = app.add_subcommand("trace", "Per-iteration distance to the target load");
    add_scenario_flags(trace, a);
    add_solver_flags(trace, a);
    trace->add_option("--phi", a.phi, "Uniform target load")->delimiter(',');
    trace->add_option("--load", a.load, "Target load per cell")->delimiter(',');
    trace->add_option("--epsilon-prime", a.epsilon_prime, "Target load is 1 - epsilon'")
        ->check(CLI::Range(0.0, 0.999999));

    auto* region = app.add_subcommand("region", "Sample (power, load) pairs");
    add_scenario_flags(region, a);
    region->add_option("--samples", a.samples, "Number of power draws");
    region->add_option("--p-max", a.p_max, "Powers are drawn from (0, p-max]")
        ->check(CLI::PositiveNumber);
    region->add_option("--seed", a.seed, "Random seed")->required();

    auto* generate = app.add_subcommand("generate", "Write a synthetic grid scenario");
    generate->add_option("--out", a.out, "Scenario output path");
    generate->add_option("--seed", a.seed, "Random seed")->required();
    generate->add_option("--cells", a.synth.cells, "Number of cells")->check(CLI::PositiveNumber);
    generate->add_option("--grid-columns", a.synth.grid_columns, "Cells per grid row (0 = square)");
    generate->add_option("--users-per-cell", a.synth.users_per_cell)->check(CLI::PositiveNumber);
    generate->add_option("--spacing", a.synth.cell_spacing_m, "Cell spacing in meters")
        ->check(CLI::PositiveNumber);
    generate->add_option("--exponent", a.synth.path_loss_exponent, "Path-loss exponent")
        ->check(CLI::PositiveNumber);
    auto* ref_lin = generate->add_option("--ref-gain", a.synth.reference_gain, "Linear gain at 1 m")
                        ->check(CLI::PositiveNumber);
    generate->add_option("--ref-gain-db", a.ref_gain_db, "Gain at 1 m in dB")->excludes(ref_lin);
    auto* noise_lin = generate->add_option("--noise", a.synth.noise_power, "Noise power in watts")
                          ->check(CLI::PositiveNumber);
    generate->add_option("--noise-dbm", a.noise_dbm, "Noise power in dBm")->excludes(noise_lin);
    generate->add_option("--demand", a.synth.demand, "Per-user demand")->check(CLI::PositiveNumber);
    generate->add_option("--rate-unit", a.rate_unit, "Unit of --demand")
        ->check(CLI::IsMember({"nats", "bits"}));

    auto* import = app.add_subcommand("import-gains", "Convert a per-user gain table to a scenario");
    import->add_option("--gains", a.gains_path, "CSV: user,serving_cell,g_0,...,g_{n-1}")
        ->required()
        ->check(CLI::ExistingFile);
    import->add_option("--out", a.out, "Scenario output path");
    auto* inoise = import->add_option("--noise", a.synth.noise_power, "Noise power in watts")
                       ->check(CLI::PositiveNumber);
    import->add_option("--noise-dbm", a.noise_dbm, "Noise power in dBm")->excludes(inoise);
    import->add_option("--demand", a.synth.demand, "Per-user demand")->check(CLI::PositiveNumber);
    import->add_flag("--db", a.gains_db, "Gains are given in dB");
    import->add_option("--rate-unit", a.rate_unit, "Unit of --demand")
        ->check(CLI::IsMember({"nats", "bits"}));

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }

    try {
        Output o;
        bool table = false;
        if (generate->parsed()) {
            o = cmd_generate(a);
            table = true;
        } else if (import->parsed()) {
            o = cmd_import(a);
            table = true;
        } else {
            const Scenario sc = load_scenario(a.scenario);
            if (check->parsed()) {
                o = cmd_check(a, sc);
            } else if (solve_load_cmd->parsed()) {
                o = cmd_solve_load(a, sc);
            } else if (solve_power_cmd->parsed()) {
                o = cmd_solve_power(a, sc);
            } else if (optimize->parsed()) {
                o = cmd_optimize(a, sc);
            } else if (baseline->parsed()) {
                o = cmd_baseline(a, sc);
            } else if (sweep_demand_cmd->parsed()) {
                o = cmd_sweep_demand(a, sc);
                table = true;
            } else if (sweep_load_cmd->parsed()) {
                o = cmd_sweep_load(a, sc);
                table = true;
            } else if (trace->parsed()) {
                o = cmd_trace(a, sc);
                table = true;
            } else if (region->parsed()) {
                o = cmd_region(a, sc);
                table = true;
            }
        }
        if (!a.out.empty()) {
            write_atomically(a.out, o.file_text);
        } else if (table) {
            out << o.file_text;
        }
        out << o.stdout_text;
        err << o.error_text;
        return o.exit_code;
    } catch (const UnsatisfiableError& e) {
        err << "unsatisfiable: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const NotImplementableError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ConvergenceError& e) {
        err << "not converged: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

}  // namespace lcopt::cli
