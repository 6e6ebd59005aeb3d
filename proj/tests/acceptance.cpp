// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "lcopt/cli.hpp"
#include "lcopt/errors.hpp"
#include "lcopt/feasibility.hpp"
#include "lcopt/load_solver.hpp"
#include "lcopt/optimizer.hpp"
#include "lcopt/power_solver.hpp"
#include "lcopt/scenario_io.hpp"
#include "test_support.hpp"

#include <chrono>
#include <filesystem>
#include <fmt/core.h>
#include <functional>
#include <numeric>
#include <sstream>

using namespace lcopt;
using namespace lcopt::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

double sum(const PowerVector& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

double inf_distance(const PowerVector& a, const PowerVector& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

std::string fixture(const char* name) {
    return (std::filesystem::path(LCOPT_FIXTURE_DIR) / name).string();
}

Verdict toy_satisfiability() {
    Verdict v;
    const Network toy = toy_network();
    const RateVector r{2.0, 2.0};
    const auto t0 = Clock::now();
    const SatisfiabilityReport rep = is_satisfiable(toy, r);
    const double elapsed = seconds_since(t0);
    v.require(rep.satisfiable, "verdict not satisfiable");
    v.require(std::abs(rep.rho - 2.0 / 3.0) <= 1e-9, fmt::format("rho = {:.15g}", rep.rho));
    v.require(elapsed < 1e-3, fmt::format("spectral test took {:.3g} s", elapsed));

    std::ostringstream out, err;
    const int code = cli::run({"lcopt", "check", "--scenario", fixture("toy_r2.json")}, out, err);
    v.require(code == cli::kExitOk && out.str().find("verdict: satisfiable") != std::string::npos,
              "check subcommand did not report satisfiable");
    if (v.pass) v.detail = fmt::format("rho = {:.12g}, {:.1f} us", rep.rho, elapsed * 1e6);
    return v;
}

Verdict toy_implementability() {
    Verdict v;
    const auto t0 = Clock::now();
    const PowerSolution hot = iap(toy_network(), LoadVector{1.0, 1.0}, RateVector{2.0, 2.0});
    v.require(hot.report.termination == Termination::infeasible_detected,
              fmt::format("d = (2,2) terminated with {}", to_string(hot.report.termination)));
    bool threw = false;
    try {
        minimize_energy(toy_network(), RateVector{2.0, 2.0});
    } catch (const NotImplementableError&) {
        threw = true;
    }
    v.require(threw, "optimize on d = (2,2) did not report non-implementability");

    // Relative 1e-6 on power needs a load tolerance below the 1e-5 default.
    OptimizeOptions tight;
    tight.iap = tight_iap();
    const OptimizationResult ok = minimize_energy(toy_network(), RateVector{1.0, 1.0}, tight);
    const double elapsed = seconds_since(t0);
    double rel = 0.0;
    for (double p : ok.p_star) rel = std::max(rel, std::abs(p - kToyQ) / kToyQ);
    v.require(rel <= 1e-6, fmt::format("relative power error {:.3g}", rel));
    v.require(elapsed < 0.1, fmt::format("took {:.3g} s", elapsed));
    if (v.pass) {
        v.detail = fmt::format("d=(2,2) diverged after {} sweeps; d=(1,1) rel err {:.2g}; {:.2f} ms",
                               hot.report.iterations, rel, elapsed * 1e3);
    }
    return v;
}

Verdict single_cell_closed_forms() {
    Verdict v;
    double worst = 0.0;
    for (double g : {0.5, 1.0, 3.0}) {
        for (double sigma2 : {0.2, 1.0}) {
            const Network net = single_cell(g, sigma2);
            for (double d : {0.3, 1.0, 2.5}) {
                const double expected = sigma2 * std::expm1(d) / g;
                const double got = minimize_energy(net, RateVector{d}).energy.total;
                worst = std::max(worst, std::abs(got - expected) / expected);
            }
            const std::vector<double> phi{0.25, 0.5, 0.75, 1.0};
            const SweepTable t = sweep_load(net, RateVector{1.0}, phi);
            for (std::size_t k = 0; k < phi.size(); ++k) {
                if (!t.rows[k].feasible()) {
                    v.require(false, fmt::format("phi = {} infeasible", phi[k]));
                    continue;
                }
                const double expected = phi[k] * sigma2 * std::expm1(1.0 / phi[k]) / g;
                worst = std::max(worst, std::abs(*t.rows[k].total_energy - expected) / expected);
            }
        }
    }
    v.require(worst <= 1e-8, fmt::format("worst relative error {:.3g}", worst));
    if (v.pass) v.detail = fmt::format("worst relative error {:.2g}", worst);
    return v;
}

Verdict interference_function_properties() {
    Verdict v;
    std::mt19937_64 rng(1001);
    const auto t0 = Clock::now();
    std::size_t checks = 0;
    for (int t = 0; t < 100; ++t) {
        const Instance inst = random_instance(rng, 2, 5, uniform(rng, 0.1, 0.9));
        const std::size_t n = inst.net.num_cells();
        LoadVector x(n, 0.0);
        PowerVector p(n, 0.0), p_up(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = uniform(rng, 0.3, 1.0);
            p[i] = uniform(rng, 0.05, 5.0);
            p_up[i] = p[i] * uniform(rng, 1.0, 2.0);
        }
        // The property is about the map itself, so no divergence cut-off.
        auto h = [&](const PowerVector& q) { return power_map(inst.net, x, inst.r, q, 0.0, 1e300); };
        const PowerVector base = h(p);
        const PowerVector up = h(p_up);
        for (std::size_t i = 0; i < n; ++i) {
            v.require(base[i] > 0.0, fmt::format("instance {}: h_{} not positive", t, i));
            v.require(up[i] >= base[i], fmt::format("instance {}: h_{} not monotone", t, i));
            checks += 2;
        }
        for (double alpha : {1.1, 2.0, 3.0}) {
            PowerVector scaled = p;
            for (double& s : scaled) s *= alpha;
            const PowerVector hs = h(scaled);
            for (std::size_t i = 0; i < n; ++i) {
                v.require(alpha * base[i] - hs[i] > 1e-12,
                          fmt::format("instance {}: scalability margin {:.3g} at alpha {}", t,
                                      alpha * base[i] - hs[i], alpha));
                ++checks;
            }
        }
    }
    const double elapsed = seconds_since(t0);
    v.require(elapsed < 10.0, fmt::format("took {:.3g} s", elapsed));
    if (v.pass) v.detail = fmt::format("{} checks on 100 networks, {:.2f} s", checks, elapsed);
    return v;
}

Verdict uniqueness_and_modes() {
    Verdict v;
    std::mt19937_64 rng(1002);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const ImplementableCase c = implementable_case(rng);
        const std::size_t n = c.x.size();
        PowerVector random_start(n, 0.0);
        for (double& s : random_start) s = uniform(rng, 0.01, 50.0);
        std::vector<PowerVector> results;
        for (IapMode mode : {IapMode::synchronous, IapMode::asynchronous}) {
            for (const PowerVector& start : {PowerVector(n, 1.0), random_start}) {
                IapOptions o = tight_iap(mode);
                o.p0 = start;
                const PowerSolution sol = iap(c.inst.net, c.x, c.inst.r, o);
                v.require(sol.report.converged(), fmt::format("instance {} did not converge", t));
                results.push_back(sol.p);
            }
        }
        for (std::size_t k = 1; k < results.size(); ++k) {
            worst = std::max(worst, inf_distance(results[0], results[k]));
        }
    }
    v.require(worst <= 1e-6, fmt::format("max disagreement {:.3g}", worst));
    if (v.pass) v.detail = fmt::format("max disagreement {:.2g} over 50 instances", worst);
    return v;
}

Verdict load_power_monotonicity() {
    Verdict v;
    std::mt19937_64 rng(1003);
    double min_margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 50; ++t) {
        const ImplementableCase c = implementable_case(rng, 0.5, 0.95);
        LoadVector more = c.x;
        more[uniform_index(rng, 0, more.size() - 1)] += 0.05;
        const PowerSolution sol = iap(c.inst.net, more, c.inst.r, tight_iap());
        v.require(sol.report.converged(), fmt::format("instance {}: raised load not reached", t));
        for (std::size_t i = 0; i < more.size(); ++i) {
            min_margin = std::min(min_margin, c.p[i] - sol.p[i]);
        }
    }
    v.require(min_margin > 1e-12, fmt::format("smallest power decrease {:.3g}", min_margin));
    if (v.pass) v.detail = fmt::format("smallest power decrease {:.3g}", min_margin);
    return v;
}

Verdict open_region_probe() {
    Verdict v;
    std::mt19937_64 rng(1004);
    double min_gap = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 25; ++t) {
        const ImplementableCase c = implementable_case(rng);
        PowerVector louder = c.p;
        for (double& s : louder) s *= 1.5;
        const LoadSolution lower = solve_load(c.inst.net, louder, c.inst.r);
        v.require(lower.report.converged(), fmt::format("instance {}: load solve failed", t));
        for (std::size_t i = 0; i < c.x.size(); ++i) min_gap = std::min(min_gap, c.x[i] - lower.x[i]);
        const PowerSolution sol = iap(c.inst.net, lower.x, c.inst.r);
        v.require(sol.report.converged(), fmt::format("instance {}: IAP failed at reduced load", t));
    }
    v.require(min_gap > 0.0, fmt::format("load did not drop (gap {:.3g})", min_gap));
    if (v.pass) v.detail = fmt::format("smallest load drop {:.3g}; IAP reached all 25", min_gap);
    return v;
}

Verdict optimality_dominance() {
    Verdict v;
    std::mt19937_64 rng(1005);
    OptimizeOptions tight;
    tight.iap = tight_iap();
    int compared_baseline = 0;
    int compared_phi = 0;
    int no_baseline = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    int instances = 0;
    while (instances < 25) {
        const Instance inst = random_instance(rng, 2, 5, uniform(rng, 0.05, 0.3));
        const std::size_t n = inst.net.num_cells();
        double best;
        try {
            best = minimize_energy(inst.net, inst.r, tight).energy.total;
        } catch (const NotImplementableError&) {
            continue;  // no feasible point; draw another instance
        }
        ++instances;
        for (double phi : {0.6, 0.8}) {
            const PowerSolution s = iap(inst.net, uniform_load(n, phi), inst.r, tight_iap());
            // A non-implementable uniform load has no finite energy to compare.
            if (!s.report.converged()) continue;
            ++compared_phi;
            min_gap = std::min(min_gap, phi * sum(s.p) - best);
            v.require(best < phi * sum(s.p), fmt::format("phi = {} beat full load", phi));
        }
        try {
            const BaselineResult b = uniform_power_baseline(inst.net, inst.r);
            ++compared_baseline;
            min_gap = std::min(min_gap, b.energy.total - best);
            v.require(best < b.energy.total, "uniform-power baseline beat full load");
        } catch (const NotImplementableError&) {
            ++no_baseline;
        }
        const SweepTable t = sweep_load(inst.net, inst.r, {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}, tight_iap());
        double last = std::numeric_limits<double>::infinity();
        for (const SweepRow& row : t.rows) {
            if (!row.feasible()) continue;
            v.require(*row.total_energy < last, "load sweep not strictly decreasing");
            last = *row.total_energy;
        }
        v.require(t.rows.back().feasible(), "full-load row infeasible in the load sweep");
    }
    v.require(compared_baseline > 0 && compared_phi > 0, "no finite comparisons were made");
    if (v.pass) {
        v.detail = fmt::format(
            "{} uniform-load and {} baseline comparisons ({} baselines unreachable), min gap {:.3g}",
            compared_phi, compared_baseline, no_baseline, min_gap);
    }
    return v;
}

Verdict rate_monotone_load() {
    Verdict v;
    std::mt19937_64 rng(1006);
    double min_gap = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 50; ++t) {
        const Instance inst = random_instance(rng, 2, 5, uniform(rng, 0.1, 0.8));
        const std::size_t n = inst.net.num_cells();
        PowerVector p(n, 0.0);
        for (double& s : p) s = uniform(rng, 0.2, 3.0);
        RateVector more = inst.r;
        for (double& s : more) s *= 1.1;
        const LoadSolution a = solve_load(inst.net, p, inst.r);
        const LoadSolution b = solve_load(inst.net, p, more);
        v.require(a.report.converged() && b.report.converged(),
                  fmt::format("instance {}: load solve failed", t));
        for (std::size_t i = 0; i < n; ++i) min_gap = std::min(min_gap, b.x[i] - a.x[i]);
    }
    v.require(min_gap > 0.0, fmt::format("load did not grow (gap {:.3g})", min_gap));
    if (v.pass) v.detail = fmt::format("smallest load increase {:.3g}", min_gap);
    return v;
}

Verdict residual_contracts() {
    Verdict v;
    std::mt19937_64 rng(1007);
    double worst_load = 0.0;
    double worst_iap = 0.0;
    int iap_converged = 0;
    for (int t = 0; t < 50; ++t) {
        const Instance inst = random_instance(rng, 2, 5, uniform(rng, 0.1, 0.9));
        const std::size_t n = inst.net.num_cells();
        PowerVector p(n, 0.0);
        for (double& s : p) s = uniform(rng, 0.2, 3.0);
        const LoadSolution ls = solve_load(inst.net, p, inst.r);
        if (ls.report.converged()) worst_load = std::max(worst_load, ls.report.final_residual());
        const PowerSolution ps = iap(inst.net, uniform_load(n, 1.0), inst.r);
        if (ps.report.converged()) {
            ++iap_converged;
            worst_iap = std::max(worst_iap, ps.report.final_residual());
        }
    }
    v.require(worst_load <= 1e-10, fmt::format("load residual {:.3g}", worst_load));
    v.require(worst_iap <= 1e-5, fmt::format("IAP residual {:.3g}", worst_iap));
    v.require(iap_converged > 0, "no IAP run converged");

    std::vector<std::size_t> iterations;
    for (double xi : {0.2, 0.4, 0.6, 0.8, 1.0, 1.2}) {
        const ConvergenceTrace tr =
            convergence_trace(toy_network(), RateVector{xi, xi}, LoadVector{1.0, 1.0});
        v.require(tr.report.converged(), fmt::format("toy trace at xi = {} did not converge", xi));
        for (std::size_t k = 1; k < tr.points.size(); ++k) {
            v.require(tr.points[k].distance < tr.points[k - 1].distance,
                      fmt::format("toy trace at xi = {} not strictly decreasing", xi));
        }
        if (!iterations.empty()) {
            v.require(tr.report.iterations >= iterations.back(),
                      fmt::format("iterations dropped at xi = {}", xi));
        }
        iterations.push_back(tr.report.iterations);
    }
    if (v.pass) {
        std::string its;
        for (std::size_t k : iterations) its += (its.empty() ? "" : ",") + std::to_string(k);
        v.detail = fmt::format("load {:.2g}, IAP {:.2g} ({} runs); toy iterations {}", worst_load,
                               worst_iap, iap_converged, its);
    }
    return v;
}

Verdict scale_smoke_test() {
    Verdict v;
    SyntheticSpec spec;
    spec.cells = 148;
    spec.users_per_cell = 10;
    spec.demand = 0.05;
    spec.rng_seed = 1;
    const auto t0 = Clock::now();
    const Scenario sc = generate_synthetic(spec);
    const SatisfiabilityReport sat = is_satisfiable(sc.network, sc.demand);
    v.require(sat.satisfiable, fmt::format("demand unsatisfiable (rho {:.3g})", sat.rho));
    if (!v.pass) return v;
    try {
        const OptimizationResult r = minimize_energy(sc.network, sc.demand);
        const double elapsed = seconds_since(t0);
        v.require(r.report.iterations < 100, fmt::format("{} outer iterations", r.report.iterations));
        v.require(elapsed < 60.0, fmt::format("took {:.3g} s", elapsed));
        if (v.pass) {
            v.detail = fmt::format("1480 users, rho {:.3f}, {} outer iterations, {:.2f} s", sat.rho,
                                   r.report.iterations, elapsed);
        }
    } catch (const std::exception& e) {
        v.require(false, e.what());
    }
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"AC1 toy satisfiability", toy_satisfiability},
        {"AC2 toy implementability", toy_implementability},
        {"AC3 single-cell closed forms", single_cell_closed_forms},
        {"AC4 interference-function properties", interference_function_properties},
        {"AC5 uniqueness and mode equivalence", uniqueness_and_modes},
        {"AC6 load-power monotonicity", load_power_monotonicity},
        {"AC7 open implementable region", open_region_probe},
        {"AC8 full-load optimality", optimality_dominance},
        {"AC9 rate-monotone load", rate_monotone_load},
        {"AC10 solver residuals and traces", residual_contracts},
        {"AC11 148-cell scale run", scale_smoke_test},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = fmt::format("threw: {}", e.what());
        }
        fmt::print("{} {}: {}\n", v.pass ? "PASS" : "FAIL", name, v.detail);
        failures += v.pass ? 0 : 1;
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
