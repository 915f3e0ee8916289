#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "crnrd/entropy.hpp"
#include "crnrd/equilibrium.hpp"
#include "crnrd/probes.hpp"
#include "crnrd/scenario.hpp"
#include "crnrd/simulation.hpp"

namespace crnrd::cli {

namespace {

using nlohmann::json;

struct Options {
    std::string scenario;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    std::vector<double> totals;
    std::optional<std::size_t> n;
    std::vector<double> fractions;
};

/// Failure that maps to a specific exit code.
struct CommandError {
    int code;
    std::string kind;
    std::string message;
    json results = nullptr;  // partial results worth reporting
};

json vec(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return out;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json equilibrium_json(const ReactionNetwork& net, const std::vector<double>& totals,
                      const EquilibriumResult& eq) {
    json residuals = json::array();
    if (!eq.u_inf.empty() && *std::min_element(eq.u_inf.begin(), eq.u_inf.end()) > 0.0) {
        for (const auto& r : complex_balance_residual(net, eq.u_inf)) {
            residuals.push_back({{"component", r.component},
                                 {"complex", complex_text(net.complexes()[r.complex], net.species())},
                                 {"value", r.value}});
        }
    }
    const bool positive = !eq.u_inf.empty() && *std::min_element(eq.u_inf.begin(), eq.u_inf.end()) > 0.0;
    return {{"totals", vec(totals)},
            {"u_inf", vec(eq.u_inf)},
            {"species", net.species()},
            {"converged", eq.converged},
            {"positive", positive},
            {"cb_residual", num(eq.cb_residual)},
            {"cons_residual", num(eq.cons_residual)},
            {"iterations", eq.iterations},
            {"condition_estimate", num(eq.condition_estimate)},
            {"residuals", residuals},
            {"diagnostic", eq.diagnostic}};
}

json fit_json(const DecayFit& fit) {
    return {{"lambda", num(fit.lambda)},       {"lambda_stderr", num(fit.lambda_stderr)},
            {"intercept", num(fit.intercept)}, {"C", num(std::exp(fit.intercept))},
            {"r_squared", num(fit.r_squared)}, {"window", {fit.t_lo, fit.t_hi}},
            {"points", fit.points}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CommandError{ExitCode::validation, "io", "cannot write " + path.string()};
    f << text;
}

std::filesystem::path out_dir(const Options& opt) {
    std::filesystem::path dir = opt.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(opt.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw CommandError{ExitCode::validation, "io", "cannot create " + dir.string()};
    return dir;
}

std::string num_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// ---------------------------------------------------------------------------

json cmd_analyze(const Scenario& sc) {
    const auto& net = sc.net;
    json reactions = json::array();
    for (const auto& rx : net.reactions()) {
        reactions.push_back({{"reactant", complex_text(net.complexes()[rx.reactant], net.species())},
                             {"product", complex_text(net.complexes()[rx.product], net.species())},
                             {"beta", rx.beta},
                             {"profile", rx.profile_id},
                             {"component", rx.component}});
    }
    json basis = json::array();
    for (const auto& q : net.conservation_basis()) {
        json row = json::array();
        for (Eigen::Index i = 0; i < q.size(); ++i) row.push_back(q[i]);
        basis.push_back(row);
    }
    const auto verdict = check_assumption_A(net);
    const auto profiles = check_profile_consistency(net);
    json components = json::array();
    for (std::size_t l = 0; l < net.num_components(); ++l) {
        const auto& comp = net.components()[l];
        json complexes = json::array();
        for (auto c : comp.complexes) complexes.push_back(complex_text(net.complexes()[c], net.species()));
        std::vector<std::string> ids;
        for (std::size_t r = comp.first; r < comp.last; ++r) {
            const auto& id = net.reactions()[r].profile_id;
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        }
        const bool consistent = std::find(profiles.inconsistent_components.begin(),
                                          profiles.inconsistent_components.end(),
                                          l) == profiles.inconsistent_components.end();
        components.push_back({{"complexes", complexes},
                              {"reactions", {comp.first, comp.last}},
                              {"profiles", ids},
                              {"profile_consistent", consistent}});
    }
    json masks = json::object();
    for (const auto& [name, mask] : sc.masks) {
        masks[name] = {{"cells", mask.count()},
                       {"measure", mask.measure()},
                       {"connected", mask_connected(sc.grid, mask)},
                       {"poincare", poincare_constant(sc.grid, mask)}};
    }
    return {{"species", net.species()},
            {"num_species", net.num_species()},
            {"num_complexes", net.num_complexes()},
            {"num_reactions", net.num_reactions()},
            {"reactions", reactions},
            {"rank", net.stoich_rank()},
            {"num_conservation_laws", net.num_conservation_laws()},
            {"conservation_basis", basis},
            {"num_components", net.num_components()},
            {"components", components},
            {"assumption_A", verdict.holds},
            {"assumption_A_violations", verdict.violating_reactions},
            {"profile_consistency", profiles.holds},
            {"grid", {{"dim", sc.grid.dim()}, {"n", sc.grid.cells_per_axis()}}},
            {"masks", masks}};
}

json cmd_equilibrium(const Scenario& sc, const Options& opt) {
    std::vector<double> totals;
    if (!opt.totals.empty()) {
        totals = opt.totals;
    } else if (sc.totals) {
        totals = *sc.totals;
    } else if (!sc.init.values.empty()) {
        totals = homogeneous_totals(sc.net, sc.init.values);
    } else if (sc.net.num_conservation_laws() > 0) {
        throw CommandError{ExitCode::validation, "validation", "no totals: pass --totals or set equilibrium.totals"};
    }
    if (totals.size() != sc.net.num_conservation_laws()) {
        throw CommandError{ExitCode::validation, "validation",
                           "expected " + std::to_string(sc.net.num_conservation_laws()) + " totals"};
    }
    const auto eq = scenario_equilibrium(sc, totals);
    auto res = equilibrium_json(sc.net, totals, eq);
    res["method"] = sc.method == EquilibriumMethod::special ? "special" : "gauss-newton";
    if (!eq.converged) {
        throw CommandError{ExitCode::solver, "solver", "equilibrium did not converge: " + eq.diagnostic, res};
    }
    return res;
}

json trajectory_summary(const Trajectory& traj, const FitWindow& window, bool& fit_ok) {
    json s = {{"rows", traj.rows.size()},
              {"t_final", traj.rows.back().t},
              {"entropy_initial", traj.rows.front().entropy},
              {"entropy_final", traj.rows.back().entropy},
              {"l1_dist_final", vec(traj.rows.back().l1_dist)},
              {"min_u", num(std::min_element(traj.rows.begin(), traj.rows.end(),
                                             [](const auto& a, const auto& b) { return a.min_u < b.min_u; })
                                ->min_u)},
              {"clamped_mass", traj.rows.back().clamped_mass},
              {"max_conservation_drift", traj.max_conservation_drift},
              {"entropy_violation", traj.entropy_violation},
              {"termination", traj.termination}};
    fit_ok = true;
    try {
        s["fit"] = fit_json(fit_decay_rate(traj.times(), traj.entropies(), window));
    } catch (const ValidationError& e) {
        s["fit"] = nullptr;
        s["fit_error"] = e.what();
        fit_ok = false;
    }
    return s;
}

json cmd_simulate(const Scenario& sc, const Options& opt, std::vector<std::string>& warnings) {
    const auto run = resolve_run(sc);
    const auto dir = out_dir(opt);
    const auto start = std::chrono::steady_clock::now();
    const auto traj = simulate(run.u0, sc.net, sc.fields, sc.grid, sc.sim, run.equilibrium.u_inf);
    write_file(dir / "trajectory.csv", traj.to_csv());
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        write_file(dir / ("snapshot_" + num_tag(traj.snapshots[k].time) + ".csv"),
                   snapshot_csv(traj.snapshots[k], sc.grid));
    }
    bool fit_ok = false;
    json res = {{"equilibrium", equilibrium_json(sc.net, homogeneous_totals(sc.net, run.equilibrium.u_inf),
                                                 run.equilibrium)},
                {"trajectory", trajectory_summary(traj, sc.window, fit_ok)},
                {"files", {"trajectory.csv"}}};
    if (!fit_ok) warnings.push_back("decay fit unavailable: " + res["trajectory"]["fit_error"].get<std::string>());

    // Spatial structure and stationarity of the final state.
    json spread = json::array();
    for (std::size_t i = 0; i < sc.net.num_species(); ++i) {
        const auto v = traj.final_state.species(i);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        spread.push_back(*hi - *lo);
    }
    res["final_spread"] = spread;
    res["stationarity_rate"] = stationarity_rate(traj.final_state, sc.net, sc.fields, sc.grid, sc.sim);

    bool eps_violation = false;
    if (!sc.eps.values.empty() && !traj.entropy_violation) {
        const auto species = sc.net.species_index(sc.eps.species);
        const auto runs = epsilon_regularized_run(run.u0, sc.net, sc.fields, sc.grid, sc.sim,
                                                  run.equilibrium.u_inf, species, sc.eps.values);
        json eps_json = json::array();
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (std::size_t k = 0; k < runs.size(); ++k) {
            const std::string file = "trajectory_eps_" + num_tag(sc.eps.values[k]) + ".csv";
            write_file(dir / file, runs[k].to_csv());
            res["files"].push_back(file);
            bool ok = false;
            auto summary = trajectory_summary(runs[k], sc.window, ok);
            summary["eps"] = sc.eps.values[k];
            eps_violation = eps_violation || runs[k].entropy_violation;
            if (ok) {
                const double lambda = summary["fit"]["lambda"].get<double>();
                lo = std::min(lo, lambda);
                hi = std::max(hi, lambda);
            }
            eps_json.push_back(summary);
        }
        res["eps_runs"] = eps_json;
        res["eps_lambda_ratio"] = lo > 0.0 ? num(hi / lo) : json(nullptr);
    }
    res["seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(dir / "summary.json", res.dump(2) + "\n");
    if (traj.entropy_violation || eps_violation) {
        throw CommandError{ExitCode::quality, "quality", "entropy increased during the run", res};
    }
    return res;
}

json cmd_probe(const Scenario& sc, const Options& opt) {
    const auto run = resolve_run(sc);
    const std::uint64_t seed = opt.seed.value_or(sc.probe.seed);
    const std::size_t n = opt.n.value_or(sc.probe.n);
    const auto report =
        eed_ratio_probe(sc.net, sc.grid, sc.fields, run.equilibrium.u_inf, n, seed, sc.probe.roughness);
    json res = {{"n_samples", report.n_samples},
                {"n_skipped", report.n_skipped},
                {"min_ratio", num(report.min_ratio)},
                {"q05", num(report.q05)},
                {"q50", num(report.q50)},
                {"seed", report.seed},
                {"roughness", report.roughness},
                {"u_inf", vec(run.equilibrium.u_inf)},
                {"argmin",
                 {{"index", report.argmin.index},
                  {"entropy", report.argmin.entropy},
                  {"dissipation", report.argmin.dissipation},
                  {"fisher", report.argmin.fisher},
                  {"reaction", report.argmin.reaction},
                  {"entropy_level", report.argmin.entropy_level},
                  {"min_u", report.argmin.min_u}}}};
    if (!opt.out_dir.empty()) write_file(out_dir(opt) / "probe.json", res.dump(2) + "\n");
    return res;
}

json cmd_sweep(const Scenario& sc, const Options& opt) {
    const auto run = resolve_run(sc);
    auto fractions = opt.fractions.empty() ? sc.sweep.fractions : opt.fractions;
    if (fractions.empty()) {
        throw CommandError{ExitCode::validation, "validation", "no sweep fractions: set sweep.fractions"};
    }
    std::vector<std::uint64_t> seeds = sc.sweep.seeds;
    if (opt.seed) seeds = {*opt.seed};
    const auto setup = sweep_setup(sc, run);
    const auto result = omega_sweep(setup, fractions, seeds);
    const auto dir = out_dir(opt);
    write_file(dir / "sweep.csv", result.to_csv());
    json rows = json::array();
    for (const auto& r : result.rows) {
        rows.push_back({{"fraction", r.fraction},
                        {"seed", r.seed},
                        {"omega1", r.omega1_measure},
                        {"omega2", r.omega2_measure},
                        {"lambda", num(r.lambda)},
                        {"lambda_stderr", num(r.lambda_stderr)},
                        {"r_squared", num(r.r_squared)}});
    }
    json levels = json::array();
    for (const auto& l : result.levels) {
        levels.push_back({{"fraction", l.fraction}, {"lambda", num(l.lambda)}, {"stderr", num(l.stderr)}});
    }
    json res = {{"rows", rows},
                {"levels", levels},
                {"fit", {{"a", num(result.a)}, {"b", num(result.b)}, {"valid", result.fit_valid}}},
                {"strictly_decreasing", result.strictly_decreasing},
                {"monotone", result.monotone},
                {"files", {"sweep.csv"}}};
    write_file(dir / "sweep.json", res.dump(2) + "\n");
    return res;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Reaction-diffusion network toolkit: structure, equilibria, simulation and entropy probes"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed_value = 0;
    std::size_t n_value = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", opt.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "Output directory for CSV and JSON files");
        sub->add_flag("--quiet", opt.quiet, "Do not print the JSON report");
    };
    auto* analyze = app.add_subcommand("analyze", "Structural report of the network");
    common(analyze);
    auto* equilibrium = app.add_subcommand("equilibrium", "Complex balanced equilibrium");
    common(equilibrium);
    equilibrium->add_option("--totals", opt.totals, "Conserved totals (overrides the scenario)");
    auto* simulate_cmd = app.add_subcommand("simulate", "Run the reaction-diffusion system");
    common(simulate_cmd);
    auto* probe = app.add_subcommand("probe", "Sample D/E over conservation-compatible states");
    common(probe);
    auto* seed_opt = probe->add_option("--seed", seed_value, "Sampling seed");
    auto* n_opt = probe->add_option("--n", n_value, "Number of samples");
    auto* sweep = app.add_subcommand("sweep", "Decay rate against the sizes of the reaction sets");
    common(sweep);
    auto* sweep_seed = sweep->add_option("--seed", seed_value, "Mask seed (replaces sweep.seeds)");
    sweep->add_option("--fractions", opt.fractions, "Mask fractions (replaces sweep.fractions)");
    for (auto* sub : {analyze, equilibrium, simulate_cmd}) {
        sub->add_option("--seed", seed_value, "Accepted for uniformity; scenario seeds apply");
    }

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        std::ostringstream o;
        std::ostringstream e_out;
        const int rc = app.exit(e, o, e_out);
        out << o.str();
        err << e_out.str();
        return rc == 0 ? ExitCode::ok : ExitCode::usage;
    }
    if (seed_opt->count() > 0 || sweep_seed->count() > 0) opt.seed = seed_value;
    if (n_opt->count() > 0) opt.n = n_value;

    const auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    json report = {{"command", command}, {"scenario_hash", nullptr}, {"results", nullptr}, {"warnings", json::array()}};
    std::vector<std::string> warnings;
    int code = ExitCode::ok;
    auto fail = [&](int rc, const std::string& kind, const std::string& message, json extra = nullptr) {
        code = rc;
        report["error"] = {{"kind", kind}, {"message", message}};
        if (!extra.is_null()) report["results"] = std::move(extra);
        err << "error: " << message << "\n";
    };

    try {
        const auto sc = load_scenario(opt.scenario);
        report["scenario_hash"] = sc.hash;
        warnings = sc.warnings;
        if (command == "analyze") {
            report["results"] = cmd_analyze(sc);
        } else if (command == "equilibrium") {
            report["results"] = cmd_equilibrium(sc, opt);
        } else if (command == "simulate") {
            report["results"] = cmd_simulate(sc, opt, warnings);
        } else if (command == "probe") {
            report["results"] = cmd_probe(sc, opt);
        } else {
            report["results"] = cmd_sweep(sc, opt);
        }
    } catch (const CommandError& e) {
        fail(e.code, e.kind, e.message, e.results);
    } catch (const ParseError& e) {
        fail(ExitCode::validation, "parse", e.what());
        report["error"]["line"] = e.line();
        report["error"]["column"] = e.column();
    } catch (const ScenarioError& e) {
        fail(ExitCode::validation, "validation", e.what());
        if (e.line() > 0) report["error"]["line"] = e.line();
    } catch (const ValidationError& e) {
        fail(ExitCode::validation, "validation", e.what());
    } catch (const SweepAborted& e) {
        fail(ExitCode::quality, "quality", e.what());
    } catch (const SolverFailure& e) {
        fail(ExitCode::solver, "solver", e.what());
    } catch (const StepError& e) {
        switch (e.kind()) {
            case StepError::Kind::unstable_explicit:
                fail(ExitCode::validation, "validation", e.what());
                break;
            case StepError::Kind::negative_update:
                fail(ExitCode::quality, "quality", e.what());
                break;
            case StepError::Kind::solver_breakdown:
                fail(ExitCode::solver, "solver", e.what());
                break;
        }
    }
    report["warnings"] = warnings;
    if (!opt.quiet) out << report.dump(2) << "\n";
    return code;
}

}  // namespace crnrd::cli
