// Acceptance run: one PASS/FAIL line per criterion; exits 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "crnrd/entropy.hpp"
#include "crnrd/equilibrium.hpp"
#include "crnrd/network.hpp"
#include "crnrd/probes.hpp"
#include "crnrd/scenario.hpp"
#include "crnrd/simulation.hpp"
#include "crnrd/spatial.hpp"

using namespace crnrd;

namespace {

const std::string presets = CRNRD_PRESETS_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Scenario preset(const std::string& name) { return load_scenario(presets + "/" + name + ".scenario"); }

ReactionNetwork special_net() { return parse_network("S1 <=> 2 S2 @ 1 k1\nS2 <=> 2 S3 @ 1 k2\n"); }

// The thm2 trajectory is shared by criteria 5, 6 and 10.
struct Thm2Run {
    Trajectory traj;
    double seconds = 0.0;
};

const Thm2Run& thm2_run() {
    static const Thm2Run run = [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto sc = preset("thm2-measurable");
        const auto r = resolve_run(sc);
        Thm2Run out;
        out.traj = simulate(r.u0, sc.net, sc.fields, sc.grid, sc.sim, r.equilibrium.u_inf);
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }();
    return run;
}

Outcome conservation_basis_oracle() {
    const auto net = special_net();
    const auto& basis = net.conservation_basis();
    if (basis.size() != 1) return {false, fmt("basis size %zu", basis.size())};
    const auto& q = basis[0];
    const bool exact = q.size() == 3 && q[0] == 4.0 && q[1] == 2.0 && q[2] == 1.0;
    return {exact, fmt("q = (%g, %g, %g)", q[0], q[1], q[2])};
}

Outcome equilibrium_oracle() {
    const auto net = special_net();
    const auto e7 = special_equilibrium(7.0);
    const std::vector<double> m7{7.0};
    const auto cbe = find_cbe(net, m7);
    double err7 = 0.0;
    double gap = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        err7 = std::max(err7, std::abs(e7[i] - 1.0));
        gap = std::max(gap, std::abs(cbe.u_inf[i] - e7[i]));
    }
    const auto e74 = special_equilibrium(74.0);
    const double want[3] = {16.0, 4.0, 2.0};
    double err74 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) err74 = std::max(err74, std::abs(e74[i] - want[i]));
    const bool pass = cbe.converged && err7 <= 1e-10 && gap <= 1e-8 && err74 <= 1e-10;
    return {pass, fmt("|z(7)-1| = %.1e, |find_cbe - z| = %.1e, |z(74)-(16,4,2)| = %.1e", err7, gap, err74)};
}

Outcome production_identity() {
    double worst = 0.0;
    std::mt19937_64 rng(20240);
    std::uniform_real_distribution<double> conc(0.05, 10.0);
    std::uniform_real_distribution<double> alpha(0.1, 3.0);
    const auto check = [&](const ReactionNetwork& net, const std::vector<double>& u_inf) {
        const auto ids = net.profile_ids();
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> u(net.num_species());
            for (auto& v : u) v = conc(rng);
            std::vector<double> a(ids.size());
            for (auto& v : a) v = alpha(rng);
            std::vector<double> k;
            for (const auto& rx : net.reactions()) {
                const auto at = std::find(ids.begin(), ids.end(), rx.profile_id) - ids.begin();
                k.push_back(rx.beta * a[static_cast<std::size_t>(at)]);
            }
            const auto [lhs, rhs] = reaction_entropy_production_identity(net, u, u_inf, k);
            worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + rhs));
        }
    };
    const auto fig1b = load_scenario(presets + "/fig1b.scenario");
    const auto cbe = find_cbe(fig1b.net, *fig1b.totals);
    if (!cbe.converged) return {false, "fig1b equilibrium did not converge"};
    check(fig1b.net, cbe.u_inf);
    check(special_net(), special_equilibrium(7.0));
    return {worst <= 1e-12, fmt("max |lhs-rhs|/(1+rhs) = %.2e over 200 states", worst)};
}

Outcome psi_inequality() {
    std::size_t violations = 0;
    for (int i = 1; i <= 200; ++i) {
        for (int j = 1; j <= 200; ++j) {
            const double w = 10.0 * i / 200.0;
            const double z = 10.0 * j / 200.0;
            const double g = std::sqrt(w) - std::sqrt(z);
            if (psi(w, z) < g * g) ++violations;
        }
    }
    return {violations == 0, fmt("%zu violations on 40000 points", violations)};
}

Outcome entropy_law() {
    const auto& rows = thm2_run().traj.rows;
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& a = rows[r - 1];
        const auto& b = rows[r];
        const double integral = 0.5 * (a.dissipation.total + b.dissipation.total) * (b.t - a.t);
        if (integral <= 1e-9) continue;
        ++checked;
        worst = std::max(worst, std::abs(b.entropy - a.entropy + integral) / integral);
    }
    return {checked > 0 && worst <= 0.05,
            fmt("max relative defect %.2e over %zu record intervals", worst, checked)};
}

Outcome exponential_decay() {
    const auto& run = thm2_run();
    const auto& traj = run.traj;
    const auto fit = fit_decay_rate(traj.times(), traj.entropies(), FitWindow{0.2, 0.8});
    double min_u = std::numeric_limits<double>::infinity();
    for (const auto& row : traj.rows) min_u = std::min(min_u, row.min_u);
    const bool pass = traj.termination.empty() && fit.lambda > 0.0 && fit.r_squared >= 0.99 &&
                      traj.max_conservation_drift <= 1e-8 && min_u >= 0.0 && run.seconds < 60.0;
    return {pass, fmt("lambda = %.4f, r2 = %.5f, drift = %.1e, min u = %.4f, %.2f s", fit.lambda,
                      fit.r_squared, traj.max_conservation_drift, min_u, run.seconds)};
}

Outcome lambda_scaling() {
    const auto sc = preset("thm2-measurable");
    const auto run = resolve_run(sc);
    auto setup = sweep_setup(sc, run);
    setup.mode = SweepMode::both;
    const auto res = omega_sweep(setup, {0.4, 0.2, 0.1}, sc.sweep.seeds);
    std::string lambdas;
    for (const auto& l : res.levels) lambdas += fmt("%s%.4f(+-%.1e)", lambdas.empty() ? "" : " ", l.lambda, l.stderr);
    return {res.strictly_decreasing && res.fit_valid && res.b > 0.0,
            "lambda " + lambdas + fmt(", b = %.4f", res.b)};
}

Outcome degenerate_diffusion() {
    const auto sc = preset("thm3-degenerate");
    const auto run = resolve_run(sc);
    const auto traj = simulate(run.u0, sc.net, sc.fields, sc.grid, sc.sim, run.equilibrium.u_inf);
    const auto fit = fit_decay_rate(traj.times(), traj.entropies(), sc.window);
    const std::size_t s3 = sc.net.species_index(sc.eps.species);
    const auto runs = epsilon_regularized_run(run.u0, sc.net, sc.fields, sc.grid, sc.sim,
                                              run.equilibrium.u_inf, s3, sc.eps.values);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::string lambdas;
    bool eps_ok = runs.size() == 3;
    for (const auto& t : runs) {
        const auto f = fit_decay_rate(t.times(), t.entropies(), sc.window);
        eps_ok = eps_ok && f.lambda > 0.0 && t.termination.empty();
        lo = std::min(lo, f.lambda);
        hi = std::max(hi, f.lambda);
        lambdas += fmt(" %.4f", f.lambda);
    }
    const double ratio = hi / lo;
    const bool pass = traj.termination.empty() && fit.lambda > 0.0 && fit.r_squared >= 0.98 && eps_ok &&
                      ratio <= 1.2;
    return {pass, fmt("lambda = %.4f, r2 = %.5f, eps lambdas", fit.lambda, fit.r_squared) + lambdas +
                      fmt(", max/min = %.4f", ratio)};
}

Outcome dissipation_lower_bound() {
    const auto sc = preset("thm2-measurable");
    const auto& w1 = sc.masks.at("omega1");
    const auto& w2 = sc.masks.at("omega2");
    const auto u_inf = special_equilibrium(7.0);
    const std::vector<double> totals{7.0};
    double worst = -std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto s = sample_compatible_state(sc.net, sc.grid, totals, seed, 1.0);
        const double d = entropy_dissipation(s, sc.net, sc.fields, u_inf, sc.grid).total;
        const double bound = special_dissipation_bound(s, sc.fields, sc.grid, w1, w2, sc.sweep.kappa);
        worst = std::max(worst, bound - d);
    }
    return {worst <= 1e-13, fmt("max(bound - D) = %.2e over 100 states", worst)};
}

Outcome hp_monotone() {
    const auto& traj = thm2_run().traj;
    if (traj.hp_orders != std::vector<int>{1, 2, 4}) return {false, "H_p columns missing"};
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r < traj.rows.size(); ++r)
        for (std::size_t p = 0; p < 3; ++p)
            worst = std::max(worst, traj.rows[r].hp[p] - traj.rows[r - 1].hp[p]);
    return {worst <= 1e-10, fmt("max per-record increase %.2e", worst)};
}

Outcome disjoint_support() {
    const auto sc = preset("remark-2x2-disjoint");
    const auto run = resolve_run(sc);
    const auto traj = simulate(run.u0, sc.net, sc.fields, sc.grid, sc.sim, run.equilibrium.u_inf);
    const double rate = stationarity_rate(traj.final_state, sc.net, sc.fields, sc.grid, sc.sim);
    double spread = 0.0;
    for (std::size_t i = 0; i < sc.net.num_species(); ++i) {
        const auto v = traj.final_state.species(i);
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        spread = std::max(spread, *mx - *mn);
    }
    const double m0 = conserved_totals(sc.net, run.u0, sc.grid)[0];
    const double m1 = conserved_totals(sc.net, traj.final_state, sc.grid)[0];
    const double drift = std::abs(m1 - m0) / m0;
    return {rate < 1e-8 && spread > 1e-3 && drift <= 1e-10,
            fmt("stationarity %.1e, spread %.4f, mass drift %.1e", rate, spread, drift)};
}

Outcome poincare() {
    const Grid grid(1, 200);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double full = poincare_constant(grid, mask_full(grid));
    const double half = poincare_constant(grid, mask_from_intervals(grid, {Box{Interval{0.0, 0.5}}}));
    const double split = poincare_constant(
        grid, mask_from_intervals(grid, {Box{Interval{0.1, 0.3}}, Box{Interval{0.6, 0.8}}}));
    const double e_full = std::abs(full / pi2 - 1.0);
    const double e_half = std::abs(half / (4.0 * pi2) - 1.0);
    return {e_full <= 0.01 && e_half <= 0.01 && split == 0.0,
            fmt("full %.4f (rel %.1e), half %.4f (rel %.1e), disconnected %g", full, e_full, half, e_half,
                split)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "conservation basis", 1e-3, conservation_basis_oracle},
        {2, "equilibrium", 1e-2, equilibrium_oracle},
        {3, "entropy production identity", 1.0, production_identity},
        {4, "psi inequality", 0.1, psi_inequality},
        {5, "discrete entropy law", 60.0, entropy_law},
        {6, "exponential decay", 60.0, exponential_decay},
        {7, "lambda scaling", 300.0, lambda_scaling},
        {8, "degenerate diffusion", 300.0, degenerate_diffusion},
        {9, "dissipation lower bound", 1.0, dissipation_lower_bound},
        {10, "H_p monotonicity", 60.0, hp_monotone},
        {11, "disjoint support steady state", 60.0, disjoint_support},
        {12, "Poincare constant", 5.0, poincare},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = s < c.budget_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::printf("%s  %2d  %-30s %9.4f s  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, s,
                    o.detail.c_str(), in_time ? "" : " (over time budget)");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
