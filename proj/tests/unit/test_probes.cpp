#include <doctest.h>

#include <cmath>
#include <numbers>

#include "crnrd/equilibrium.hpp"
#include "crnrd/probes.hpp"
#include "fixtures.hpp"

using namespace crnrd;

namespace {

FieldSet masked_fields(const Grid& grid, double f1, double f2, std::uint64_t seed) {
    FieldSet f;
    f.profiles.emplace("k1", coefficient_on_mask(mask_random(grid, f1, seed), 1.0));
    f.profiles.emplace("k2", coefficient_on_mask(mask_random(grid, f2, seed + 1), 1.0));
    for (int i = 0; i < 3; ++i) f.diffusion.push_back(diffusion_constant(grid, 1.0));
    return f;
}

}  // namespace

TEST_CASE("compatible samples match the totals") {
    const auto net = parse_network(fixtures::special);
    const Grid grid(1, 50);
    const std::vector<double> totals{7.0};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = sample_compatible_state(net, grid, totals, seed, 1.0);
        const auto t = conserved_totals(net, s, grid);
        CHECK(std::abs(t[0] - 7.0) <= 1e-10 * 7.0);
        CHECK(s.min_value() > 0.0);
    }
    const auto a = sample_compatible_state(net, grid, totals, 99, 0.7);
    const auto b = sample_compatible_state(net, grid, totals, 99, 0.7);
    CHECK(a.values() == b.values());
    CHECK(sample_compatible_state(net, grid, totals, 100, 0.7).values() != a.values());

    // Zero roughness: a uniform state; the scale exponents are the minimum-norm
    // solution, so log u is parallel to q = (4,2,1).
    const auto flat = sample_compatible_state(net, grid, totals, 5, 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        for (double v : flat.species(i)) CHECK(v == doctest::Approx(flat.at(i, 0)).epsilon(1e-14));
    }
    const double c = std::log(flat.at(2, 0));
    CHECK(std::log(flat.at(0, 0)) == doctest::Approx(4.0 * c).epsilon(1e-8));
    CHECK(std::log(flat.at(1, 0)) == doctest::Approx(2.0 * c).epsilon(1e-8));
}

TEST_CASE("compatible samples on a network with two conservation laws") {
    const auto net = parse_network(fixtures::fig1b);
    const Grid grid(2, 8);
    const std::vector<double> u{6.0, 2.0, 6.0, 3.0};
    const auto totals = homogeneous_totals(net, u);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = sample_compatible_state(net, grid, totals, seed, 0.5);
        const auto t = conserved_totals(net, s, grid);
        for (std::size_t j = 0; j < totals.size(); ++j) {
            CHECK(std::abs(t[j] - totals[j]) <= 1e-10 * std::max(1.0, std::abs(totals[j])));
        }
    }
    CHECK_THROWS_AS(sample_compatible_state(net, grid, std::vector<double>{1.0}, 1, 0.5), ValidationError);
}

TEST_CASE("EED ratio probe") {
    const auto net = parse_network(fixtures::special);
    const Grid grid(1, 40);
    const auto u_inf = special_equilibrium(7.0);
    const auto fields = masked_fields(grid, 0.4, 0.4, 3);
    const auto report = eed_ratio_probe(net, grid, fields, u_inf, 200, 17, 0.8);
    CHECK(report.n_samples + report.n_skipped == 200);
    CHECK(report.min_ratio > 0.0);
    CHECK(report.min_ratio <= report.q05);
    CHECK(report.q05 <= report.q50);
    CHECK(report.argmin.entropy > 0.0);
    CHECK(report.argmin.dissipation / report.argmin.entropy == doctest::Approx(report.min_ratio));

    const auto again = eed_ratio_probe(net, grid, fields, u_inf, 200, 17, 0.8);
    CHECK(again.min_ratio == report.min_ratio);
    CHECK(again.q50 == report.q50);
    CHECK(again.argmin.index == report.argmin.index);

    // Smaller omega1 (nested mask) cannot raise any ratio.
    FieldSet smaller = fields;
    smaller.profiles.erase("k1");
    smaller.profiles.emplace("k1", coefficient_on_mask(mask_random(grid, 0.1, 3), 1.0));
    const auto shrunk = eed_ratio_probe(net, grid, smaller, u_inf, 200, 17, 0.8);
    CHECK(shrunk.min_ratio <= report.min_ratio);

    // With unit rates the zero-roughness sample (z^4, z^2, z) is the CBE itself.
    const auto at_cbe = eed_ratio_probe(net, grid, fields, u_inf, 3, 1, 0.0);
    CHECK(at_cbe.n_skipped == 3);

    // Without roughness there are no gradients: only reaction dissipation.
    const auto skewed = parse_network("S1 <=> 2 S2 @ 2,1 k1\nS2 <=> 2 S3 @ 1 k2\n");
    const auto cbe = find_cbe(skewed, std::vector<double>{7.0});
    REQUIRE(cbe.converged);
    const auto uniform = eed_ratio_probe(skewed, grid, fields, cbe.u_inf, 5, 1, 0.0);
    CHECK(uniform.n_samples == 5);
    CHECK(uniform.min_ratio > 0.0);
    CHECK(uniform.argmin.fisher == doctest::Approx(0.0));
    CHECK(uniform.q50 == doctest::Approx(uniform.min_ratio));
}

TEST_CASE("omega sweep") {
    const auto net = parse_network(fixtures::special);
    const Grid grid(1, 50);
    const auto u_inf = special_equilibrium(7.0);
    SweepSetup setup;
    setup.net = &net;
    setup.grid = &grid;
    setup.base = masked_fields(grid, 1.0, 1.0, 0);
    setup.profile1 = "k1";
    setup.profile2 = "k2";
    setup.u_inf = u_inf;
    State u0(3, grid.num_cells());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < grid.num_cells(); ++c)
            u0.at(i, c) = u_inf[i] * (1.0 + 0.5 * std::cos(std::numbers::pi * static_cast<double>(i + 1) * grid.center(c)[0]));
    setup.u0 = u0;
    setup.cfg.dt = 1e-3;
    setup.cfg.t_end = 2.0;
    setup.cfg.record_every = 10;

    const auto single = omega_sweep(setup, {1.0}, {7});
    REQUIRE(single.rows.size() == 1);
    CHECK(single.rows[0].lambda > 0.0);
    CHECK_FALSE(single.fit_valid);
    CHECK(single.to_csv().rfind("omega1,omega2,lambda,r2\n1,1,", 0) == 0);

    setup.horizon_ref = 1.0;
    const auto sweep = omega_sweep(setup, {1.0, 0.4, 0.1}, {7});
    REQUIRE(sweep.levels.size() == 3);
    CHECK(sweep.levels[0].lambda > sweep.levels[1].lambda);
    CHECK(sweep.levels[1].lambda > sweep.levels[2].lambda);
    CHECK(sweep.monotone);
    CHECK(sweep.fit_valid);
    CHECK(sweep.b > 0.0);

    CHECK_THROWS_AS(omega_sweep(setup, {0.0}, {1}), ValidationError);
    CHECK_THROWS_AS(omega_sweep(setup, {0.5}, {}), ValidationError);
}
