#include <doctest.h>

#include <cmath>

#include "crnrd/equilibrium.hpp"
#include "crnrd/state.hpp"
#include "fixtures.hpp"

using namespace crnrd;

namespace {

double residual_at(const std::vector<ComplexResidual>& res, const ReactionNetwork& net,
                   const std::string& species, double coeff) {
    for (const auto& r : res) {
        const auto& terms = net.complexes()[r.complex].terms();
        if (terms.size() == 1 && net.species()[terms[0].first] == species && terms[0].second == coeff) {
            return r.value;
        }
    }
    FAIL("complex not found");
    return 0.0;
}

// Bisection on 4z^4 + 2z^2 + z = M, the independent oracle for the closed form.
double bisect_root(double mass) {
    double lo = 0.0;
    double hi = std::max(1.0, mass);
    for (int i = 0; i < 400; ++i) {
        const double mid = 0.5 * (lo + hi);
        (4 * std::pow(mid, 4) + 2 * mid * mid + mid < mass ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("complex balance residuals") {
    const auto fig1b = parse_network(fixtures::fig1b);
    // u1 = u2 * u4 balances S1 <=> S2 + S4; S3 = S1 balances the second class.
    const std::vector<double> u{6.0, 2.0, 6.0, 3.0};
    for (const auto& r : complex_balance_residual(fig1b, u)) CHECK(r.value == doctest::Approx(0.0));

    const auto special = parse_network(fixtures::special);
    for (const auto& r : complex_balance_residual(special, std::vector<double>{1, 1, 1})) {
        CHECK(r.value == 0.0);
    }
    // Inflow 1 * u2^2 = 1, outflow 1 * u1 = 2.
    const auto res = complex_balance_residual(special, std::vector<double>{2, 1, 1});
    CHECK(residual_at(res, special, "S1", 1.0) == doctest::Approx(-1.0));
    CHECK(residual_at(res, special, "S2", 2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(complex_balance_residual(special, std::vector<double>{0, 1, 1}), ValidationError);
}

TEST_CASE("special_equilibrium closed form") {
    auto u = special_equilibrium(7.0);
    CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(u[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(u[2] == doctest::Approx(1.0).epsilon(1e-14));
    u = special_equilibrium(74.0);
    CHECK(std::abs(u[0] - 16.0) <= 1e-10);
    CHECK(std::abs(u[1] - 4.0) <= 1e-10);
    CHECK(std::abs(u[2] - 2.0) <= 1e-10);

    const double tiny = 1e-6;
    u = special_equilibrium(tiny);
    CHECK(std::abs(u[2] - tiny) <= 1e-3 * tiny);
    CHECK(u[2] == doctest::Approx(bisect_root(tiny)).epsilon(1e-12));
    double prev = 0.0;
    for (double m : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3}) {
        const auto v = special_equilibrium(m);
        CHECK(v[2] > prev);
        prev = v[2];
        CHECK(v[2] == doctest::Approx(bisect_root(m)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(special_equilibrium(0.0), ValidationError);
    CHECK_THROWS_AS(special_equilibrium(-1.0), ValidationError);
}

TEST_CASE("conservation of the closed-form equilibrium") {
    const auto net = parse_network(fixtures::special);
    for (double m : {0.5, 7.0, 74.0, 1234.5}) {
        const auto u = special_equilibrium(m);
        const Grid grid(1, 8);
        const auto totals = conserved_totals(net, State::uniform(u, grid.num_cells()), grid);
        CHECK(std::abs(totals[0] - m) <= 1e-12 * m);
    }
}

TEST_CASE("find_cbe on the special system") {
    const auto net = parse_network(fixtures::special);
    for (double m : {0.5, 7.0, 74.0}) {
        const std::vector<double> totals{m};
        const auto res = find_cbe(net, totals);
        REQUIRE(res.converged);
        const auto exact = special_equilibrium(m);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(res.u_inf[i] - exact[i]) <= 1e-8);
        CHECK(res.cb_residual <= 1e-10);
        CHECK(res.cons_residual <= 1e-10);
    }
}

TEST_CASE("find_cbe on the 2x2 exchange and figure networks") {
    const auto two = parse_network(fixtures::two_by_two);
    auto res = find_cbe(two, std::vector<double>{2.0});
    REQUIRE(res.converged);
    CHECK(res.u_inf[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.u_inf[1] == doctest::Approx(1.0).epsilon(1e-12));

    const auto fig1a = parse_network(fixtures::fig1a);
    res = find_cbe(fig1a, std::vector<double>{});
    REQUIRE(res.converged);
    for (double v : res.u_inf) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));

    const auto fig1b = parse_network(fixtures::fig1b);
    const std::vector<double> target{6.0, 2.0, 6.0, 3.0};
    const auto totals = homogeneous_totals(fig1b, target);
    res = find_cbe(fig1b, totals);
    REQUIRE(res.converged);
    for (const auto& r : complex_balance_residual(fig1b, res.u_inf)) CHECK(std::abs(r.value) <= 1e-10);
    CHECK(*std::min_element(res.u_inf.begin(), res.u_inf.end()) > 0.0);
}

TEST_CASE("find_cbe is invariant under per-component rate rescaling") {
    const auto base = parse_network(
        "S1 -> S2 + S3 @ 1 a1\nS2 + S3 -> 2 S2 @ 2 a1\n2 S2 -> S1 @ 0.5 a1\n"
        "2 S1 -> 2 S3 @ 1 a2\n2 S3 -> 2 S1 @ 3 a2\n");
    const auto scaled = parse_network(
        "S1 -> S2 + S3 @ 7 a1\nS2 + S3 -> 2 S2 @ 14 a1\n2 S2 -> S1 @ 3.5 a1\n"
        "2 S1 -> 2 S3 @ 1 a2\n2 S3 -> 2 S1 @ 3 a2\n");
    const auto a = find_cbe(base, std::vector<double>{});
    const auto b = find_cbe(scaled, std::vector<double>{});
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    // Cycle balance gives u1 = 3/8, u2 = sqrt(3)/2, u3 = u1/sqrt(3).
    CHECK(a.u_inf[0] == doctest::Approx(0.375).epsilon(1e-10));
    CHECK(a.u_inf[1] == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-10));
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(a.u_inf[i] - b.u_inf[i]) <= 1e-9);

    const auto s1 = parse_network("S1 <=> 2 S2 @ 1 k1\nS2 <=> 2 S3 @ 1 k2\n");
    const auto s2 = parse_network("S1 <=> 2 S2 @ 5 k1\nS2 <=> 2 S3 @ 0.25 k2\n");
    const auto r1 = find_cbe(s1, std::vector<double>{10.0});
    const auto r2 = find_cbe(s2, std::vector<double>{10.0});
    REQUIRE(r1.converged);
    REQUIRE(r2.converged);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r1.u_inf[i] - r2.u_inf[i]) <= 1e-9);
}

TEST_CASE("find_cbe reports non-convergence for a network without a positive CBE") {
    // A -> B -> C has no positive equilibrium with C reachable but never consumed.
    const auto chain = parse_network("A -> B @ 1 p\nB -> C @ 1 p\n");
    CbeOptions opts;
    opts.max_iter = 30;
    const auto res = find_cbe(chain, std::vector<double>{3.0}, opts);
    CHECK_FALSE(res.converged);
    CHECK(res.diagnostic.find("lacks an inflow") != std::string::npos);
    CHECK(*std::min_element(res.u_inf.begin(), res.u_inf.end()) > 0.0);
}

TEST_CASE("find_cbe from a distant initial guess") {
    const auto net = parse_network(fixtures::special);
    CbeOptions opts;
    opts.init = std::vector<double>{1e-3, 50.0, 2.0};
    const auto res = find_cbe(net, std::vector<double>{74.0}, opts);
    REQUIRE(res.converged);
    CHECK(std::abs(res.u_inf[0] - 16.0) <= 1e-8);
    CHECK(std::abs(res.u_inf[2] - 2.0) <= 1e-8);
}

TEST_CASE("find_cbe argument validation") {
    const auto net = parse_network(fixtures::special);
    CHECK_THROWS_AS(find_cbe(net, std::vector<double>{1.0, 2.0}), ValidationError);
    CbeOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(find_cbe(net, std::vector<double>{7.0}, bad), ValidationError);
}
