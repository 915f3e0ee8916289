#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string presets = CRNRD_PRESETS_DIR;

struct Result {
    int code = 0;
    std::string out;
    std::string err;
    json report() const { return json::parse(out); }
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "crnrd");
    std::ostringstream out;
    std::ostringstream err;
    Result r;
    r.code = crnrd::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("crnrd_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("analyze reports the figure 1(a) structure") {
    const auto r = run({"analyze", "--scenario", presets + "/fig1a.scenario"});
    REQUIRE(r.code == crnrd::cli::ok);
    const auto rep = r.report();
    CHECK(rep["command"] == "analyze");
    CHECK(rep["scenario_hash"].get<std::string>().size() == 16);
    const auto& res = rep["results"];
    CHECK(res["num_components"] == 2);
    CHECK(res["assumption_A"] == true);
    CHECK(res["conservation_basis"].empty());
}

TEST_CASE("analyze flags a chain that is not weakly reversible") {
    const auto dir = scratch("chain");
    write(dir, "chain.net", "S1 -> S2 @ 1 k\nS2 -> S3 @ 1 k\n");
    const auto sc = write(dir, "chain.scenario", "network.file = chain.net\nprofile.k.value = 1\n");
    const auto r = run({"analyze", "--scenario", sc.string()});
    REQUIRE(r.code == crnrd::cli::ok);
    const auto res = r.report()["results"];
    CHECK(res["assumption_A"] == false);
    CHECK_FALSE(res["assumption_A_violations"].empty());
}

TEST_CASE("equilibrium of the special network") {
    const auto r7 = run({"equilibrium", "--scenario", presets + "/special.scenario"});
    REQUIRE(r7.code == crnrd::cli::ok);
    const auto u7 = r7.report()["results"]["u_inf"];
    for (int i = 0; i < 3; ++i) CHECK(u7[i].get<double>() == doctest::Approx(1.0).epsilon(1e-12));

    const auto r74 = run({"equilibrium", "--scenario", presets + "/special.scenario", "--totals", "74"});
    REQUIRE(r74.code == crnrd::cli::ok);
    const auto u74 = r74.report()["results"]["u_inf"];
    CHECK(u74[0].get<double>() == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(u74[1].get<double>() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(u74[2].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("equilibrium of figure 1(b) converges with small residuals") {
    const auto r = run({"equilibrium", "--scenario", presets + "/fig1b.scenario"});
    REQUIRE(r.code == crnrd::cli::ok);
    const auto res = r.report()["results"];
    CHECK(res["converged"] == true);
    CHECK(res["positive"] == true);
    for (const auto& c : res["residuals"]) CHECK(std::abs(c["value"].get<double>()) < 1e-10);
}

TEST_CASE("equilibrium without a positive solution exits with the solver code") {
    const auto dir = scratch("nocbe");
    write(dir, "chain.net", "species: S1 S2\nS1 -> S2 @ 1 k\n");
    const auto sc = write(dir, "chain.scenario", "network.file = chain.net\nprofile.k.value = 1\n"
                                                 "equilibrium.totals = 1\n");
    const auto r = run({"equilibrium", "--scenario", sc.string()});
    CHECK(r.code == crnrd::cli::solver);
    const auto rep = r.report();
    CHECK(rep["results"]["converged"] == false);
}

TEST_CASE("malformed inputs exit with the validation code") {
    const auto dir = scratch("bad");
    write(dir, "bad.net", "S1 -> @ 1 k\n");
    const auto sc = write(dir, "bad.scenario", "network.file = bad.net\n");
    const auto r = run({"analyze", "--scenario", sc.string()});
    CHECK(r.code == crnrd::cli::validation);
    const auto err = r.report()["error"];
    CHECK(err["line"] == 1);

    const auto sc2 = write(dir, "unknown.scenario", "network.file = " + presets + "/networks/special.net\nsim.bogus = 1\n");
    const auto r2 = run({"analyze", "--scenario", sc2.string()});
    CHECK(r2.code == crnrd::cli::validation);
    CHECK(r2.report()["error"]["line"] == 2);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == crnrd::cli::usage);
    CHECK(run({"analyze"}).code == crnrd::cli::usage);
    CHECK(run({"analyze", "--scenario", "/nonexistent/file.scenario"}).code == crnrd::cli::usage);
    CHECK(run({"frobnicate"}).code == crnrd::cli::usage);
}

TEST_CASE("simulate writes a trajectory and a summary") {
    const auto dir = scratch("sim");
    const auto sc = write(dir, "short.scenario",
                          "network.file = " + presets + "/networks/special.net\n"
                          "grid.n = 40\nprofile.k1.value = 1\nprofile.k2.value = 1\n"
                          "equilibrium.totals = 7\ninit.kind = cosine\n"
                          "sim.dt = 1e-3\nsim.t_end = 0.5\nsim.record_every = 10\nsim.hp_orders = 1 2\n");
    const auto r = run({"simulate", "--scenario", sc.string(), "--out", (dir / "out").string(), "--quiet"});
    REQUIRE(r.code == crnrd::cli::ok);
    CHECK(r.out.empty());
    std::ifstream csv(dir / "out" / "trajectory.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("t,E,D,", 0) == 0);
    CHECK(header.find("Hp_2") != std::string::npos);
    std::ifstream summary(dir / "out" / "summary.json");
    const auto s = json::parse(summary);
    CHECK(s["trajectory"]["entropy_final"].get<double>() < s["trajectory"]["entropy_initial"].get<double>());
}

TEST_CASE("probe and sweep are deterministic") {
    const auto dir = scratch("det");
    const auto sc = write(dir, "small.scenario",
                          "network.file = " + presets + "/networks/special.net\n"
                          "grid.n = 40\nmask.w1.random = 0.3\nmask.w1.seed = 1\n"
                          "mask.w2.random = 0.3\nmask.w2.seed = 2\n"
                          "profile.k1.mask = w1\nprofile.k1.value = 1\n"
                          "profile.k2.mask = w2\nprofile.k2.value = 1\n"
                          "equilibrium.totals = 7\ninit.kind = cosine\n"
                          "sim.dt = 1e-3\nsim.t_end = 1\nsim.record_every = 5\n"
                          "sweep.fractions = 0.6 0.3\nsweep.seeds = 3\nsweep.profile1 = k1\nsweep.profile2 = k2\n"
                          "probe.n = 50\n");
    const auto a = run({"probe", "--scenario", sc.string(), "--seed", "5"});
    const auto b = run({"probe", "--scenario", sc.string(), "--seed", "5"});
    REQUIRE(a.code == crnrd::cli::ok);
    CHECK(a.report()["results"] == b.report()["results"]);
    CHECK(a.report()["results"]["min_ratio"].get<double>() > 0.0);

    const auto s1 = run({"sweep", "--scenario", sc.string()});
    const auto s2 = run({"sweep", "--scenario", sc.string()});
    REQUIRE(s1.code == crnrd::cli::ok);
    CHECK(s1.report()["results"] == s2.report()["results"]);
    CHECK(s1.report()["results"]["levels"].size() == 2);
}
