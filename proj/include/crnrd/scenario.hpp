#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crnrd/entropy.hpp"
#include "crnrd/equilibrium.hpp"
#include "crnrd/network.hpp"
#include "crnrd/probes.hpp"
#include "crnrd/simulation.hpp"
#include "crnrd/spatial.hpp"
#include "crnrd/state.hpp"

namespace crnrd {

/// Scenario file error with the offending line (0 when not tied to a line).
class ScenarioError : public ValidationError {
public:
    ScenarioError(const std::string& what, std::size_t line)
        : ValidationError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An equilibrium needed by the scenario could not be computed.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class InitKind { uniform, cosine, step, random };
enum class EquilibriumMethod { automatic, special };

struct InitSpec {
    InitKind kind = InitKind::uniform;
    std::vector<double> values;  // base values; empty means u_inf
    std::vector<double> right;   // step: values right of step_at
    double step_at = 0.5;
    double amplitude = 0.5;
    std::uint64_t seed = 1;
};

struct SweepSpec {
    std::vector<double> fractions;
    std::vector<std::uint64_t> seeds;
    SweepMode mode = SweepMode::both;
    std::string profile1;
    std::string profile2;
    double kappa = 1.0;
    double outside = 0.0;
    double horizon_ref = 0.0;
};

struct ProbeSpec {
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    double roughness = 1.0;
};

struct EpsSpec {
    std::string species;
    std::vector<double> values;
};

/// A fully resolved and validated scenario.
struct Scenario {
    Scenario(ReactionNetwork network, Grid g) : net(std::move(network)), grid(g) {}

    std::string name;
    std::string hash;  // FNV-1a 64 of the scenario text and network text, hex
    ReactionNetwork net;
    Grid grid;
    std::map<std::string, SubdomainMask> masks;
    FieldSet fields;
    std::optional<std::vector<double>> totals;
    EquilibriumMethod method = EquilibriumMethod::automatic;
    InitSpec init;
    SimConfig sim;
    FitWindow window;
    SweepSpec sweep;
    ProbeSpec probe;
    EpsSpec eps;
    std::vector<std::string> warnings;
};

/// Parses `section.key = value` lines ('#' starts a comment). Relative
/// network.file paths resolve against base_dir.
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& data);

/// CBE for the given totals using the scenario's method.
EquilibriumResult scenario_equilibrium(const Scenario& sc, const std::vector<double>& totals);

/// Initial data; `u_inf` supplies the base values when init.values is empty.
State initial_state(const Scenario& sc, const std::vector<double>& u_inf);

struct ResolvedRun {
    State u0;
    EquilibriumResult equilibrium;  // for the totals of u0
};

/// Builds u0 and the CBE matching its conserved totals. When equilibrium.totals
/// is set and init.values is not, the base state is the CBE for those totals.
ResolvedRun resolve_run(const Scenario& sc);

/// Sweep setup for the scenario; fields for the swept profiles are replaced per member.
SweepSetup sweep_setup(const Scenario& sc, const ResolvedRun& run);

}  // namespace crnrd
