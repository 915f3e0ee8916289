#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crnrd/entropy.hpp"
#include "crnrd/network.hpp"
#include "crnrd/spatial.hpp"
#include "crnrd/state.hpp"

namespace crnrd {

/// A step could not be taken: negative reaction update or linear-solver breakdown.
class StepError : public std::runtime_error {
public:
    enum class Kind { negative_update, solver_breakdown, unstable_explicit };
    StepError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

enum class Scheme { imex_be, explicit_euler };

struct SimConfig {
    double dt = 1e-4;
    double t_end = 1.0;
    std::size_t record_every = 100;
    Scheme scheme = Scheme::imex_be;
    double positivity_floor = 0.0;
    double saturation_eps = 0.0;
    bool check_entropy = true;
    std::vector<int> hp_orders;        // H_p columns, three-species networks only
    std::size_t snapshot_every = 0;    // in records; 0 disables snapshots

    void validate() const;
};

struct TrajectoryRow {
    double t = 0.0;
    double entropy = 0.0;
    Dissipation dissipation;
    std::vector<double> totals;
    std::vector<double> l1_dist;
    double min_u = 0.0;
    double clamped_mass = 0.0;
    std::vector<double> hp;
};

struct Trajectory {
    std::vector<std::string> species;
    std::size_t num_totals = 0;
    std::vector<int> hp_orders;
    std::vector<TrajectoryRow> rows;
    std::vector<State> snapshots;
    State final_state;
    bool entropy_violation = false;
    std::string termination;  // empty when the horizon was reached
    double max_conservation_drift = 0.0;

    std::vector<double> times() const;
    std::vector<double> entropies() const;
    /// Trajectory CSV with 17 significant digits.
    std::string to_csv() const;
};

/// Owns the discretized operators for one (network, fields, grid, config) and
/// advances states by one IMEX step: explicit mass-action reaction per cell,
/// then backward-Euler diffusion per species.
class Stepper {
public:
    Stepper(const ReactionNetwork& net, const FieldSet& fields, const Grid& grid, const SimConfig& cfg);
    ~Stepper();
    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    /// Advances in place; returns the mass lifted to the positivity floor.
    double advance(State& state);

    std::span<const double> rate_fields() const noexcept { return k_cells_; }
    const std::vector<std::vector<double>>& face_coefficients() const noexcept { return face_coeffs_; }

private:
    void react(State& state);
    double clamp(State& state) const;

    const ReactionNetwork& net_;
    const Grid& grid_;
    SimConfig cfg_;
    std::vector<double> k_cells_;
    std::vector<std::vector<double>> face_coeffs_;

    struct ReactionKernel {
        std::vector<std::pair<std::size_t, double>> reactant;
        std::vector<std::pair<std::size_t, double>> change;
    };
    std::vector<ReactionKernel> kernels_;

    struct Implicit;
    std::unique_ptr<Implicit> implicit_;
};

/// One step of the configured scheme.
State step(const State& state, const ReactionNetwork& net, const FieldSet& fields, const Grid& grid,
           const SimConfig& cfg);

/// Repeated steps up to t_end with a summary row every record_every steps
/// (and at t = 0). Stops early when the entropy rises by more than 1e-6
/// between records and cfg.check_entropy is set.
Trajectory simulate(const State& u0, const ReactionNetwork& net, const FieldSet& fields,
                    const Grid& grid, const SimConfig& cfg, std::span<const double> u_inf);

/// One simulate per eps with the diffusion of `regularized_species` shifted by eps.
std::vector<Trajectory> epsilon_regularized_run(const State& u0, const ReactionNetwork& net,
                                                const FieldSet& fields, const Grid& grid,
                                                const SimConfig& cfg, std::span<const double> u_inf,
                                                std::size_t regularized_species,
                                                const std::vector<double>& eps_list);

/// max |step(u) - u| / dt over all species and cells.
double stationarity_rate(const State& state, const ReactionNetwork& net, const FieldSet& fields,
                         const Grid& grid, const SimConfig& cfg);

/// `cell,x[,y],u_1..u_m` rows.
std::string snapshot_csv(const State& state, const Grid& grid);

}  // namespace crnrd
