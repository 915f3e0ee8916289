#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crnrd/entropy.hpp"
#include "crnrd/network.hpp"
#include "crnrd/simulation.hpp"
#include "crnrd/spatial.hpp"
#include "crnrd/state.hpp"

namespace crnrd {

/// Log-normal fields (log-std = roughness) rescaled per species so that the
/// conserved totals match to 1e-10 relative. The scale factors minimise
/// sum (log s_i)^2 among all solutions. Retries with fresh draws up to 10 times.
State sample_compatible_state(const ReactionNetwork& net, const Grid& grid,
                              std::span<const double> totals, std::uint64_t seed, double roughness);

struct SampleSummary {
    std::size_t index = 0;
    double entropy = 0.0;      // E(u | u_inf)
    double dissipation = 0.0;
    double fisher = 0.0;
    double reaction = 0.0;
    double entropy_level = 0.0;  // sum_i int u_i log u_i
    double min_u = 0.0;
};

struct ProbeReport {
    std::size_t n_samples = 0;
    std::size_t n_skipped = 0;  // samples with E = 0
    double min_ratio = 0.0;     // upper estimate of the true infimum of D/E
    double q05 = 0.0;
    double q50 = 0.0;
    SampleSummary argmin;
    std::uint64_t seed = 0;
    double roughness = 0.0;
};

/// D/E over n states drawn by sample_compatible_state with the totals of u_inf.
/// Sample k uses the seed sequence (seed, k), so reports are reproducible and
/// sample k does not depend on the fields.
ProbeReport eed_ratio_probe(const ReactionNetwork& net, const Grid& grid, const FieldSet& fields,
                            std::span<const double> u_inf, std::size_t n, std::uint64_t seed,
                            double roughness);

/// Thrown when a sweep member violates entropy monotonicity.
class SweepAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SweepMode { both, first_only, second_only };

struct SweepSetup {
    const ReactionNetwork* net = nullptr;
    const Grid* grid = nullptr;
    FieldSet base;                  // profiles not swept and all diffusion fields
    std::string profile1;           // reaction profile supported on omega1
    std::string profile2;           // reaction profile supported on omega2
    double kappa = 1.0;             // profile value on the mask
    double outside = 0.0;           // profile value off the mask
    State u0;
    std::vector<double> u_inf;
    SimConfig cfg;
    SweepMode mode = SweepMode::both;
    /// Horizon for fraction f is cfg.t_end * (horizon_ref / f) when > 0.
    double horizon_ref = 0.0;
    FitWindow window;
};

struct SweepRow {
    double fraction = 0.0;
    std::uint64_t seed = 0;
    double omega1_measure = 0.0;
    double omega2_measure = 0.0;
    double lambda = 0.0;
    double lambda_stderr = 0.0;
    double r_squared = 0.0;
};

struct SweepLevel {
    double fraction = 0.0;
    double lambda = 0.0;  // mean over seeds
    double stderr = 0.0;  // fit standard error of that mean
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepLevel> levels;  // fractions in decreasing order
    double a = 0.0;
    double b = 0.0;
    bool fit_valid = false;  // needs two distinct abscissae
    /// Every shrinking step lowers lambda by more than twice the larger fit
    /// standard error of the two levels.
    bool strictly_decreasing = false;
    /// Lambda is non-increasing as the fractions shrink, within 2 standard errors.
    bool monotone = false;

    std::string to_csv() const;
};

/// Masks for omega1/omega2 are drawn with mask_random(fraction, seed) and
/// mask_random(fraction, seed + 1); in one-at-a-time modes the other mask is
/// the full domain. Fractions must lie in (0,1].
SweepResult omega_sweep(const SweepSetup& setup, const std::vector<double>& fractions,
                        const std::vector<std::uint64_t>& seeds);

}  // namespace crnrd
