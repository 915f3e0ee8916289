#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "crnrd/network.hpp"
#include "crnrd/spatial.hpp"
#include "crnrd/state.hpp"

namespace crnrd {

/// w log(w/z) - w + z with 0 log 0 = 0. Requires w >= 0 and z > 0.
double psi(double w, double z);

/// Same as psi but total on [0,inf)^2: psi(0,0) = 0 and psi(w>0, 0) = +inf.
double psi_extended(double w, double z) noexcept;

/// sum_i int psi(u_i, u_inf_i) dx.
double relative_entropy(const State& state, std::span<const double> u_inf, const Grid& grid);

struct Dissipation {
    double total = 0.0;
    double fisher = 0.0;
    double reaction = 0.0;
};

/// Fisher part 4 sum_faces d_f (sqrt(u_b) - sqrt(u_a))^2 / h^2 * |cell| plus the
/// reaction part sum_r int k_r u_inf^{y_r} psi(u^{y_r}/u_inf^{y_r}; u^{y'_r}/u_inf^{y'_r}).
Dissipation entropy_dissipation(const State& state, const ReactionNetwork& net,
                                const FieldSet& fields, std::span<const double> u_inf,
                                const Grid& grid);

/// Same with precomputed k_r(x) (reaction-major) and face coefficients per species.
Dissipation entropy_dissipation(const State& state, const ReactionNetwork& net,
                                std::span<const double> k_cells,
                                const std::vector<std::vector<double>>& face_coeffs,
                                std::span<const double> u_inf, const Grid& grid);

/// (-sum_i R_i log(u_i/u_inf_i), sum_r k_r u_inf^{y_r} psi(...)).
std::pair<double, double> reaction_entropy_production_identity(const ReactionNetwork& net,
                                                               std::span<const double> u,
                                                               std::span<const double> u_inf,
                                                               std::span<const double> k);

/// E(u|u_inf) / sum_i ||u_i - u_inf_i||_1^2, +inf when the denominator vanishes.
double ckp_ratio(const State& state, std::span<const double> u_inf, const Grid& grid);

/// int 4/(p+1) u1^{p+1} + 2/(2p+1) u2^{2p+1} + 1/(4p+1) u3^{4p+1} dx.
double h_p(const State& state, int p, const Grid& grid);

/// Fisher + kappa int_{omega1} (u2 - sqrt u1)^2 + kappa int_{omega2} (u3 - sqrt u2)^2
/// for the three-species special system.
double special_dissipation_bound(const State& state, const FieldSet& fields, const Grid& grid,
                                 const SubdomainMask& omega1, const SubdomainMask& omega2,
                                 double kappa);

struct DecayFit {
    double lambda = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double lambda_stderr = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t points = 0;
};

struct FitWindow {
    double lo = 0.2;
    double hi = 0.8;
};

/// Least squares of log E against t on the window (fractions of the time span);
/// rows with E < 1e-13 are ignored. Throws when fewer than 4 rows remain.
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> entropies,
                        FitWindow window = {});

}  // namespace crnrd
