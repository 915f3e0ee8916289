#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crnrd/network.hpp"

namespace crnrd {

struct EquilibriumResult {
    std::vector<double> u_inf;
    double cb_residual = 0.0;    // max |complex balance residual|
    double cons_residual = 0.0;  // max |q_j . u - total_j|
    std::size_t iterations = 0;
    bool converged = false;
    double condition_estimate = 1.0;  // of the last Gauss-Newton Jacobian
    std::string diagnostic;           // empty on clean convergence
};

struct ComplexResidual {
    std::size_t component = 0;
    std::size_t complex = 0;
    double value = 0.0;  // inflow minus outflow at this complex
};

/// Per-complex balance, one entry per complex ordered by component then
/// complex index. value = sum_{y'_k = y} beta_k u^{y_k} - u^y sum_{y_j = y} beta_j.
std::vector<ComplexResidual> complex_balance_residual(const ReactionNetwork& net,
                                                      std::span<const double> u);

struct CbeOptions {
    double tol = 1e-10;
    std::size_t max_iter = 200;
    std::optional<std::vector<double>> init;
};

/// Strictly positive complex balanced equilibrium with q_j . u = totals_j.
/// Damped Gauss-Newton in log-concentration coordinates on the stacked
/// residual; falls back to a 10-step continuation in the totals when the
/// direct solve stalls.
EquilibriumResult find_cbe(const ReactionNetwork& net, std::span<const double> totals,
                           const CbeOptions& options = {});

/// (z^4, z^2, z) with 4z^4 + 2z^2 + z = M.
std::vector<double> special_equilibrium(double mass);

/// Totals q_j . u for a spatially homogeneous state.
std::vector<double> homogeneous_totals(const ReactionNetwork& net, std::span<const double> u);

}  // namespace crnrd
