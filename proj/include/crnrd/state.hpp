#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "crnrd/network.hpp"
#include "crnrd/spatial.hpp"

namespace crnrd {

/// Concentration of every species in every cell, species-major.
class State {
public:
    State() = default;
    State(std::size_t n_species, std::size_t n_cells, double fill = 0.0)
        : n_species_(n_species), n_cells_(n_cells), values_(n_species * n_cells, fill) {}

    /// Spatially homogeneous state.
    static State uniform(std::span<const double> u, std::size_t n_cells);

    std::size_t num_species() const noexcept { return n_species_; }
    std::size_t num_cells() const noexcept { return n_cells_; }

    std::span<double> species(std::size_t i) noexcept {
        return {values_.data() + i * n_cells_, n_cells_};
    }
    std::span<const double> species(std::size_t i) const noexcept {
        return {values_.data() + i * n_cells_, n_cells_};
    }
    double& at(std::size_t i, std::size_t cell) noexcept { return values_[i * n_cells_ + cell]; }
    double at(std::size_t i, std::size_t cell) const noexcept { return values_[i * n_cells_ + cell]; }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double min_value() const noexcept;
    bool all_finite() const noexcept;

    /// Cell average of each species (|Omega| = 1).
    std::vector<double> averages(const Grid& grid) const;

    double time = 0.0;

private:
    std::size_t n_species_ = 0;
    std::size_t n_cells_ = 0;
    std::vector<double> values_;
};

/// Reaction profiles by id and one diffusion field per species.
struct FieldSet {
    std::map<std::string, CoefficientField> profiles;
    std::vector<DiffusionField> diffusion;

    const CoefficientField& profile(const std::string& id) const;
};

/// Checks that every reaction profile and every species diffusion field is
/// present and sized for the grid.
void validate_fields(const ReactionNetwork& net, const FieldSet& fields, const Grid& grid);

/// k_r(x) = beta_r * alpha_{profile(r)}(x), reaction-major.
std::vector<double> reaction_rate_fields(const ReactionNetwork& net, const FieldSet& fields,
                                         std::size_t n_cells);

/// int_Omega q_j . u dx by cell quadrature.
std::vector<double> conserved_totals(const ReactionNetwork& net, const State& state, const Grid& grid);

/// Harmonic-mean face diffusivity; zero if either side vanishes.
inline double face_diffusivity(double a, double b) noexcept {
    return (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
}

/// One harmonic-mean coefficient per grid face, in grid.faces() order.
std::vector<double> face_coefficients(const Grid& grid, const DiffusionField& d);

/// Finite-volume div(d grad u) with zero-flux boundary faces.
std::vector<double> diffusion_apply(const Grid& grid, const DiffusionField& d,
                                    std::span<const double> u);

}  // namespace crnrd
