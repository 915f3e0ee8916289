#include "crnrd/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crnrd {

State State::uniform(std::span<const double> u, std::size_t n_cells) {
    State s(u.size(), n_cells);
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::fill(s.species(i).begin(), s.species(i).end(), u[i]);
    }
    return s;
}

double State::min_value() const noexcept {
    if (values_.empty()) return 0.0;
    return *std::min_element(values_.begin(), values_.end());
}

bool State::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> State::averages(const Grid& grid) const {
    std::vector<double> out(n_species_, 0.0);
    for (std::size_t i = 0; i < n_species_; ++i) {
        for (double v : species(i)) out[i] += v;
        out[i] *= grid.cell_measure();
    }
    return out;
}

const CoefficientField& FieldSet::profile(const std::string& id) const {
    const auto it = profiles.find(id);
    if (it == profiles.end()) throw ValidationError("no coefficient field for profile '" + id + "'");
    return it->second;
}

void validate_fields(const ReactionNetwork& net, const FieldSet& fields, const Grid& grid) {
    for (const auto& id : net.profile_ids()) {
        if (fields.profile(id).values().size() != grid.num_cells()) {
            throw ValidationError("profile '" + id + "' does not match the grid size");
        }
    }
    if (fields.diffusion.size() != net.num_species()) {
        throw ValidationError("expected one diffusion field per species");
    }
    for (std::size_t i = 0; i < fields.diffusion.size(); ++i) {
        const auto& d = fields.diffusion[i].values;
        if (d.size() != grid.num_cells()) {
            throw ValidationError("diffusion field of species " + net.species()[i] +
                                  " does not match the grid size");
        }
        for (double v : d) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ValidationError("diffusion values must be finite and >= 0");
            }
        }
    }
}

std::vector<double> reaction_rate_fields(const ReactionNetwork& net, const FieldSet& fields,
                                         std::size_t n_cells) {
    std::vector<double> k(net.num_reactions() * n_cells);
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        const auto& rx = net.reactions()[r];
        const auto& alpha = fields.profile(rx.profile_id).values();
        if (alpha.size() != n_cells) throw ValidationError("profile size does not match the grid");
        for (std::size_t c = 0; c < n_cells; ++c) k[r * n_cells + c] = rx.beta * alpha[c];
    }
    return k;
}

std::vector<double> conserved_totals(const ReactionNetwork& net, const State& state, const Grid& grid) {
    if (state.num_cells() != grid.num_cells() || state.num_species() != net.num_species()) {
        throw ValidationError("conserved_totals: state does not match grid or network");
    }
    const auto avg = state.averages(grid);
    std::vector<double> totals;
    totals.reserve(net.num_conservation_laws());
    for (const auto& q : net.conservation_basis()) {
        double t = 0.0;
        for (std::size_t i = 0; i < avg.size(); ++i) t += q[static_cast<Eigen::Index>(i)] * avg[i];
        totals.push_back(t);
    }
    return totals;
}

std::vector<double> face_coefficients(const Grid& grid, const DiffusionField& d) {
    std::vector<double> out;
    out.reserve(grid.faces().size());
    for (const auto& [a, b] : grid.faces()) out.push_back(face_diffusivity(d.values[a], d.values[b]));
    return out;
}

std::vector<double> diffusion_apply(const Grid& grid, const DiffusionField& d,
                                    std::span<const double> u) {
    if (d.values.size() != grid.num_cells() || u.size() != grid.num_cells()) {
        throw ValidationError("diffusion_apply: size mismatch");
    }
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    std::vector<double> out(u.size(), 0.0);
    const auto& faces = grid.faces();
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto [a, b] = faces[f];
        const double flux = face_diffusivity(d.values[a], d.values[b]) * (u[b] - u[a]) * inv_h2;
        out[a] += flux;
        out[b] -= flux;
    }
    return out;
}

}  // namespace crnrd
