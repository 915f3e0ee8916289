#include "crnrd/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crnrd {

double psi_extended(double w, double z) noexcept {
    if (w == 0.0) return z;
    if (z == 0.0) return std::numeric_limits<double>::infinity();
    const double delta = (w - z) / z;
    if (std::abs(delta) < 0.05) {
        // (1+d) log(1+d) - d = sum_{k>=2} (-d)^k / (k (k-1)); avoids cancellation near w = z.
        double sum = 0.0;
        double power = delta * delta;
        for (int k = 2; k < 40; ++k) {
            const double term = power / (static_cast<double>(k) * (k - 1));
            sum += (k % 2 == 0) ? term : -term;
            if (std::abs(term) < 1e-18 * sum) break;
            power *= delta;
        }
        return z * sum;
    }
    return w * std::log(w / z) - w + z;
}

double psi(double w, double z) {
    if (!(w >= 0.0) || !(z > 0.0)) throw ValidationError("psi: requires w >= 0 and z > 0");
    return psi_extended(w, z);
}

namespace {

void check_u_inf(std::span<const double> u_inf, std::size_t m) {
    if (u_inf.size() != m) throw ValidationError("u_inf has the wrong number of species");
    for (double v : u_inf) {
        if (!(v > 0.0)) throw ValidationError("u_inf must be strictly positive");
    }
}

}  // namespace

double relative_entropy(const State& state, std::span<const double> u_inf, const Grid& grid) {
    check_u_inf(u_inf, state.num_species());
    if (state.num_cells() != grid.num_cells()) throw ValidationError("state does not match grid");
    double total = 0.0;
    for (std::size_t i = 0; i < state.num_species(); ++i) {
        double sum = 0.0;
        for (double v : state.species(i)) {
            if (!(v >= 0.0)) throw ValidationError("relative_entropy: negative concentration");
            sum += psi_extended(v, u_inf[i]);
        }
        total += sum;
    }
    return total * grid.cell_measure();
}

Dissipation entropy_dissipation(const State& state, const ReactionNetwork& net,
                                std::span<const double> k_cells,
                                const std::vector<std::vector<double>>& face_coeffs,
                                std::span<const double> u_inf, const Grid& grid) {
    const std::size_t m = net.num_species();
    const std::size_t n = grid.num_cells();
    check_u_inf(u_inf, m);
    if (state.num_species() != m || state.num_cells() != n) {
        throw ValidationError("entropy_dissipation: state does not match network or grid");
    }
    Dissipation out;

    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    const auto& faces = grid.faces();
    for (std::size_t i = 0; i < m; ++i) {
        const auto u = state.species(i);
        const auto& d = face_coeffs[i];
        double sum = 0.0;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (d[f] == 0.0) continue;
            const double jump = std::sqrt(u[faces[f][1]]) - std::sqrt(u[faces[f][0]]);
            sum += d[f] * jump * jump;
        }
        out.fisher += 4.0 * sum * inv_h2 * grid.cell_measure();
    }

    std::vector<double> cell_u(m);
    const auto& reactions = net.reactions();
    const auto& complexes = net.complexes();
    std::vector<double> eq_reactant(reactions.size());
    std::vector<double> eq_product(reactions.size());
    for (std::size_t r = 0; r < reactions.size(); ++r) {
        eq_reactant[r] = complexes[reactions[r].reactant].monomial(u_inf);
        eq_product[r] = complexes[reactions[r].product].monomial(u_inf);
    }
    double reaction = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < m; ++i) cell_u[i] = state.at(i, c);
        for (std::size_t r = 0; r < reactions.size(); ++r) {
            const double k = k_cells[r * n + c];
            if (k == 0.0) continue;
            const double w = complexes[reactions[r].reactant].monomial(cell_u) / eq_reactant[r];
            const double z = complexes[reactions[r].product].monomial(cell_u) / eq_product[r];
            reaction += k * eq_reactant[r] * psi_extended(w, z);
        }
    }
    out.reaction = reaction * grid.cell_measure();
    out.total = out.fisher + out.reaction;
    return out;
}

Dissipation entropy_dissipation(const State& state, const ReactionNetwork& net,
                                const FieldSet& fields, std::span<const double> u_inf,
                                const Grid& grid) {
    validate_fields(net, fields, grid);
    const auto k = reaction_rate_fields(net, fields, grid.num_cells());
    std::vector<std::vector<double>> faces;
    for (const auto& d : fields.diffusion) faces.push_back(face_coefficients(grid, d));
    return entropy_dissipation(state, net, k, faces, u_inf, grid);
}

std::pair<double, double> reaction_entropy_production_identity(const ReactionNetwork& net,
                                                               std::span<const double> u,
                                                               std::span<const double> u_inf,
                                                               std::span<const double> k) {
    check_u_inf(u_inf, net.num_species());
    for (double v : u) {
        if (!(v > 0.0)) throw ValidationError("identity check requires strictly positive u");
    }
    const auto rates = mass_action_rates(net, k, u);
    double lhs = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) lhs -= rates[i] * std::log(u[i] / u_inf[i]);
    double rhs = 0.0;
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        const auto& rx = net.reactions()[r];
        const double eq_y = net.complexes()[rx.reactant].monomial(u_inf);
        const double eq_yp = net.complexes()[rx.product].monomial(u_inf);
        const double w = net.complexes()[rx.reactant].monomial(u) / eq_y;
        const double z = net.complexes()[rx.product].monomial(u) / eq_yp;
        rhs += k[r] * eq_y * psi_extended(w, z);
    }
    return {lhs, rhs};
}

double ckp_ratio(const State& state, std::span<const double> u_inf, const Grid& grid) {
    const double e = relative_entropy(state, u_inf, grid);
    double denom = 0.0;
    for (std::size_t i = 0; i < state.num_species(); ++i) {
        double l1 = 0.0;
        for (double v : state.species(i)) l1 += std::abs(v - u_inf[i]);
        l1 *= grid.cell_measure();
        denom += l1 * l1;
    }
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return e / denom;
}

double h_p(const State& state, int p, const Grid& grid) {
    if (state.num_species() != 3) throw ValidationError("h_p requires a three-species state");
    if (p < 1) throw ValidationError("h_p requires p >= 1");
    const auto pd = static_cast<double>(p);
    const double e1 = pd + 1.0;
    const double e2 = 2.0 * pd + 1.0;
    const double e3 = 4.0 * pd + 1.0;
    double sum = 0.0;
    for (std::size_t c = 0; c < state.num_cells(); ++c) {
        sum += 4.0 / e1 * std::pow(state.at(0, c), e1) + 2.0 / e2 * std::pow(state.at(1, c), e2) +
               1.0 / e3 * std::pow(state.at(2, c), e3);
    }
    return sum * grid.cell_measure();
}

double special_dissipation_bound(const State& state, const FieldSet& fields, const Grid& grid,
                                 const SubdomainMask& omega1, const SubdomainMask& omega2,
                                 double kappa) {
    if (state.num_species() != 3) throw ValidationError("special system has three species");
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    const auto& faces = grid.faces();
    double fisher = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto u = state.species(i);
        const auto d = face_coefficients(grid, fields.diffusion[i]);
        double sum = 0.0;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (d[f] == 0.0) continue;
            const double jump = std::sqrt(u[faces[f][1]]) - std::sqrt(u[faces[f][0]]);
            sum += d[f] * jump * jump;
        }
        fisher += 4.0 * sum * inv_h2 * grid.cell_measure();
    }
    double reaction = 0.0;
    for (std::size_t c = 0; c < grid.num_cells(); ++c) {
        if (omega1.contains(c)) {
            const double gap = state.at(1, c) - std::sqrt(state.at(0, c));
            reaction += gap * gap;
        }
        if (omega2.contains(c)) {
            const double gap = state.at(2, c) - std::sqrt(state.at(1, c));
            reaction += gap * gap;
        }
    }
    return fisher + kappa * reaction * grid.cell_measure();
}

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> entropies,
                        FitWindow window) {
    if (times.size() != entropies.size()) throw ValidationError("fit_decay_rate: size mismatch");
    if (times.empty()) throw ValidationError("fit_decay_rate: no data");
    if (!(window.lo >= 0.0 && window.lo < window.hi && window.hi <= 1.0)) {
        throw ValidationError("fit_decay_rate: window must satisfy 0 <= lo < hi <= 1");
    }
    const double t0 = times.front();
    const double span = times.back() - t0;
    DecayFit fit;
    fit.t_lo = t0 + window.lo * span;
    fit.t_hi = t0 + window.hi * span;

    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < fit.t_lo || times[i] > fit.t_hi) continue;
        if (!(entropies[i] >= 1e-13)) continue;
        xs.push_back(times[i]);
        ys.push_back(std::log(entropies[i]));
    }
    if (xs.size() < 4) throw ValidationError("fit_decay_rate: fewer than 4 usable points");
    fit.points = xs.size();

    const auto n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    fit.lambda = -slope;
    fit.intercept = my - slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double res = ys[i] - (fit.intercept + slope * xs[i]);
        sse += res * res;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    fit.lambda_stderr = std::sqrt(sse / (n - 2.0) / sxx);
    return fit;
}

}  // namespace crnrd
