#include "crnrd/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

namespace crnrd {

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("sim: dt must be > 0");
    if (!(t_end >= dt)) throw ValidationError("sim: t_end must be >= dt");
    if (record_every == 0) throw ValidationError("sim: record_every must be >= 1");
    if (!(positivity_floor >= 0.0)) throw ValidationError("sim: positivity_floor must be >= 0");
    if (!(saturation_eps >= 0.0)) throw ValidationError("sim: saturation_eps must be >= 0");
    for (int p : hp_orders) {
        if (p < 1) throw ValidationError("sim: H_p orders must be positive integers");
    }
}

// ---------------------------------------------------------------------------
// Implicit diffusion operators

namespace {

// (I - dt A) for a 1D Neumann stencil, factored once.
struct Tridiagonal {
    std::vector<double> lower;  // lower[i] couples i with i-1
    std::vector<double> upper_mod;
    std::vector<double> inv_denom;

    Tridiagonal(const std::vector<double>& face_d, std::size_t n, double dt_over_h2) {
        std::vector<double> diag(n, 1.0);
        std::vector<double> upper(n, 0.0);
        lower.assign(n, 0.0);
        for (std::size_t f = 0; f + 1 < n; ++f) {
            const double w = dt_over_h2 * face_d[f];
            diag[f] += w;
            diag[f + 1] += w;
            upper[f] = -w;
            lower[f + 1] = -w;
        }
        upper_mod.assign(n, 0.0);
        inv_denom.assign(n, 0.0);
        inv_denom[0] = 1.0 / diag[0];
        upper_mod[0] = upper[0] * inv_denom[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double denom = diag[i] - lower[i] * upper_mod[i - 1];
            inv_denom[i] = 1.0 / denom;
            upper_mod[i] = upper[i] * inv_denom[i];
        }
    }

    void solve(std::span<double> x) const {
        const std::size_t n = x.size();
        x[0] *= inv_denom[0];
        for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - lower[i] * x[i - 1]) * inv_denom[i];
        for (std::size_t i = n - 1; i-- > 0;) x[i] -= upper_mod[i] * x[i + 1];
    }
};

using SparseMatrix = Eigen::SparseMatrix<double>;
using CgSolver =
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>;

}  // namespace

struct Stepper::Implicit {
    std::vector<std::unique_ptr<Tridiagonal>> tridiagonal;  // 1D, per species
    std::vector<std::unique_ptr<SparseMatrix>> matrices;    // 2D, per species
    std::vector<std::unique_ptr<CgSolver>> solvers;
    std::vector<bool> active;
};

Stepper::Stepper(const ReactionNetwork& net, const FieldSet& fields, const Grid& grid,
                 const SimConfig& cfg)
    : net_(net), grid_(grid), cfg_(cfg) {
    cfg_.validate();
    validate_fields(net, fields, grid);
    k_cells_ = reaction_rate_fields(net, fields, grid.num_cells());
    for (const auto& d : fields.diffusion) face_coeffs_.push_back(crnrd::face_coefficients(grid, d));

    for (const auto& rx : net.reactions()) {
        ReactionKernel kernel;
        kernel.reactant = net.complexes()[rx.reactant].terms();
        std::vector<double> change(net.num_species(), 0.0);
        for (const auto& [s, c] : net.complexes()[rx.product].terms()) change[s] += c;
        for (const auto& [s, c] : net.complexes()[rx.reactant].terms()) change[s] -= c;
        for (std::size_t s = 0; s < change.size(); ++s) {
            if (change[s] != 0.0) kernel.change.emplace_back(s, change[s]);
        }
        kernels_.push_back(std::move(kernel));
    }

    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    implicit_ = std::make_unique<Implicit>();
    const std::size_t m = net.num_species();
    implicit_->active.assign(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        implicit_->active[i] =
            std::any_of(face_coeffs_[i].begin(), face_coeffs_[i].end(), [](double v) { return v > 0.0; });
    }

    if (cfg_.scheme == Scheme::explicit_euler) {
        double dmax = 0.0;
        for (const auto& fc : face_coeffs_) {
            for (double v : fc) dmax = std::max(dmax, v);
        }
        if (cfg_.dt * dmax * inv_h2 * 2.0 * grid.dim() > 1.0) {
            throw StepError(StepError::Kind::unstable_explicit,
                            "explicit diffusion is unstable at this dt (need dt <= h^2 / (2 dim max d))");
        }
        return;
    }

    const double dt_over_h2 = cfg_.dt * inv_h2;
    const std::size_t n = grid.num_cells();
    for (std::size_t i = 0; i < m; ++i) {
        if (grid.dim() == 1) {
            implicit_->tridiagonal.push_back(std::make_unique<Tridiagonal>(face_coeffs_[i], n, dt_over_h2));
            continue;
        }
        std::vector<Eigen::Triplet<double>> trip;
        std::vector<double> diag(n, 1.0);
        const auto& faces = grid.faces();
        for (std::size_t f = 0; f < faces.size(); ++f) {
            const double w = dt_over_h2 * face_coeffs_[i][f];
            if (w == 0.0) continue;
            const auto a = static_cast<Eigen::Index>(faces[f][0]);
            const auto b = static_cast<Eigen::Index>(faces[f][1]);
            diag[faces[f][0]] += w;
            diag[faces[f][1]] += w;
            trip.emplace_back(a, b, -w);
            trip.emplace_back(b, a, -w);
        }
        for (std::size_t c = 0; c < n; ++c) {
            trip.emplace_back(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c), diag[c]);
        }
        auto mat = std::make_unique<SparseMatrix>(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        mat->setFromTriplets(trip.begin(), trip.end());
        auto solver = std::make_unique<CgSolver>();
        solver->setTolerance(1e-12);
        solver->setMaxIterations(static_cast<Eigen::Index>(10 * n));
        solver->compute(*mat);
        if (solver->info() != Eigen::Success) {
            throw StepError(StepError::Kind::solver_breakdown, "preconditioner setup failed");
        }
        implicit_->matrices.push_back(std::move(mat));
        implicit_->solvers.push_back(std::move(solver));
    }
}

Stepper::~Stepper() = default;

void Stepper::react(State& state) {
    const std::size_t m = net_.num_species();
    const std::size_t n = grid_.num_cells();
    const std::size_t nr = kernels_.size();
    if (nr == 0) return;
    std::vector<double> u(m);
    std::vector<double> rates(m);
    double scale = 1.0;
    for (double v : state.values()) scale = std::max(scale, std::abs(v));
    const double reject_below = -1e-12 * scale;
    const double dt = cfg_.dt;

    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < m; ++i) {
            u[i] = state.at(i, c);
            rates[i] = 0.0;
        }
        for (std::size_t r = 0; r < nr; ++r) {
            const double k = k_cells_[r * n + c];
            if (k == 0.0) continue;
            double flux = k;
            for (const auto& [s, coeff] : kernels_[r].reactant) {
                const double base = u[s];
                flux *= coeff == 1.0 ? base : coeff == 2.0 ? base * base : std::pow(base, coeff);
            }
            for (const auto& [s, delta] : kernels_[r].change) rates[s] += delta * flux;
        }
        double factor = dt;
        if (cfg_.saturation_eps > 0.0) {
            double sum_abs = 0.0;
            for (double v : rates) sum_abs += std::abs(v);
            factor = dt / (1.0 + cfg_.saturation_eps * sum_abs);
        }
        for (std::size_t i = 0; i < m; ++i) {
            const double next = u[i] + factor * rates[i];
            if (next < reject_below) {
                throw StepError(StepError::Kind::negative_update,
                                "reaction update drives species " + net_.species()[i] + " in cell " +
                                    std::to_string(c) + " negative; reduce dt");
            }
            state.at(i, c) = next;
        }
    }
}

double Stepper::clamp(State& state) const {
    double lifted = 0.0;
    const double floor = cfg_.positivity_floor;
    for (double& v : state.values()) {
        if (v < floor) {
            lifted += floor - v;
            v = floor;
        }
    }
    return lifted * grid_.cell_measure();
}

double Stepper::advance(State& state) {
    react(state);
    double lifted = clamp(state);

    const std::size_t m = net_.num_species();
    const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
    const auto& faces = grid_.faces();
    for (std::size_t i = 0; i < m; ++i) {
        if (!implicit_->active[i]) continue;
        auto u = state.species(i);
        if (cfg_.scheme == Scheme::explicit_euler) {
            std::vector<double> delta(u.size(), 0.0);
            for (std::size_t f = 0; f < faces.size(); ++f) {
                const auto [a, b] = faces[f];
                const double flux = face_coeffs_[i][f] * (u[b] - u[a]) * inv_h2;
                delta[a] += flux;
                delta[b] -= flux;
            }
            for (std::size_t c = 0; c < u.size(); ++c) u[c] += cfg_.dt * delta[c];
        } else if (grid_.dim() == 1) {
            implicit_->tridiagonal[i]->solve(u);
        } else {
            Eigen::Map<Eigen::VectorXd> x(u.data(), static_cast<Eigen::Index>(u.size()));
            const Eigen::VectorXd rhs = x;
            Eigen::VectorXd sol = implicit_->solvers[i]->solveWithGuess(rhs, rhs);
            if (implicit_->solvers[i]->info() != Eigen::Success) {
                throw StepError(StepError::Kind::solver_breakdown,
                                "diffusion solve for species " + net_.species()[i] +
                                    " did not reach relative residual 1e-12");
            }
            x = sol;
        }
    }
    lifted += clamp(state);
    state.time += cfg_.dt;
    if (!state.all_finite()) {
        throw StepError(StepError::Kind::solver_breakdown, "non-finite concentration after step");
    }
    return lifted;
}

State step(const State& state, const ReactionNetwork& net, const FieldSet& fields, const Grid& grid,
           const SimConfig& cfg) {
    if (state.num_species() != net.num_species() || state.num_cells() != grid.num_cells()) {
        throw ValidationError("step: state does not match network or grid");
    }
    if (state.min_value() < 0.0) throw ValidationError("step: state must be nonnegative");
    Stepper stepper(net, fields, grid, cfg);
    State next = state;
    stepper.advance(next);
    return next;
}

double stationarity_rate(const State& state, const ReactionNetwork& net, const FieldSet& fields,
                         const Grid& grid, const SimConfig& cfg) {
    const State next = step(state, net, fields, grid, cfg);
    double diff = 0.0;
    for (std::size_t k = 0; k < next.values().size(); ++k) {
        diff = std::max(diff, std::abs(next.values()[k] - state.values()[k]));
    }
    return diff / cfg.dt;
}

// ---------------------------------------------------------------------------
// Trajectories

namespace {

TrajectoryRow summarize(const State& state, const ReactionNetwork& net, const Stepper& stepper,
                        const Grid& grid, std::span<const double> u_inf,
                        const std::vector<int>& hp_orders, double clamped) {
    TrajectoryRow row;
    row.t = state.time;
    row.entropy = relative_entropy(state, u_inf, grid);
    row.dissipation =
        entropy_dissipation(state, net, stepper.rate_fields(), stepper.face_coefficients(), u_inf, grid);
    row.totals = conserved_totals(net, state, grid);
    for (std::size_t i = 0; i < state.num_species(); ++i) {
        double l1 = 0.0;
        for (double v : state.species(i)) l1 += std::abs(v - u_inf[i]);
        row.l1_dist.push_back(l1 * grid.cell_measure());
    }
    row.min_u = state.min_value();
    row.clamped_mass = clamped;
    for (int p : hp_orders) row.hp.push_back(h_p(state, p, grid));
    return row;
}

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Trajectory simulate(const State& u0, const ReactionNetwork& net, const FieldSet& fields,
                    const Grid& grid, const SimConfig& cfg, std::span<const double> u_inf) {
    cfg.validate();
    if (u0.num_species() != net.num_species() || u0.num_cells() != grid.num_cells()) {
        throw ValidationError("simulate: initial state does not match network or grid");
    }
    if (!u0.all_finite() || u0.min_value() < 0.0) {
        throw ValidationError("simulate: initial state must be finite and nonnegative");
    }
    if (u_inf.size() != net.num_species()) throw ValidationError("simulate: u_inf has the wrong size");
    if (!cfg.hp_orders.empty() && net.num_species() != 3) {
        throw ValidationError("simulate: H_p columns need a three-species network");
    }

    Stepper stepper(net, fields, grid, cfg);
    Trajectory traj;
    traj.species = net.species();
    traj.num_totals = net.num_conservation_laws();
    traj.hp_orders = cfg.hp_orders;

    State state = u0;
    double clamped = 0.0;
    traj.rows.push_back(summarize(state, net, stepper, grid, u_inf, cfg.hp_orders, clamped));
    if (cfg.snapshot_every > 0) traj.snapshots.push_back(state);

    const auto total_steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
    const double t0 = u0.time;
    for (std::size_t s = 1; s <= total_steps; ++s) {
        clamped += stepper.advance(state);
        state.time = t0 + static_cast<double>(s) * cfg.dt;
        if (s % cfg.record_every != 0 && s != total_steps) continue;

        traj.rows.push_back(summarize(state, net, stepper, grid, u_inf, cfg.hp_orders, clamped));
        if (cfg.snapshot_every > 0 && (traj.rows.size() - 1) % cfg.snapshot_every == 0) {
            traj.snapshots.push_back(state);
        }
        const auto& prev = traj.rows[traj.rows.size() - 2];
        if (cfg.check_entropy && traj.rows.back().entropy > prev.entropy + 1e-6) {
            traj.entropy_violation = true;
            traj.termination = "entropy increased from " + num17(prev.entropy) + " to " +
                               num17(traj.rows.back().entropy) + " at t = " + num17(state.time);
            break;
        }
    }

    const auto& first = traj.rows.front().totals;
    for (const auto& row : traj.rows) {
        for (std::size_t j = 0; j < first.size(); ++j) {
            traj.max_conservation_drift = std::max(
                traj.max_conservation_drift, std::abs(row.totals[j] - first[j]) / (1.0 + std::abs(first[j])));
        }
    }
    traj.final_state = std::move(state);
    return traj;
}

std::vector<Trajectory> epsilon_regularized_run(const State& u0, const ReactionNetwork& net,
                                                const FieldSet& fields, const Grid& grid,
                                                const SimConfig& cfg, std::span<const double> u_inf,
                                                std::size_t regularized_species,
                                                const std::vector<double>& eps_list) {
    if (regularized_species >= net.num_species()) throw ValidationError("epsilon run: unknown species");
    if (eps_list.empty()) throw ValidationError("epsilon run: empty eps list");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw ValidationError("epsilon run: eps must be > 0");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
            throw ValidationError("epsilon run: eps list must be decreasing");
        }
    }
    std::vector<Trajectory> out;
    for (double eps : eps_list) {
        FieldSet shifted = fields;
        shifted.diffusion[regularized_species] = diffusion_shifted(fields.diffusion[regularized_species], eps);
        out.push_back(simulate(u0, net, shifted, grid, cfg, u_inf));
    }
    return out;
}

std::vector<double> Trajectory::times() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.t);
    return out;
}

std::vector<double> Trajectory::entropies() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.entropy);
    return out;
}

std::string Trajectory::to_csv() const {
    std::string out = "t,E,D";
    for (std::size_t j = 0; j < num_totals; ++j) out += ",total_" + std::to_string(j + 1);
    for (std::size_t i = 0; i < species.size(); ++i) out += ",l1_dist_" + std::to_string(i + 1);
    out += ",min_u,clamped_mass";
    for (int p : hp_orders) out += ",Hp_" + std::to_string(p);
    out += "\n";
    for (const auto& row : rows) {
        out += num17(row.t) + "," + num17(row.entropy) + "," + num17(row.dissipation.total);
        for (double v : row.totals) out += "," + num17(v);
        for (double v : row.l1_dist) out += "," + num17(v);
        out += "," + num17(row.min_u) + "," + num17(row.clamped_mass);
        for (double v : row.hp) out += "," + num17(v);
        out += "\n";
    }
    return out;
}

std::string snapshot_csv(const State& state, const Grid& grid) {
    std::string out = grid.dim() == 1 ? "cell,x" : "cell,x,y";
    for (std::size_t i = 0; i < state.num_species(); ++i) out += ",u_" + std::to_string(i + 1);
    out += "\n";
    for (std::size_t c = 0; c < state.num_cells(); ++c) {
        const auto x = grid.center(c);
        out += std::to_string(c) + "," + num17(x[0]);
        if (grid.dim() == 2) out += "," + num17(x[1]);
        for (std::size_t i = 0; i < state.num_species(); ++i) out += "," + num17(state.at(i, c));
        out += "\n";
    }
    return out;
}

}  // namespace crnrd
