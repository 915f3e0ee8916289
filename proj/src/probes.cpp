#include "crnrd/probes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <Eigen/SVD>

#include "crnrd/equilibrium.hpp"

namespace crnrd {

namespace {

// Per-species scale exponents l with sum_i q_ji a_i exp(l_i) = T_j and minimal |l|.
bool match_totals(const ReactionNetwork& net, const std::vector<double>& avg,
                  std::span<const double> totals, Eigen::VectorXd& l) {
    const auto m = static_cast<Eigen::Index>(net.num_species());
    const auto k = static_cast<Eigen::Index>(net.num_conservation_laws());
    l = Eigen::VectorXd::Zero(m);
    if (k == 0) return true;

    Eigen::MatrixXd Q(k, m);
    for (Eigen::Index j = 0; j < k; ++j) Q.row(j) = net.conservation_basis()[static_cast<std::size_t>(j)].transpose();
    Eigen::VectorXd a(m);
    for (Eigen::Index i = 0; i < m; ++i) a[i] = avg[static_cast<std::size_t>(i)];
    Eigen::VectorXd target(k);
    Eigen::VectorXd scale(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        target[j] = totals[static_cast<std::size_t>(j)];
        scale[j] = std::max(std::abs(target[j]), std::numeric_limits<double>::min());
    }

    auto residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return ((Q * (a.array() * x.array().exp()).matrix()) - target).cwiseQuotient(scale);
    };

    // Start from a common level that fits the first law with a positive row.
    for (Eigen::Index j = 0; j < k; ++j) {
        const double w = Q.row(j).dot(a);
        if (w > 0.0 && target[j] > 0.0) {
            l.setConstant(std::log(target[j] / w));
            break;
        }
    }

    Eigen::VectorXd g = residual(l);
    for (int it = 0; it < 200; ++it) {
        Eigen::MatrixXd J =
            scale.cwiseInverse().asDiagonal() * Q * (a.array() * l.array().exp()).matrix().asDiagonal();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        // Linearised constraint J (l + d) = J l - g; take the minimum-norm l + d.
        Eigen::VectorXd step = svd.solve(J * l - g) - l;
        const bool feasible = g.cwiseAbs().maxCoeff() <= 1e-11;
        if (feasible && step.cwiseAbs().maxCoeff() <= 1e-10) return true;
        const double longest = step.cwiseAbs().maxCoeff();
        if (longest > 5.0) step *= 5.0 / longest;
        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= 1.0 / 1048576.0) {
            Eigen::VectorXd trial = l + alpha * step;
            Eigen::VectorXd g_trial = residual(trial);
            // Reduce the constraint violation first, then the norm of l on the manifold.
            const bool closer = g_trial.norm() < g.norm();
            const bool shorter = g_trial.cwiseAbs().maxCoeff() <= 1e-11 && trial.norm() < l.norm();
            if (g_trial.allFinite() && (closer || shorter)) {
                l = std::move(trial);
                g = std::move(g_trial);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }
    return g.cwiseAbs().maxCoeff() <= 1e-11;
}

double quantile(std::vector<double> sorted_values, double q) {
    if (sorted_values.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted_values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

}  // namespace

State sample_compatible_state(const ReactionNetwork& net, const Grid& grid,
                              std::span<const double> totals, std::uint64_t seed, double roughness) {
    if (totals.size() != net.num_conservation_laws()) throw ValidationError("sample: wrong number of totals");
    if (!(roughness >= 0.0) || !std::isfinite(roughness)) throw ValidationError("sample: roughness must be >= 0");
    const std::size_t m = net.num_species();
    const std::size_t n = grid.num_cells();

    for (std::uint64_t attempt = 0; attempt <= 10; ++attempt) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(attempt)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        State s(m, n);
        for (std::size_t i = 0; i < m; ++i) {
            for (auto& v : s.species(i)) v = std::exp(roughness * normal(rng));
        }
        Eigen::VectorXd l;
        if (!match_totals(net, s.averages(grid), totals, l)) continue;
        for (std::size_t i = 0; i < m; ++i) {
            const double factor = std::exp(l[static_cast<Eigen::Index>(i)]);
            for (auto& v : s.species(i)) v *= factor;
        }
        if (s.all_finite() && s.min_value() > 0.0) return s;
    }
    throw ValidationError("sample: could not match the conserved totals after 10 retries");
}

ProbeReport eed_ratio_probe(const ReactionNetwork& net, const Grid& grid, const FieldSet& fields,
                            std::span<const double> u_inf, std::size_t n, std::uint64_t seed,
                            double roughness) {
    if (n == 0) throw ValidationError("probe: need at least one sample");
    validate_fields(net, fields, grid);
    const auto totals = homogeneous_totals(net, u_inf);
    const auto k_cells = reaction_rate_fields(net, fields, grid.num_cells());
    std::vector<std::vector<double>> faces;
    for (const auto& d : fields.diffusion) faces.push_back(face_coefficients(grid, d));

    ProbeReport report;
    report.seed = seed;
    report.roughness = roughness;
    report.min_ratio = std::numeric_limits<double>::infinity();
    std::vector<double> ratios;
    ratios.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        std::mt19937_64 draw(seq);
        const State s = sample_compatible_state(net, grid, totals, draw(), roughness);
        const double e = relative_entropy(s, u_inf, grid);
        if (!(e > 0.0)) {
            ++report.n_skipped;
            continue;
        }
        const auto d = entropy_dissipation(s, net, k_cells, faces, u_inf, grid);
        const double ratio = d.total / e;
        ratios.push_back(ratio);
        if (ratio < report.min_ratio) {
            report.min_ratio = ratio;
            double level = 0.0;
            for (double v : s.values()) level += v * std::log(v);
            report.argmin = {k, e, d.total, d.fisher, d.reaction, level * grid.cell_measure(), s.min_value()};
        }
    }
    report.n_samples = ratios.size();
    std::sort(ratios.begin(), ratios.end());
    report.q05 = quantile(ratios, 0.05);
    report.q50 = quantile(ratios, 0.5);
    if (ratios.empty()) report.min_ratio = std::numeric_limits<double>::quiet_NaN();
    return report;
}

SweepResult omega_sweep(const SweepSetup& setup, const std::vector<double>& fractions,
                        const std::vector<std::uint64_t>& seeds) {
    if (setup.net == nullptr || setup.grid == nullptr) throw ValidationError("sweep: missing network or grid");
    if (fractions.empty()) throw ValidationError("sweep: no fractions");
    if (seeds.empty()) throw ValidationError("sweep: no seeds");
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw ValidationError("sweep: fractions must lie in (0,1]");
    }
    const auto& net = *setup.net;
    const auto& grid = *setup.grid;

    SweepResult result;
    for (double f : fractions) {
        for (auto seed : seeds) {
            const bool shrink1 = setup.mode != SweepMode::second_only;
            const bool shrink2 = setup.mode != SweepMode::first_only;
            const auto w1 = shrink1 ? mask_random(grid, f, seed) : mask_full(grid);
            const auto w2 = shrink2 ? mask_random(grid, f, seed + 1) : mask_full(grid);
            FieldSet fields = setup.base;
            fields.profiles.erase(setup.profile1);
            fields.profiles.erase(setup.profile2);
            fields.profiles.emplace(setup.profile1, coefficient_on_mask(w1, setup.kappa, setup.outside));
            fields.profiles.emplace(setup.profile2, coefficient_on_mask(w2, setup.kappa, setup.outside));

            SimConfig cfg = setup.cfg;
            if (setup.horizon_ref > 0.0) {
                const double steps = std::round(cfg.t_end * (setup.horizon_ref / f) / cfg.dt);
                cfg.t_end = std::max(1.0, steps) * cfg.dt;
            }
            const auto traj = simulate(setup.u0, net, fields, grid, cfg, setup.u_inf);
            if (traj.entropy_violation) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "sweep member fraction=%g seed=%llu: ", f,
                              static_cast<unsigned long long>(seed));
                throw SweepAborted(buf + traj.termination);
            }
            const auto fit = fit_decay_rate(traj.times(), traj.entropies(), setup.window);
            result.rows.push_back({f, seed, w1.measure(), w2.measure(), fit.lambda, fit.lambda_stderr,
                                   fit.r_squared});
        }
    }

    std::vector<double> levels = fractions;
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double f : levels) {
        SweepLevel level{f, 0.0, 0.0};
        double var = 0.0;
        std::size_t count = 0;
        for (const auto& row : result.rows) {
            if (row.fraction != f) continue;
            level.lambda += row.lambda;
            var += row.lambda_stderr * row.lambda_stderr;
            ++count;
        }
        level.lambda /= static_cast<double>(count);
        level.stderr = std::sqrt(var) / static_cast<double>(count);
        result.levels.push_back(level);
    }
    result.strictly_decreasing = result.levels.size() >= 2;
    result.monotone = true;
    for (std::size_t i = 1; i < result.levels.size(); ++i) {
        const auto& big = result.levels[i - 1];
        const auto& small = result.levels[i];
        const double noise = 2.0 * std::max(big.stderr, small.stderr);
        if (!(big.lambda - small.lambda > noise)) result.strictly_decreasing = false;
        if (small.lambda > big.lambda + noise) result.monotone = false;
    }

    // 1/lambda = a + b x with x = 1/|omega1| + 1/|omega2|.
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& row : result.rows) {
        if (!(row.lambda > 0.0)) continue;
        xs.push_back(1.0 / row.omega1_measure + 1.0 / row.omega2_measure);
        ys.push_back(1.0 / row.lambda);
    }
    if (xs.size() >= 2) {
        const double n = static_cast<double>(xs.size());
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
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        if (sxx > 1e-12 * (1.0 + mx * mx)) {
            result.b = sxy / sxx;
            result.a = my - result.b * mx;
            result.fit_valid = true;
        }
    }
    if (!result.fit_valid) {
        result.a = std::numeric_limits<double>::quiet_NaN();
        result.b = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

std::string SweepResult::to_csv() const {
    std::string out = "omega1,omega2,lambda,r2\n";
    char buf[128];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", row.omega1_measure, row.omega2_measure,
                      row.lambda, row.r_squared);
        out += buf;
    }
    return out;
}

}  // namespace crnrd
