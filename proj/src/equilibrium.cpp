#include "crnrd/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

namespace crnrd {

std::vector<ComplexResidual> complex_balance_residual(const ReactionNetwork& net,
                                                      std::span<const double> u) {
    if (u.size() != net.num_species()) throw ValidationError("complex_balance_residual: size mismatch");
    for (double v : u) {
        if (!(v > 0.0)) throw ValidationError("complex_balance_residual: u must be strictly positive");
    }
    std::vector<double> balance(net.num_complexes(), 0.0);
    for (const auto& rx : net.reactions()) {
        const double flux = rx.beta * net.complexes()[rx.reactant].monomial(u);
        balance[rx.reactant] -= flux;
        balance[rx.product] += flux;
    }
    std::vector<ComplexResidual> out;
    out.reserve(net.num_complexes());
    for (std::size_t l = 0; l < net.num_components(); ++l) {
        for (auto c : net.components()[l].complexes) out.push_back({l, c, balance[c]});
    }
    return out;
}

std::vector<double> homogeneous_totals(const ReactionNetwork& net, std::span<const double> u) {
    std::vector<double> totals;
    for (const auto& q : net.conservation_basis()) {
        double t = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) t += q[static_cast<Eigen::Index>(i)] * u[i];
        totals.push_back(t);
    }
    return totals;
}

namespace {

// Complex balance written as log(inflow) - log(outflow) per complex, which is
// invariant under rescaling u and cannot be satisfied by driving u to zero.
// Requires every complex to have both an inflow and an outflow.
struct System {
    const ReactionNetwork& net;
    std::span<const double> totals;
    bool with_conservation;

    Eigen::Index rows() const {
        return static_cast<Eigen::Index>(net.num_complexes() +
                                         (with_conservation ? net.num_conservation_laws() : 0));
    }

    // Residual and Jacobian with respect to x = log u.
    void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
        const auto m = static_cast<Eigen::Index>(net.num_species());
        const auto nc = static_cast<Eigen::Index>(net.num_complexes());
        std::vector<double> u(static_cast<std::size_t>(m));
        for (Eigen::Index i = 0; i < m; ++i) u[static_cast<std::size_t>(i)] = std::exp(x[i]);
        Eigen::VectorXd in = Eigen::VectorXd::Zero(nc);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(nc);
        Eigen::MatrixXd d_in = Eigen::MatrixXd::Zero(nc, m);
        Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(nc, m);
        for (const auto& rx : net.reactions()) {
            const auto& y = net.complexes()[rx.reactant];
            const double flux = rx.beta * y.monomial(u);
            const auto a = static_cast<Eigen::Index>(rx.reactant);
            const auto b = static_cast<Eigen::Index>(rx.product);
            out[a] += flux;
            in[b] += flux;
            for (const auto& [s, c] : y.terms()) {
                const auto col = static_cast<Eigen::Index>(s);
                d_out(a, col) += c * flux;
                d_in(b, col) += c * flux;
            }
        }
        r = Eigen::VectorXd::Zero(rows());
        if (J != nullptr) *J = Eigen::MatrixXd::Zero(rows(), m);
        for (Eigen::Index c = 0; c < nc; ++c) {
            r[c] = std::log(in[c]) - std::log(out[c]);
            if (J != nullptr) J->row(c) = d_in.row(c) / in[c] - d_out.row(c) / out[c];
        }
        if (!with_conservation) return;
        for (std::size_t j = 0; j < net.num_conservation_laws(); ++j) {
            const auto& q = net.conservation_basis()[j];
            const auto row = nc + static_cast<Eigen::Index>(j);
            const double scale = std::max(1.0, std::abs(totals[j]));
            double t = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                t += q[i] * u[static_cast<std::size_t>(i)];
                if (J != nullptr) (*J)(row, i) = q[i] * u[static_cast<std::size_t>(i)] / scale;
            }
            r[row] = (t - totals[j]) / scale;
        }
    }
};

// Absolute residuals in rate and concentration units.
void absolute_residuals(const ReactionNetwork& net, std::span<const double> totals,
                        std::span<const double> u, double& cb, double& cons) {
    cb = 0.0;
    for (const auto& r : complex_balance_residual(net, u)) cb = std::max(cb, std::abs(r.value));
    cons = 0.0;
    const auto t = homogeneous_totals(net, u);
    for (std::size_t j = 0; j < t.size(); ++j) cons = std::max(cons, std::abs(t[j] - totals[j]));
}

struct SolveOutcome {
    Eigen::VectorXd x;
    std::size_t iterations = 0;
    double condition = 1.0;
};

double max_abs(const Eigen::VectorXd& v, Eigen::Index from, Eigen::Index to) {
    double out = 0.0;
    for (Eigen::Index i = from; i < to; ++i) out = std::max(out, std::abs(v[i]));
    return out;
}

SolveOutcome gauss_newton(const System& sys, Eigen::VectorXd x, double tol, std::size_t max_iter) {
    constexpr double armijo = 1e-4;
    constexpr double min_step = 1.0 / 1048576.0;  // 2^-20
    constexpr double max_log_step = 5.0;

    SolveOutcome out;
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    sys.evaluate(x, r, &J);
    for (std::size_t it = 0; it < max_iter; ++it) {
        out.iterations = it;
        if (r.cwiseAbs().maxCoeff() <= 1e-2 * tol) break;

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double smax = sv.size() > 0 ? sv[0] : 0.0;
        const double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
        out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
        svd.setThreshold(1e-14);
        Eigen::VectorXd step = -svd.solve(r);
        const double longest = step.cwiseAbs().maxCoeff();
        if (longest > max_log_step) step *= max_log_step / longest;

        const double f0 = 0.5 * r.squaredNorm();
        const double slope = r.dot(J * step);
        double alpha = 1.0;
        Eigen::VectorXd r_new;
        bool accepted = false;
        while (alpha >= min_step) {
            Eigen::VectorXd trial = x + alpha * step;
            sys.evaluate(trial, r_new, nullptr);
            const double f1 = 0.5 * r_new.squaredNorm();
            if (std::isfinite(f1) && f1 <= f0 + armijo * alpha * std::min(slope, 0.0)) {
                x = std::move(trial);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
        sys.evaluate(x, r, &J);
        out.iterations = it + 1;
    }
    out.x = std::move(x);
    return out;
}

EquilibriumResult finish(const ReactionNetwork& net, std::span<const double> totals,
                         const SolveOutcome& outcome, double tol) {
    EquilibriumResult res;
    const auto m = net.num_species();
    res.u_inf.resize(m);
    for (std::size_t i = 0; i < m; ++i) res.u_inf[i] = std::exp(outcome.x[static_cast<Eigen::Index>(i)]);
    res.iterations = outcome.iterations;
    res.condition_estimate = outcome.condition;
    const double min_u = *std::min_element(res.u_inf.begin(), res.u_inf.end());
    if (!(min_u > 0.0) || !std::isfinite(*std::max_element(res.u_inf.begin(), res.u_inf.end()))) {
        res.cb_residual = res.cons_residual = std::numeric_limits<double>::infinity();
        return res;
    }
    absolute_residuals(net, totals, res.u_inf, res.cb_residual, res.cons_residual);
    System sys{net, totals, true};
    Eigen::VectorXd r;
    sys.evaluate(outcome.x, r, nullptr);
    const double log_gap = max_abs(r, 0, static_cast<Eigen::Index>(net.num_complexes()));
    res.converged = res.cb_residual <= tol && res.cons_residual <= tol && log_gap <= tol;
    return res;
}

}  // namespace

EquilibriumResult find_cbe(const ReactionNetwork& net, std::span<const double> totals,
                           const CbeOptions& options) {
    if (!(options.tol > 0.0)) throw ValidationError("find_cbe: tol must be > 0");
    if (totals.size() != net.num_conservation_laws()) {
        throw ValidationError("find_cbe: expected " + std::to_string(net.num_conservation_laws()) +
                              " totals, got " + std::to_string(totals.size()));
    }
    const auto m = static_cast<Eigen::Index>(net.num_species());
    if (m == 0) throw ValidationError("find_cbe: network has no species");

    // A positive CBE needs inflow and outflow at every complex.
    {
        std::vector<int> seen(net.num_complexes(), 0);
        for (const auto& rx : net.reactions()) {
            seen[rx.reactant] |= 1;
            seen[rx.product] |= 2;
        }
        for (std::size_t c = 0; c < seen.size(); ++c) {
            if (seen[c] != 3) {
                EquilibriumResult res;
                res.u_inf.assign(static_cast<std::size_t>(m), 1.0);
                res.cb_residual = std::numeric_limits<double>::infinity();
                res.cons_residual = std::numeric_limits<double>::infinity();
                res.diagnostic = "complex " + complex_text(net.complexes()[c], net.species()) +
                                 " lacks an inflow or an outflow; no positive complex balanced "
                                 "equilibrium exists";
                return res;
            }
        }
    }

    Eigen::VectorXd x0(m);
    if (options.init) {
        if (options.init->size() != static_cast<std::size_t>(m)) {
            throw ValidationError("find_cbe: initial guess has wrong size");
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            const double v = (*options.init)[static_cast<std::size_t>(i)];
            if (!(v > 0.0)) throw ValidationError("find_cbe: initial guess must be positive");
            x0[i] = std::log(v);
        }
    } else {
        // Uniform state meeting the first conservation law with a positive row sum.
        double level = 1.0;
        for (std::size_t j = 0; j < net.num_conservation_laws(); ++j) {
            const double row_sum = net.conservation_basis()[j].sum();
            if (row_sum > 0.0 && totals[j] > 0.0) {
                level = totals[j] / row_sum;
                break;
            }
        }
        x0.setConstant(std::log(level));
    }

    System full{net, totals, true};
    auto outcome = gauss_newton(full, x0, options.tol, options.max_iter);
    auto result = finish(net, totals, outcome, options.tol);
    if (result.converged) return result;

    // Continuation: a CBE of the balance equations alone fixes starting
    // totals, which are then moved to the requested ones in 10 steps.
    if (!options.init && net.num_conservation_laws() > 0) {
        System balance_only{net, totals, false};
        auto seed = gauss_newton(balance_only, x0, options.tol, options.max_iter);
        std::vector<double> u_seed(static_cast<std::size_t>(m));
        for (Eigen::Index i = 0; i < m; ++i) u_seed[static_cast<std::size_t>(i)] = std::exp(seed.x[i]);
        const auto start = homogeneous_totals(net, u_seed);
        Eigen::VectorXd x = seed.x;
        std::size_t iterations = seed.iterations;
        std::vector<double> target(totals.size());
        SolveOutcome step_outcome;
        for (int k = 1; k <= 10; ++k) {
            const double s = k / 10.0;
            for (std::size_t j = 0; j < totals.size(); ++j) target[j] = (1 - s) * start[j] + s * totals[j];
            System stage{net, target, true};
            step_outcome = gauss_newton(stage, x, options.tol, options.max_iter);
            x = step_outcome.x;
            iterations += step_outcome.iterations;
        }
        step_outcome.iterations = iterations;
        auto continued = finish(net, totals, step_outcome, options.tol);
        if (continued.converged ||
            continued.cb_residual + continued.cons_residual < result.cb_residual + result.cons_residual) {
            result = std::move(continued);
        }
    }
    if (!result.converged) {
        std::ostringstream msg;
        if (!std::isfinite(result.condition_estimate) || result.condition_estimate > 1e13) {
            msg << "Jacobian numerically singular (condition estimate " << result.condition_estimate << ")";
        } else {
            msg << "no convergence after " << result.iterations << " iterations";
        }
        result.diagnostic = msg.str();
    }
    return result;
}

std::vector<double> special_equilibrium(double mass) {
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("special_equilibrium: M must be > 0");
    auto f = [mass](double z) { return ((4.0 * z * z + 2.0) * z + 1.0) * z - mass; };
    auto df = [](double z) { return 16.0 * z * z * z + 4.0 * z + 1.0; };

    // f(0) = -M < 0 and f(M) >= 0 since z <= 4z^4 + 2z^2 + z.
    double lo = 0.0;
    double hi = mass;
    for (int i = 0; i < 200 && (hi - lo) > 1e-6 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    double z = 0.5 * (lo + hi);
    for (int i = 0; i < 50; ++i) {
        const double dz = f(z) / df(z);
        z -= dz;
        if (std::abs(dz) <= 1e-16 * z) break;
    }
    const double z2 = z * z;
    return {z2 * z2, z2, z};
}

}  // namespace crnrd
