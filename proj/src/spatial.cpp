#include "crnrd/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "crnrd/network.hpp"

namespace crnrd {

Grid::Grid(int dim, std::size_t n) : dim_(dim), n_(n) {
    if (dim != 1 && dim != 2) throw ValidationError("grid dimension must be 1 or 2");
    if (n < 2) throw ValidationError("grid needs at least 2 cells per axis");
    measure_ = 1.0 / static_cast<double>(num_cells());
    if (dim_ == 1) {
        for (std::size_t i = 0; i + 1 < n_; ++i) faces_.push_back({i, i + 1});
    } else {
        for (std::size_t iy = 0; iy < n_; ++iy) {
            for (std::size_t ix = 0; ix + 1 < n_; ++ix) {
                faces_.push_back({ix + n_ * iy, ix + 1 + n_ * iy});
            }
        }
        for (std::size_t iy = 0; iy + 1 < n_; ++iy) {
            for (std::size_t ix = 0; ix < n_; ++ix) {
                faces_.push_back({ix + n_ * iy, ix + n_ * (iy + 1)});
            }
        }
    }
}

std::array<double, 2> Grid::center(std::size_t cell) const noexcept {
    const double h = spacing();
    if (dim_ == 1) return {(static_cast<double>(cell) + 0.5) * h, 0.0};
    return {(static_cast<double>(cell % n_) + 0.5) * h, (static_cast<double>(cell / n_) + 0.5) * h};
}

Grid make_grid(int dim, std::size_t n) { return Grid(dim, n); }

SubdomainMask::SubdomainMask(const Grid& grid, std::vector<bool> member)
    : member_(std::move(member)) {
    if (member_.size() != grid.num_cells()) throw ValidationError("mask size does not match grid");
    count_ = static_cast<std::size_t>(std::count(member_.begin(), member_.end(), true));
    measure_ = static_cast<double>(count_) * grid.cell_measure();
}

SubdomainMask mask_from_intervals(const Grid& grid, const std::vector<Box>& boxes) {
    for (const auto& box : boxes) {
        for (int axis = 0; axis < grid.dim(); ++axis) {
            const auto& iv = box[static_cast<std::size_t>(axis)];
            if (iv.lo < 0.0 || iv.hi > 1.0 || iv.lo > iv.hi) {
                throw ValidationError("mask intervals must lie in [0,1] with lo <= hi");
            }
        }
    }
    std::vector<bool> member(grid.num_cells(), false);
    for (std::size_t c = 0; c < grid.num_cells(); ++c) {
        const auto x = grid.center(c);
        for (const auto& box : boxes) {
            bool inside = true;
            for (int axis = 0; axis < grid.dim(); ++axis) {
                const auto& iv = box[static_cast<std::size_t>(axis)];
                const double xc = x[static_cast<std::size_t>(axis)];
                inside = inside && xc >= iv.lo && xc <= iv.hi;
            }
            if (inside) {
                member[c] = true;
                break;
            }
        }
    }
    SubdomainMask mask(grid, std::move(member));
    if (mask.count() == 0) throw ValidationError("mask intervals select no cell");
    return mask;
}

SubdomainMask mask_full(const Grid& grid) {
    return SubdomainMask(grid, std::vector<bool>(grid.num_cells(), true));
}

SubdomainMask mask_random(const Grid& grid, double fraction, std::uint64_t seed) {
    const std::size_t total = grid.num_cells();
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ValidationError("random mask fraction must lie in (0,1]");
    }
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
    if (k < 1) throw ValidationError("random mask fraction selects no cell");

    std::vector<std::size_t> perm(total);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Plain modular draw keeps the sequence identical across standard libraries.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (total - i));
        std::swap(perm[i], perm[j]);
    }
    std::vector<bool> member(total, false);
    for (std::size_t i = 0; i < k; ++i) member[perm[i]] = true;
    return SubdomainMask(grid, std::move(member));
}

CoefficientField::CoefficientField(std::vector<double> values, double lower_bound,
                                   const SubdomainMask* mask)
    : values_(std::move(values)), lower_bound_(lower_bound) {
    for (std::size_t c = 0; c < values_.size(); ++c) {
        const double v = values_[c];
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ValidationError("coefficient field values must be finite and >= 0");
        }
        if (mask != nullptr && mask->contains(c) && v < lower_bound_) {
            throw ValidationError("coefficient field falls below its declared lower bound");
        }
    }
}

CoefficientField coefficient_on_mask(const SubdomainMask& mask, double on_value, double off_value) {
    std::vector<double> values(mask.member().size());
    for (std::size_t c = 0; c < values.size(); ++c) values[c] = mask.contains(c) ? on_value : off_value;
    return CoefficientField(std::move(values), on_value, &mask);
}

std::string DiffusionField::describe() const {
    switch (kind) {
        case DiffusionKind::constant: return "constant";
        case DiffusionKind::masked: return "masked";
        case DiffusionKind::vanishing_point: return "vanishing";
        case DiffusionKind::shifted: return "shifted";
    }
    return "unknown";
}

DiffusionField diffusion_constant(const Grid& grid, double d) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("diffusion must be finite and >= 0");
    return {DiffusionKind::constant, std::vector<double>(grid.num_cells(), d), d};
}

DiffusionField diffusion_masked(const Grid& grid, const SubdomainMask& mask, double d,
                                double outside) {
    if (!(d >= 0.0) || !(outside >= 0.0)) throw ValidationError("diffusion must be >= 0");
    std::vector<double> values(grid.num_cells());
    for (std::size_t c = 0; c < values.size(); ++c) values[c] = mask.contains(c) ? d : outside;
    return {DiffusionKind::masked, std::move(values), std::min(d, outside)};
}

DiffusionField diffusion_vanishing(const Grid& grid, std::array<double, 2> x0, double p) {
    if (!(p >= 1.0)) throw ValidationError("vanishing diffusion exponent must be >= 1");
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const double x = x0[static_cast<std::size_t>(axis)];
        if (x < 0.0 || x > 1.0) throw ValidationError("vanishing point must lie in the domain");
    }
    std::vector<double> values(grid.num_cells());
    for (std::size_t c = 0; c < values.size(); ++c) {
        const auto xc = grid.center(c);
        double dist2 = 0.0;
        for (int axis = 0; axis < grid.dim(); ++axis) {
            const auto a = static_cast<std::size_t>(axis);
            dist2 += (xc[a] - x0[a]) * (xc[a] - x0[a]);
        }
        values[c] = std::pow(std::sqrt(dist2), p);
    }
    return {DiffusionKind::vanishing_point, std::move(values), 0.0};
}

DiffusionField diffusion_shifted(const DiffusionField& field, double eps) {
    if (!(eps >= 0.0)) throw ValidationError("diffusion shift must be >= 0");
    DiffusionField out = field;
    for (double& v : out.values) v += eps;
    out.floor = field.floor + eps;
    out.kind = DiffusionKind::shifted;
    return out;
}

bool mask_connected(const Grid& grid, const SubdomainMask& mask) {
    const std::size_t n = grid.num_cells();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [a, b] : grid.faces()) {
        if (mask.contains(a) && mask.contains(b)) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
    }
    std::size_t start = n;
    for (std::size_t c = 0; c < n; ++c) {
        if (mask.contains(c)) {
            start = c;
            break;
        }
    }
    if (start == n) return false;
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> queue{start};
    seen[start] = true;
    std::size_t reached = 0;
    while (!queue.empty()) {
        const std::size_t c = queue.back();
        queue.pop_back();
        ++reached;
        for (auto nb : adj[c]) {
            if (!seen[nb]) {
                seen[nb] = true;
                queue.push_back(nb);
            }
        }
    }
    return reached == mask.count();
}

double poincare_constant(const Grid& grid, const SubdomainMask& mask, double rel_tol) {
    if (mask.count() == 0) throw ValidationError("poincare_constant: empty mask");
    if (!mask_connected(grid, mask)) return 0.0;
    const std::size_t n = mask.count();
    if (n == 1) return 0.0;

    std::vector<std::size_t> local(grid.num_cells(), 0);
    {
        std::size_t next = 0;
        for (std::size_t c = 0; c < grid.num_cells(); ++c) {
            if (mask.contains(c)) local[c] = next++;
        }
    }
    const double w = 1.0 / (grid.spacing() * grid.spacing());

    // Ground the last node: the reduced Laplacian is SPD on a connected graph,
    // and applying its inverse to mean-zero data gives the pseudo-inverse up to
    // a constant, which the projection removes.
    const auto reduced = static_cast<Eigen::Index>(n - 1);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (const auto& [a, b] : grid.faces()) {
        if (!mask.contains(a) || !mask.contains(b)) continue;
        const auto i = static_cast<Eigen::Index>(local[a]);
        const auto j = static_cast<Eigen::Index>(local[b]);
        diag[i] += w;
        diag[j] += w;
        if (i < reduced && j < reduced) {
            trip.emplace_back(i, j, -w);
            trip.emplace_back(j, i, -w);
        }
    }
    for (Eigen::Index i = 0; i < reduced; ++i) trip.emplace_back(i, i, diag[i]);
    Eigen::SparseMatrix<double> L(reduced, reduced);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
    if (solver.info() != Eigen::Success) throw std::runtime_error("poincare_constant: factorization failed");

    // Full Laplacian action for the Rayleigh quotient.
    auto apply_full = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
        for (const auto& [a, b] : grid.faces()) {
            if (!mask.contains(a) || !mask.contains(b)) continue;
            const auto i = static_cast<Eigen::Index>(local[a]);
            const auto j = static_cast<Eigen::Index>(local[b]);
            const double flux = w * (x[i] - x[j]);
            y[i] += flux;
            y[j] -= flux;
        }
        return y;
    };
    auto project = [](Eigen::VectorXd& x) { x.array() -= x.mean(); };

    // Deterministic start with a component along the lowest mode.
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = static_cast<double>(i) + 0.25 * std::sin(1.7 * static_cast<double>(i));
    }
    project(x);
    x.normalize();

    double lambda = x.dot(apply_full(x));
    for (int iter = 0; iter < 500; ++iter) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        y.head(reduced) = solver.solve(x.head(reduced));
        y[reduced] = 0.0;
        project(y);
        y.normalize();
        const double next = y.dot(apply_full(y));
        x = std::move(y);
        const bool done = std::abs(next - lambda) <= rel_tol * std::abs(next) * 1e-2;
        lambda = next;
        if (done) break;
    }
    return lambda;
}

namespace {
std::string number17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

std::string field_csv(std::span<const double> values) {
    std::string out = "cell,value\n";
    for (std::size_t c = 0; c < values.size(); ++c) {
        out += std::to_string(c) + "," + number17(values[c]) + "\n";
    }
    return out;
}

std::string mask_csv(const SubdomainMask& mask) {
    std::string out = "cell,value\n";
    for (std::size_t c = 0; c < mask.member().size(); ++c) {
        out += std::to_string(c) + "," + (mask.contains(c) ? "1" : "0") + "\n";
    }
    return out;
}

}  // namespace crnrd
