#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace crnrd {

/// Uniform cell-centered grid on [0,1] or [0,1]^2 with total measure one.
/// Cells are numbered x-fastest: cell = ix + n * iy.
class Grid {
public:
    Grid(int dim, std::size_t n);

    int dim() const noexcept { return dim_; }
    std::size_t cells_per_axis() const noexcept { return n_; }
    std::size_t num_cells() const noexcept { return dim_ == 1 ? n_ : n_ * n_; }
    double spacing() const noexcept { return 1.0 / static_cast<double>(n_); }
    double cell_measure() const noexcept { return measure_; }
    std::array<double, 2> center(std::size_t cell) const noexcept;

    /// Interior faces as (left/lower, right/upper) cell pairs; each pair once.
    const std::vector<std::array<std::size_t, 2>>& faces() const noexcept { return faces_; }

private:
    int dim_;
    std::size_t n_;
    double measure_;
    std::vector<std::array<std::size_t, 2>> faces_;
};

Grid make_grid(int dim, std::size_t n);

class SubdomainMask {
public:
    SubdomainMask(const Grid& grid, std::vector<bool> member);

    const std::vector<bool>& member() const noexcept { return member_; }
    bool contains(std::size_t cell) const noexcept { return member_[cell]; }
    std::size_t count() const noexcept { return count_; }
    double measure() const noexcept { return measure_; }

private:
    std::vector<bool> member_;
    std::size_t count_ = 0;
    double measure_ = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// A box is one interval per axis; a 1D box uses only the first entry.
using Box = std::array<Interval, 2>;

/// Cells whose centers lie in the union of the boxes (closed intervals).
SubdomainMask mask_from_intervals(const Grid& grid, const std::vector<Box>& boxes);
SubdomainMask mask_full(const Grid& grid);

/// Exactly round(fraction * cells) cells chosen by a seeded partial Fisher-Yates
/// shuffle. Masks drawn with the same seed are nested in the fraction.
SubdomainMask mask_random(const Grid& grid, double fraction, std::uint64_t seed);

/// Per-cell reaction profile alpha_l(x) with its declared floor on the mask.
class CoefficientField {
public:
    CoefficientField(std::vector<double> values, double lower_bound, const SubdomainMask* mask);

    const std::vector<double>& values() const noexcept { return values_; }
    double lower_bound() const noexcept { return lower_bound_; }

private:
    std::vector<double> values_;
    double lower_bound_ = 0.0;
};

/// alpha = on_value on the mask, off_value elsewhere; floor = on_value.
CoefficientField coefficient_on_mask(const SubdomainMask& mask, double on_value,
                                     double off_value = 0.0);

enum class DiffusionKind { constant, masked, vanishing_point, shifted };

struct DiffusionField {
    DiffusionKind kind = DiffusionKind::constant;
    std::vector<double> values;
    double floor = 0.0;  // declared lower bound where it applies
    std::string describe() const;
};

DiffusionField diffusion_constant(const Grid& grid, double d);
/// d on the mask and `outside` elsewhere; floor is min(d, outside).
DiffusionField diffusion_masked(const Grid& grid, const SubdomainMask& mask, double d,
                                double outside);
/// |x_center - x0|^p.
DiffusionField diffusion_vanishing(const Grid& grid, std::array<double, 2> x0, double p);
/// field + eps everywhere.
DiffusionField diffusion_shifted(const DiffusionField& field, double eps);

/// Smallest nonzero eigenvalue of the Neumann graph Laplacian on the masked
/// cells (face weights 1/h^2). Zero when the masked cells are disconnected.
double poincare_constant(const Grid& grid, const SubdomainMask& mask, double rel_tol = 1e-8);

/// True when the masked cells form one face-connected set.
bool mask_connected(const Grid& grid, const SubdomainMask& mask);

/// `cell,value` rows with 17 significant digits.
std::string field_csv(std::span<const double> values);
std::string mask_csv(const SubdomainMask& mask);

}  // namespace crnrd
