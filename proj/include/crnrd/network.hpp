#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace crnrd {

/// Thrown by the network parser; carries the 1-based source position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Thrown when a network, state or field violates a structural precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Nonnegative linear combination of species. Zero coefficients are never stored.
class Complex {
public:
    using Term = std::pair<std::size_t, double>;

    Complex() = default;
    explicit Complex(std::vector<Term> terms);

    const std::vector<Term>& terms() const noexcept { return terms_; }
    double coefficient(std::size_t species) const noexcept;
    bool empty() const noexcept { return terms_.empty(); }

    /// u^y = prod_i u_i^{y_i} with 0^0 = 1.
    double monomial(std::span<const double> u) const noexcept;

    /// Coefficient-wise equality within 1e-12.
    bool operator==(const Complex& other) const noexcept;

private:
    std::vector<Term> terms_;  // sorted by species index
};

struct Reaction {
    std::size_t reactant = 0;  // complex index
    std::size_t product = 0;   // complex index
    double beta = 1.0;
    std::string profile_id;
    std::size_t component = 0;       // 0-based linkage component
    std::size_t source_index = 0;    // position in the input before relabeling
};

struct ComponentRange {
    std::size_t first = 0;  // first reaction index
    std::size_t last = 0;   // one past the last reaction index
    std::vector<std::size_t> complexes;
};

struct AssumptionAVerdict {
    bool holds = true;
    std::vector<std::size_t> violating_reactions;
};

/// Immutable mass-action network with derived structure.
///
/// Reactions are relabeled at construction so that every strongly connected
/// component of the complex graph owns a contiguous block of reaction
/// indices. Components are ordered by their smallest original reaction index;
/// components without reactions (sink singletons) come last, ordered by their
/// smallest complex index.
class ReactionNetwork {
public:
    ReactionNetwork(std::vector<std::string> species, std::vector<Complex> complexes,
                    std::vector<Reaction> reactions);

    std::size_t num_species() const noexcept { return species_.size(); }
    std::size_t num_reactions() const noexcept { return reactions_.size(); }
    std::size_t num_complexes() const noexcept { return complexes_.size(); }
    std::size_t num_conservation_laws() const noexcept { return cons_basis_.size(); }
    std::size_t num_components() const noexcept { return components_.size(); }

    const std::vector<std::string>& species() const noexcept { return species_; }
    const std::vector<Complex>& complexes() const noexcept { return complexes_; }
    const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
    const Eigen::MatrixXd& stoichiometry() const noexcept { return stoich_; }
    const std::vector<Eigen::VectorXd>& conservation_basis() const noexcept { return cons_basis_; }
    const std::vector<ComponentRange>& components() const noexcept { return components_; }
    /// SCC id of each complex.
    const std::vector<std::size_t>& complex_component() const noexcept { return complex_component_; }

    std::size_t species_index(const std::string& name) const;
    std::size_t stoich_rank() const noexcept { return rank_; }

    /// Profiles referenced by reactions, in first-use order.
    std::vector<std::string> profile_ids() const;

    /// Round-trippable text in the network grammar (one irreversible reaction per line).
    std::string to_text() const;

private:
    std::vector<std::string> species_;
    std::vector<Complex> complexes_;
    std::vector<Reaction> reactions_;
    Eigen::MatrixXd stoich_;
    std::vector<Eigen::VectorXd> cons_basis_;
    std::vector<ComponentRange> components_;
    std::vector<std::size_t> complex_component_;
    std::size_t rank_ = 0;
};

/// "2 S1 + S2" style text.
std::string complex_text(const Complex& c, const std::vector<std::string>& species);

/// Parses the line-oriented network grammar:
///   `[species: A B C]` optional declaration fixing the species order
///   `<lhs> -> <rhs> @ <beta> <profile>`
///   `<lhs> <=> <rhs> @ <beta>[,<beta_bwd>] <profile>`
/// Warnings (fractional coefficients) are appended to `warnings` when given.
ReactionNetwork parse_network(const std::string& text, std::vector<std::string>* warnings = nullptr);

struct RankedBasis {
    std::vector<Eigen::VectorXd> basis;
    std::size_t rank = 0;
};

/// Basis of ker(W^T) by column-pivoted Gauss-Jordan elimination. Near-rational
/// vectors (denominators up to 12) are rescaled to primitive integer vectors
/// whose first nonzero entry is positive.
RankedBasis conservation_basis_ranked(const Eigen::MatrixXd& W, double tol = 1e-10);
std::vector<Eigen::VectorXd> conservation_basis(const Eigen::MatrixXd& W, double tol = 1e-10);

/// Strongly connected components of the directed complex graph (Tarjan).
/// Returns one id per complex; ids are dense but carry no ordering meaning.
std::vector<std::size_t> strongly_connected_components(
    std::size_t n_vertices, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Component assignment of each reaction in the network's current labeling.
std::vector<std::size_t> linkage_decompose(const ReactionNetwork& net);

AssumptionAVerdict check_assumption_A(const ReactionNetwork& net);

/// Profiles consistency of assumption (B): every component uses a single profile.
struct ProfileConsistency {
    bool holds = true;
    std::vector<std::size_t> inconsistent_components;
};
ProfileConsistency check_profile_consistency(const ReactionNetwork& net);

/// R_i = sum_r k_r (y'_r - y_r)_i u^{y_r}. Writes into `out` (size m).
void mass_action_rates(const ReactionNetwork& net, std::span<const double> k,
                       std::span<const double> u, std::span<double> out);
std::vector<double> mass_action_rates(const ReactionNetwork& net, std::span<const double> k,
                                      std::span<const double> u);

}  // namespace crnrd
