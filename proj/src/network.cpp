#include "crnrd/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace crnrd {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Complex

Complex::Complex(std::vector<Term> terms) {
    std::map<std::size_t, double> acc;
    for (const auto& [species, coeff] : terms) {
        if (!(coeff >= 0.0) || !std::isfinite(coeff)) {
            throw ValidationError("complex coefficients must be finite and nonnegative");
        }
        acc[species] += coeff;
    }
    for (const auto& [species, coeff] : acc) {
        if (coeff != 0.0) terms_.emplace_back(species, coeff);
    }
}

double Complex::coefficient(std::size_t species) const noexcept {
    for (const auto& [s, c] : terms_) {
        if (s == species) return c;
    }
    return 0.0;
}

namespace {

inline double integer_power(double base, unsigned exponent) noexcept {
    double result = 1.0;
    while (exponent != 0) {
        if (exponent & 1u) result *= base;
        base *= base;
        exponent >>= 1u;
    }
    return result;
}

inline double coefficient_power(double base, double exponent) noexcept {
    const double rounded = std::round(exponent);
    if (rounded == exponent && exponent <= 64.0) {
        return integer_power(base, static_cast<unsigned>(rounded));
    }
    return std::pow(base, exponent);
}

}  // namespace

double Complex::monomial(std::span<const double> u) const noexcept {
    double value = 1.0;
    for (const auto& [s, c] : terms_) value *= coefficient_power(u[s], c);
    return value;
}

bool Complex::operator==(const Complex& other) const noexcept {
    // Absent entries count as zero, so compare on the union of supports.
    std::size_t i = 0;
    std::size_t j = 0;
    constexpr double tol = 1e-12;
    while (i < terms_.size() || j < other.terms_.size()) {
        if (j == other.terms_.size() ||
            (i < terms_.size() && terms_[i].first < other.terms_[j].first)) {
            if (std::abs(terms_[i].second) > tol) return false;
            ++i;
        } else if (i == terms_.size() || other.terms_[j].first < terms_[i].first) {
            if (std::abs(other.terms_[j].second) > tol) return false;
            ++j;
        } else {
            if (std::abs(terms_[i].second - other.terms_[j].second) > tol) return false;
            ++i;
            ++j;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Graph structure

std::vector<std::size_t> strongly_connected_components(
    std::size_t n_vertices, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::vector<std::size_t>> adj(n_vertices);
    for (const auto& [from, to] : edges) adj[from].push_back(to);

    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n_vertices, unvisited);
    std::vector<std::size_t> low(n_vertices, 0);
    std::vector<bool> on_stack(n_vertices, false);
    std::vector<std::size_t> stack;
    std::vector<std::size_t> component(n_vertices, unvisited);
    std::size_t next_index = 0;
    std::size_t next_component = 0;

    // Iterative Tarjan: frames hold (vertex, next edge position).
    std::vector<std::pair<std::size_t, std::size_t>> frames;
    for (std::size_t root = 0; root < n_vertices; ++root) {
        if (index[root] != unvisited) continue;
        frames.emplace_back(root, 0);
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos < adj[v].size()) {
                const std::size_t w = adj[v][pos++];
                if (index[w] == unvisited) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const std::size_t done = v;
            frames.pop_back();
            if (!frames.empty()) {
                const std::size_t parent = frames.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
            if (low[done] == index[done]) {
                std::size_t w = unvisited;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    component[w] = next_component;
                } while (w != done);
                ++next_component;
            }
        }
    }
    return component;
}

// ---------------------------------------------------------------------------
// Conservation laws

namespace {

// Smallest denominator d <= 12 with x*d within tol of an integer, or 0.
int small_denominator(double x, double tol) {
    for (int d = 1; d <= 12; ++d) {
        const double scaled = x * d;
        if (std::abs(scaled - std::round(scaled)) <= tol * std::max(1.0, std::abs(scaled))) {
            return d;
        }
    }
    return 0;
}

Eigen::VectorXd normalize_basis_vector(Eigen::VectorXd v) {
    constexpr double rational_tol = 1e-9;
    long long lcm = 1;
    bool rational = true;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const int d = small_denominator(v[i], rational_tol);
        if (d == 0) {
            rational = false;
            break;
        }
        lcm = std::lcm(lcm, static_cast<long long>(d));
    }
    if (rational) {
        long long g = 0;
        std::vector<long long> ints(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            ints[static_cast<std::size_t>(i)] = std::llround(v[i] * static_cast<double>(lcm));
            g = std::gcd(g, std::llabs(ints[static_cast<std::size_t>(i)]));
        }
        if (g > 0) {
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                v[i] = static_cast<double>(ints[static_cast<std::size_t>(i)] / g);
            }
        }
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) {
            if (v[i] < 0.0) v = -v;
            break;
        }
    }
    return v;
}

}  // namespace

RankedBasis conservation_basis_ranked(const Eigen::MatrixXd& W, double tol) {
    const Eigen::Index m = W.rows();
    Eigen::MatrixXd A = W.transpose();  // R x m; left kernel of W = right kernel of A
    const double scale = A.size() > 0 ? std::max(1.0, A.cwiseAbs().maxCoeff()) : 1.0;
    const double threshold = tol * scale;

    std::vector<Eigen::Index> pivot_cols;
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < m && row < A.rows(); ++col) {
        Eigen::Index best = row;
        double best_abs = 0.0;
        for (Eigen::Index r = row; r < A.rows(); ++r) {
            if (std::abs(A(r, col)) > best_abs) {
                best_abs = std::abs(A(r, col));
                best = r;
            }
        }
        if (best_abs <= threshold) continue;
        A.row(row).swap(A.row(best));
        A.row(row) /= A(row, col);
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            if (r != row && A(r, col) != 0.0) A.row(r) -= A(r, col) * A.row(row);
        }
        pivot_cols.push_back(col);
        ++row;
    }

    RankedBasis out;
    out.rank = pivot_cols.size();
    std::vector<bool> is_pivot(static_cast<std::size_t>(m), false);
    for (auto c : pivot_cols) is_pivot[static_cast<std::size_t>(c)] = true;
    for (Eigen::Index free = 0; free < m; ++free) {
        if (is_pivot[static_cast<std::size_t>(free)]) continue;
        Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
        v[free] = 1.0;
        for (std::size_t k = 0; k < pivot_cols.size(); ++k) {
            v[pivot_cols[k]] = -A(static_cast<Eigen::Index>(k), free);
        }
        out.basis.push_back(normalize_basis_vector(std::move(v)));
    }
    return out;
}

std::vector<Eigen::VectorXd> conservation_basis(const Eigen::MatrixXd& W, double tol) {
    return conservation_basis_ranked(W, tol).basis;
}

// ---------------------------------------------------------------------------
// ReactionNetwork

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, std::vector<Complex> complexes,
                                 std::vector<Reaction> reactions)
    : species_(std::move(species)), complexes_(std::move(complexes)) {
    const std::size_t m = species_.size();
    for (const auto& c : complexes_) {
        for (const auto& [s, coeff] : c.terms()) {
            if (s >= m) throw ValidationError("complex references an unknown species index");
        }
    }
    for (std::size_t r = 0; r < reactions.size(); ++r) {
        const auto& rx = reactions[r];
        if (!(rx.beta > 0.0) || !std::isfinite(rx.beta)) {
            throw ValidationError("reaction " + std::to_string(r + 1) + ": beta must be > 0");
        }
        if (rx.reactant >= complexes_.size() || rx.product >= complexes_.size()) {
            throw ValidationError("reaction " + std::to_string(r + 1) + ": unknown complex");
        }
        if (rx.reactant == rx.product || complexes_[rx.reactant] == complexes_[rx.product]) {
            throw ValidationError("reaction " + std::to_string(r + 1) +
                                  ": reactant and product coincide");
        }
        for (std::size_t q = 0; q < r; ++q) {
            if (complexes_[reactions[q].reactant] == complexes_[rx.reactant] &&
                complexes_[reactions[q].product] == complexes_[rx.product]) {
                throw ValidationError("reaction " + std::to_string(r + 1) + " duplicates reaction " +
                                      std::to_string(q + 1));
            }
        }
    }

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(reactions.size());
    for (const auto& rx : reactions) edges.emplace_back(rx.reactant, rx.product);
    const auto scc = strongly_connected_components(complexes_.size(), edges);

    // Order SCCs: those owning reactions by smallest original reaction index,
    // then reaction-less ones by smallest complex index.
    const std::size_t n_scc =
        scc.empty() ? 0 : *std::max_element(scc.begin(), scc.end()) + 1;
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> first_reaction(n_scc, none);
    std::vector<std::size_t> first_complex(n_scc, none);
    for (std::size_t r = 0; r < reactions.size(); ++r) {
        auto& f = first_reaction[scc[reactions[r].reactant]];
        f = std::min(f, r);
    }
    for (std::size_t c = 0; c < scc.size(); ++c) {
        auto& f = first_complex[scc[c]];
        f = std::min(f, c);
    }
    std::vector<std::size_t> order(n_scc);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const bool ra = first_reaction[a] != none;
        const bool rb = first_reaction[b] != none;
        if (ra != rb) return ra;
        if (ra) return first_reaction[a] < first_reaction[b];
        return first_complex[a] < first_complex[b];
    });
    std::vector<std::size_t> rank_of(n_scc);
    for (std::size_t i = 0; i < n_scc; ++i) rank_of[order[i]] = i;

    complex_component_.resize(complexes_.size());
    for (std::size_t c = 0; c < complexes_.size(); ++c) complex_component_[c] = rank_of[scc[c]];

    for (std::size_t r = 0; r < reactions.size(); ++r) {
        reactions[r].source_index = r;
        reactions[r].component = complex_component_[reactions[r].reactant];
    }
    std::stable_sort(reactions.begin(), reactions.end(),
                     [](const Reaction& a, const Reaction& b) { return a.component < b.component; });
    reactions_ = std::move(reactions);

    components_.resize(n_scc);
    std::size_t pos = 0;
    for (std::size_t l = 0; l < n_scc; ++l) {
        components_[l].first = pos;
        while (pos < reactions_.size() && reactions_[pos].component == l) ++pos;
        components_[l].last = pos;
    }
    for (std::size_t c = 0; c < complexes_.size(); ++c) {
        components_[complex_component_[c]].complexes.push_back(c);
    }

    stoich_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                    static_cast<Eigen::Index>(reactions_.size()));
    for (std::size_t r = 0; r < reactions_.size(); ++r) {
        const auto col = static_cast<Eigen::Index>(r);
        for (const auto& [s, c] : complexes_[reactions_[r].product].terms()) {
            stoich_(static_cast<Eigen::Index>(s), col) += c;
        }
        for (const auto& [s, c] : complexes_[reactions_[r].reactant].terms()) {
            stoich_(static_cast<Eigen::Index>(s), col) -= c;
        }
    }
    auto ranked = conservation_basis_ranked(stoich_);
    cons_basis_ = std::move(ranked.basis);
    rank_ = ranked.rank;
}

std::size_t ReactionNetwork::species_index(const std::string& name) const {
    const auto it = std::find(species_.begin(), species_.end(), name);
    if (it == species_.end()) throw ValidationError("unknown species '" + name + "'");
    return static_cast<std::size_t>(it - species_.begin());
}

std::vector<std::string> ReactionNetwork::profile_ids() const {
    std::vector<std::string> ids;
    for (const auto& rx : reactions_) {
        if (std::find(ids.begin(), ids.end(), rx.profile_id) == ids.end()) {
            ids.push_back(rx.profile_id);
        }
    }
    return ids;
}

namespace {

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string complex_text(const Complex& c, const std::vector<std::string>& species) {
    std::string out;
    for (const auto& [s, coeff] : c.terms()) {
        if (!out.empty()) out += " + ";
        if (coeff != 1.0) out += format_number(coeff) + " ";
        out += species[s];
    }
    return out;
}

std::string ReactionNetwork::to_text() const {
    std::string out = "species:";
    for (const auto& s : species_) out += " " + s;
    out += "\n";
    for (const auto& rx : reactions_) {
        out += complex_text(complexes_[rx.reactant], species_) + " -> " +
               complex_text(complexes_[rx.product], species_) + " @ " + format_number(rx.beta) +
               " " + rx.profile_id + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class LineLexer {
public:
    LineLexer(const std::string& line, std::size_t line_no) : s_(line), line_(line_no) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    bool accept(const std::string& tok) {
        skip_ws();
        if (s_.compare(pos_, tok.size(), tok) == 0) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }
    std::string identifier() {
        skip_ws();
        const std::size_t start = pos_;
        if (pos_ >= s_.size() || !std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
            fail("expected identifier");
        }
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            ++pos_;
        }
        return s_.substr(start, pos_ - start);
    }
    bool number_ahead() {
        const char c = peek();
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+';
    }
    double number() {
        skip_ws();
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("expected number");
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw ParseError(what, line_, pos_ + 1);
    }
    std::size_t column() const { return pos_ + 1; }

private:
    const std::string& s_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

struct RawTerm {
    double coeff;
    std::string species;
};

struct RawReaction {
    std::vector<RawTerm> lhs;
    std::vector<RawTerm> rhs;
    double beta;
    std::string profile;
    std::size_t line;
    std::size_t beta_column;
};

std::vector<RawTerm> parse_side(LineLexer& lex) {
    std::vector<RawTerm> terms;
    do {
        double coeff = 1.0;
        if (lex.number_ahead() && lex.peek() != '-' && lex.peek() != '+') coeff = lex.number();
        terms.push_back({coeff, lex.identifier()});
    } while (lex.accept("+"));
    return terms;
}

}  // namespace

ReactionNetwork parse_network(const std::string& text, std::vector<std::string>* warnings) {
    std::vector<std::string> declared;
    bool has_declaration = false;
    std::vector<RawReaction> raw;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        LineLexer lex(line, line_no);
        if (lex.at_end()) continue;

        if (lex.accept("species:")) {
            if (has_declaration) lex.fail("duplicate species declaration");
            has_declaration = true;
            while (!lex.at_end()) {
                auto name = lex.identifier();
                if (std::find(declared.begin(), declared.end(), name) != declared.end()) {
                    lex.fail("species '" + name + "' declared twice");
                }
                declared.push_back(std::move(name));
            }
            continue;
        }

        auto lhs = parse_side(lex);
        bool reversible = false;
        if (lex.accept("<=>")) {
            reversible = true;
        } else if (!lex.accept("->")) {
            lex.fail("expected '->' or '<=>'");
        }
        auto rhs = parse_side(lex);
        if (!lex.accept("@")) lex.fail("expected '@ <beta> <profile>'");
        const std::size_t beta_col = lex.column() + 1;
        const double beta_fwd = lex.number();
        double beta_bwd = beta_fwd;
        if (lex.accept(",")) {
            if (!reversible) lex.fail("backward rate given for an irreversible reaction");
            beta_bwd = lex.number();
        }
        const std::string profile = lex.identifier();
        if (!lex.at_end()) lex.fail("unexpected trailing input");

        raw.push_back({lhs, rhs, beta_fwd, profile, line_no, beta_col});
        if (reversible) raw.push_back({rhs, lhs, beta_bwd, profile, line_no, beta_col});
    }

    std::vector<std::string> species = declared;
    auto species_of = [&](const RawTerm& t, std::size_t line_no_) -> std::size_t {
        auto it = std::find(species.begin(), species.end(), t.species);
        if (it != species.end()) return static_cast<std::size_t>(it - species.begin());
        if (has_declaration) {
            throw ParseError("unknown species '" + t.species + "' (not in species declaration)",
                             line_no_, 1);
        }
        species.push_back(t.species);
        return species.size() - 1;
    };

    std::vector<Complex> complexes;
    auto complex_of = [&](const std::vector<RawTerm>& side, std::size_t line_no_) -> std::size_t {
        std::vector<Complex::Term> terms;
        for (const auto& t : side) {
            if (t.coeff < 0.0 || !std::isfinite(t.coeff)) {
                throw ParseError("stoichiometric coefficient must be nonnegative", line_no_, 1);
            }
            if (t.coeff > 0.0 && t.coeff < 1.0 && warnings != nullptr) {
                warnings->push_back("line " + std::to_string(line_no_) +
                                    ": fractional stoichiometric coefficient " +
                                    format_number(t.coeff) + " for " + t.species);
            }
            terms.emplace_back(species_of(t, line_no_), t.coeff);
        }
        Complex c(std::move(terms));
        if (c.empty()) throw ParseError("complex has no species", line_no_, 1);
        for (std::size_t i = 0; i < complexes.size(); ++i) {
            if (complexes[i] == c) return i;
        }
        complexes.push_back(std::move(c));
        return complexes.size() - 1;
    };

    std::vector<Reaction> reactions;
    for (const auto& r : raw) {
        if (!(r.beta > 0.0) || !std::isfinite(r.beta)) {
            throw ParseError("beta must be > 0", r.line, r.beta_column);
        }
        Reaction rx;
        rx.reactant = complex_of(r.lhs, r.line);
        rx.product = complex_of(r.rhs, r.line);
        rx.beta = r.beta;
        rx.profile_id = r.profile;
        if (rx.reactant == rx.product) {
            throw ParseError("reactant and product complexes are identical", r.line, 1);
        }
        for (const auto& prev : reactions) {
            if (prev.reactant == rx.reactant && prev.product == rx.product) {
                throw ParseError("duplicate reaction", r.line, 1);
            }
        }
        reactions.push_back(std::move(rx));
    }
    return ReactionNetwork(std::move(species), std::move(complexes), std::move(reactions));
}

// ---------------------------------------------------------------------------
// Structural checks

std::vector<std::size_t> linkage_decompose(const ReactionNetwork& net) {
    std::vector<std::size_t> out;
    out.reserve(net.num_reactions());
    for (const auto& rx : net.reactions()) out.push_back(net.complex_component()[rx.reactant]);
    return out;
}

AssumptionAVerdict check_assumption_A(const ReactionNetwork& net) {
    AssumptionAVerdict verdict;
    const auto& comp = net.complex_component();
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        const auto& rx = net.reactions()[r];
        if (comp[rx.reactant] != comp[rx.product]) verdict.violating_reactions.push_back(r);
    }
    verdict.holds = verdict.violating_reactions.empty();
    return verdict;
}

ProfileConsistency check_profile_consistency(const ReactionNetwork& net) {
    ProfileConsistency out;
    for (std::size_t l = 0; l < net.num_components(); ++l) {
        const auto& range = net.components()[l];
        for (std::size_t r = range.first; r < range.last; ++r) {
            if (net.reactions()[r].profile_id != net.reactions()[range.first].profile_id) {
                out.inconsistent_components.push_back(l);
                break;
            }
        }
    }
    out.holds = out.inconsistent_components.empty();
    return out;
}

void mass_action_rates(const ReactionNetwork& net, std::span<const double> k,
                       std::span<const double> u, std::span<double> out) {
    if (k.size() != net.num_reactions() || u.size() != net.num_species() ||
        out.size() != net.num_species()) {
        throw ValidationError("mass_action_rates: size mismatch");
    }
    for (double v : u) {
        if (!(v >= 0.0)) throw ValidationError("mass_action_rates: concentrations must be >= 0");
    }
    for (double v : k) {
        if (!(v >= 0.0)) throw ValidationError("mass_action_rates: rates must be >= 0");
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
        if (k[r] == 0.0) continue;
        const auto& rx = net.reactions()[r];
        const double flux = k[r] * net.complexes()[rx.reactant].monomial(u);
        for (const auto& [s, c] : net.complexes()[rx.reactant].terms()) out[s] -= c * flux;
        for (const auto& [s, c] : net.complexes()[rx.product].terms()) out[s] += c * flux;
    }
}

std::vector<double> mass_action_rates(const ReactionNetwork& net, std::span<const double> k,
                                      std::span<const double> u) {
    std::vector<double> out(net.num_species());
    mass_action_rates(net, k, u, out);
    return out;
}

}  // namespace crnrd
