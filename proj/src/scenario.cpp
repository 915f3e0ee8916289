#include "crnrd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace crnrd {

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

double to_number(const std::string& s, std::size_t line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v)) {
        throw ScenarioError("expected a number, got '" + s + "'", line);
    }
    return v;
}

std::uint64_t to_unsigned(const std::string& s, std::size_t line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    if (s.empty() || s[0] == '-') throw ScenarioError("expected a nonnegative integer, got '" + s + "'", line);
    const auto v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0') throw ScenarioError("expected a nonnegative integer, got '" + s + "'", line);
    return v;
}

std::vector<double> to_numbers(const std::string& s, std::size_t line) {
    std::vector<double> out;
    for (const auto& t : split_list(s)) out.push_back(to_number(t, line));
    return out;
}

bool to_bool(const std::string& s, std::size_t line) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ScenarioError("expected true or false, got '" + s + "'", line);
}

Interval to_interval(const std::string& s, std::size_t line) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ScenarioError("expected an interval lo:hi, got '" + s + "'", line);
    return {to_number(s.substr(0, colon), line), to_number(s.substr(colon + 1), line)};
}

// "lo:hi" in 1D, "lo:hi x lo:hi" (written without spaces as lo:hixlo:hi) in 2D.
std::vector<Box> to_boxes(const std::string& s, int dim, std::size_t line) {
    std::vector<Box> boxes;
    for (const auto& item : split_list(s)) {
        Box box{Interval{0.0, 1.0}, Interval{0.0, 1.0}};
        const auto x = item.find('x');
        if (dim == 1) {
            if (x != std::string::npos) throw ScenarioError("2D box given for a 1D grid", line);
            box[0] = to_interval(item, line);
        } else {
            if (x == std::string::npos) throw ScenarioError("2D masks need boxes written lo:hixlo:hi", line);
            box[0] = to_interval(item.substr(0, x), line);
            box[1] = to_interval(item.substr(x + 1), line);
        }
        boxes.push_back(box);
    }
    if (boxes.empty()) throw ScenarioError("empty interval list", line);
    return boxes;
}

class Entries {
public:
    void add(const std::string& key, Entry e) {
        if (key == "network.reaction") {
            reactions_.push_back(std::move(e));
            return;
        }
        if (map_.count(key) != 0) throw ScenarioError("duplicate key '" + key + "'", e.line);
        map_.emplace(key, std::move(e));
    }
    const Entry* get(const std::string& key) {
        used_.insert(key);
        auto it = map_.find(key);
        return it == map_.end() ? nullptr : &it->second;
    }
    const std::vector<Entry>& reactions() const { return reactions_; }
    /// Keys with the given prefix, e.g. all `mask.<name>.` names.
    std::set<std::string> names(const std::string& section) const {
        std::set<std::string> out;
        for (const auto& [key, e] : map_) {
            if (key.rfind(section + ".", 0) != 0) continue;
            const auto rest = key.substr(section.size() + 1);
            const auto dot = rest.find('.');
            if (dot == std::string::npos) throw ScenarioError("expected " + section + ".<name>.<key>", e.line);
            out.insert(rest.substr(0, dot));
        }
        return out;
    }
    void check_all_used() const {
        for (const auto& [key, e] : map_) {
            if (used_.count(key) == 0) throw ScenarioError("unknown key '" + key + "'", e.line);
        }
    }

private:
    std::map<std::string, Entry> map_;
    std::vector<Entry> reactions_;
    std::set<std::string> used_;
};

double number_or(Entries& en, const std::string& key, double fallback) {
    const auto* e = en.get(key);
    return e ? to_number(e->value, e->line) : fallback;
}

std::size_t species_or_fail(const ReactionNetwork& net, const std::string& name, std::size_t line) {
    const auto& sp = net.species();
    const auto it = std::find(sp.begin(), sp.end(), name);
    if (it == sp.end()) throw ScenarioError("unknown species '" + name + "'", line);
    return static_cast<std::size_t>(it - sp.begin());
}

bool is_special_network(const ReactionNetwork& net) {
    if (net.num_species() != 3 || net.num_conservation_laws() != 1) return false;
    const auto& q = net.conservation_basis()[0];
    if (q[0] != 4.0 || q[1] != 2.0 || q[2] != 1.0) return false;
    for (const auto& rx : net.reactions()) {
        if (rx.beta != 1.0) return false;
    }
    return net.num_reactions() == 4;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
    Entries en;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const auto line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ScenarioError("expected 'key = value'", line_no);
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ScenarioError("expected 'key = value'", line_no);
        en.add(key, {value, line_no});
    }

    std::string hashed = text;
    std::vector<std::string> warnings;

    // Network: a file and/or inline reactions, concatenated.
    std::string net_text;
    if (const auto* e = en.get("network.file")) {
        std::filesystem::path p(e->value);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        std::ifstream f(p);
        if (!f) throw ScenarioError("cannot read network file '" + p.string() + "'", e->line);
        std::stringstream ss;
        ss << f.rdbuf();
        net_text = ss.str();
        hashed += "\n" + net_text;
    }
    if (const auto* e = en.get("network.species")) net_text = "species: " + e->value + "\n" + net_text;
    for (const auto& r : en.reactions()) net_text += r.value + "\n";
    if (trim(net_text).empty()) throw ScenarioError("scenario defines no network", 0);
    auto net = parse_network(net_text, &warnings);

    const auto* dim_e = en.get("grid.dim");
    const auto* n_e = en.get("grid.n");
    const int dim = dim_e ? static_cast<int>(to_unsigned(dim_e->value, dim_e->line)) : 1;
    const std::size_t n = n_e ? to_unsigned(n_e->value, n_e->line) : 100;
    Grid grid = make_grid(dim, n);

    Scenario sc(std::move(net), grid);
    sc.hash = fnv1a_hex(hashed);
    sc.warnings = std::move(warnings);
    if (const auto* e = en.get("scenario.name")) sc.name = e->value;

    // Masks.
    sc.masks.emplace("full", mask_full(sc.grid));
    for (const auto& name : en.names("mask")) {
        if (name == "full") throw ScenarioError("mask name 'full' is reserved", 0);
        const auto* iv = en.get("mask." + name + ".intervals");
        const auto* fr = en.get("mask." + name + ".random");
        const auto* sd = en.get("mask." + name + ".seed");
        if ((iv != nullptr) == (fr != nullptr)) {
            throw ScenarioError("mask '" + name + "' needs exactly one of intervals or random", 0);
        }
        try {
            if (iv) {
                sc.masks.emplace(name, mask_from_intervals(sc.grid, to_boxes(iv->value, dim, iv->line)));
            } else {
                const std::uint64_t seed = sd ? to_unsigned(sd->value, sd->line) : 1;
                sc.masks.emplace(name, mask_random(sc.grid, to_number(fr->value, fr->line), seed));
            }
        } catch (const ScenarioError&) {
            throw;
        } catch (const ValidationError& err) {
            throw ScenarioError("mask '" + name + "': " + err.what(), iv ? iv->line : fr->line);
        }
    }
    auto mask_of = [&](const Entry* e) -> const SubdomainMask& {
        const std::string name = e ? e->value : "full";
        const auto it = sc.masks.find(name);
        if (it == sc.masks.end()) throw ScenarioError("unknown mask '" + name + "'", e ? e->line : 0);
        return it->second;
    };

    // Reaction profiles.
    const auto ids = sc.net.profile_ids();
    for (const auto& name : en.names("profile")) {
        if (std::find(ids.begin(), ids.end(), name) == ids.end()) {
            throw ScenarioError("profile '" + name + "' is not used by any reaction", 0);
        }
    }
    for (const auto& id : ids) {
        const auto* mask_e = en.get("profile." + id + ".mask");
        const auto* value_e = en.get("profile." + id + ".value");
        const auto* outside_e = en.get("profile." + id + ".outside");
        const auto* lb_e = en.get("profile." + id + ".lower_bound");
        if (!mask_e && !value_e && !outside_e && !lb_e) {
            sc.warnings.push_back("profile " + id + " not configured; using 1 on the full domain");
        }
        const auto& mask = mask_of(mask_e);
        const double value = value_e ? to_number(value_e->value, value_e->line) : 1.0;
        const double outside = outside_e ? to_number(outside_e->value, outside_e->line) : 0.0;
        const double lower = lb_e ? to_number(lb_e->value, lb_e->line) : value;
        std::vector<double> values(sc.grid.num_cells());
        for (std::size_t c = 0; c < values.size(); ++c) values[c] = mask.contains(c) ? value : outside;
        try {
            sc.fields.profiles.emplace(id, CoefficientField(std::move(values), lower, &mask));
        } catch (const ValidationError& err) {
            throw ScenarioError("profile '" + id + "': " + err.what(), value_e ? value_e->line : 0);
        }
    }

    // Diffusion: `diffusion.default.*` then per-species overrides.
    for (const auto& name : en.names("diffusion")) {
        if (name != "default") species_or_fail(sc.net, name, 0);
    }
    for (std::size_t i = 0; i < sc.net.num_species(); ++i) {
        const auto& sp = sc.net.species()[i];
        auto pick = [&](const std::string& key) -> const Entry* {
            const auto* own = en.get("diffusion." + sp + "." + key);
            const auto* fallback = en.get("diffusion.default." + key);
            return own ? own : fallback;
        };
        const auto* kind_e = pick("kind");
        const std::string kind = kind_e ? kind_e->value : "constant";
        const auto* value_e = pick("value");
        const double value = value_e ? to_number(value_e->value, value_e->line) : 1.0;
        const auto* eps_e = pick("eps");
        const auto* x0_e = pick("x0");
        const auto* p_e = pick("p");
        const auto* mask_e = pick("mask");
        const auto* outside_e = pick("outside");
        const std::size_t line = kind_e ? kind_e->line : 0;
        DiffusionField d;
        try {
            if (!(value >= 0.0)) throw ValidationError("diffusion value must be >= 0");
            if (kind == "constant") {
                d = diffusion_constant(sc.grid, value);
            } else if (kind == "masked") {
                const double outside = outside_e ? to_number(outside_e->value, outside_e->line) : 0.0;
                d = diffusion_masked(sc.grid, mask_of(mask_e), value, outside);
            } else if (kind == "vanishing") {
                std::array<double, 2> x0{0.5, 0.5};
                if (x0_e) {
                    const auto v = to_numbers(x0_e->value, x0_e->line);
                    if (v.size() != static_cast<std::size_t>(dim)) {
                        throw ScenarioError("x0 needs one coordinate per axis", x0_e->line);
                    }
                    for (std::size_t a = 0; a < v.size(); ++a) x0[a] = v[a];
                }
                d = diffusion_vanishing(sc.grid, x0, p_e ? to_number(p_e->value, p_e->line) : 1.0);
            } else {
                throw ScenarioError("unknown diffusion kind '" + kind + "'", line);
            }
            if (eps_e) d = diffusion_shifted(d, to_number(eps_e->value, eps_e->line));
        } catch (const ScenarioError&) {
            throw;
        } catch (const ValidationError& err) {
            throw ScenarioError("diffusion of " + sp + ": " + err.what(), line);
        }
        sc.fields.diffusion.push_back(std::move(d));
    }

    // Equilibrium.
    if (const auto* e = en.get("equilibrium.totals")) {
        auto totals = to_numbers(e->value, e->line);
        if (totals.size() != sc.net.num_conservation_laws()) {
            throw ScenarioError("equilibrium.totals needs " + std::to_string(sc.net.num_conservation_laws()) +
                                    " values",
                                e->line);
        }
        sc.totals = std::move(totals);
    }
    if (const auto* e = en.get("equilibrium.method")) {
        if (e->value == "special") {
            if (!is_special_network(sc.net)) {
                throw ScenarioError("method 'special' needs S1 <=> 2 S2, S2 <=> 2 S3 with unit rates", e->line);
            }
            sc.method = EquilibriumMethod::special;
        } else if (e->value != "auto") {
            throw ScenarioError("equilibrium.method must be auto or special", e->line);
        }
    }

    // Initial data.
    const std::size_t m = sc.net.num_species();
    if (const auto* e = en.get("init.kind")) {
        static const std::map<std::string, InitKind> kinds{
            {"uniform", InitKind::uniform}, {"cosine", InitKind::cosine},
            {"step", InitKind::step},       {"random", InitKind::random}};
        const auto it = kinds.find(e->value);
        if (it == kinds.end()) throw ScenarioError("unknown init.kind '" + e->value + "'", e->line);
        sc.init.kind = it->second;
    }
    if (const auto* e = en.get("init.values")) {
        sc.init.values = to_numbers(e->value, e->line);
        if (sc.init.values.size() != m) throw ScenarioError("init.values needs one value per species", e->line);
        for (double v : sc.init.values) {
            if (!(v >= 0.0)) throw ScenarioError("init.values must be >= 0", e->line);
        }
    }
    if (const auto* e = en.get("init.right")) {
        sc.init.right = to_numbers(e->value, e->line);
        if (sc.init.right.size() != m) throw ScenarioError("init.right needs one value per species", e->line);
        for (double v : sc.init.right) {
            if (!(v >= 0.0)) throw ScenarioError("init.right must be >= 0", e->line);
        }
    }
    sc.init.step_at = number_or(en, "init.step_at", 0.5);
    sc.init.amplitude = number_or(en, "init.amplitude", 0.5);
    if (const auto* e = en.get("init.seed")) sc.init.seed = to_unsigned(e->value, e->line);
    if (sc.init.kind == InitKind::step && sc.init.right.empty()) {
        throw ScenarioError("init.kind = step needs init.right", 0);
    }
    if (sc.init.kind == InitKind::cosine && !(std::abs(sc.init.amplitude) < 1.0)) {
        throw ScenarioError("cosine amplitude must lie in (-1,1) to keep the data positive", 0);
    }
    if (!(sc.init.amplitude >= 0.0 || sc.init.kind == InitKind::cosine)) {
        throw ScenarioError("init.amplitude must be >= 0", 0);
    }
    // Simulation.
    if (const auto* e = en.get("sim.dt")) sc.sim.dt = to_number(e->value, e->line);
    if (const auto* e = en.get("sim.t_end")) sc.sim.t_end = to_number(e->value, e->line);
    if (const auto* e = en.get("sim.record_every")) sc.sim.record_every = to_unsigned(e->value, e->line);
    if (const auto* e = en.get("sim.scheme")) {
        if (e->value == "imex") {
            sc.sim.scheme = Scheme::imex_be;
        } else if (e->value == "explicit") {
            sc.sim.scheme = Scheme::explicit_euler;
        } else {
            throw ScenarioError("sim.scheme must be imex or explicit", e->line);
        }
    }
    if (const auto* e = en.get("sim.positivity_floor")) sc.sim.positivity_floor = to_number(e->value, e->line);
    if (const auto* e = en.get("sim.saturation_eps")) sc.sim.saturation_eps = to_number(e->value, e->line);
    if (const auto* e = en.get("sim.check_entropy")) sc.sim.check_entropy = to_bool(e->value, e->line);
    if (const auto* e = en.get("sim.snapshot_every")) sc.sim.snapshot_every = to_unsigned(e->value, e->line);
    if (const auto* e = en.get("sim.hp_orders")) {
        for (const auto& t : split_list(e->value)) sc.sim.hp_orders.push_back(static_cast<int>(to_unsigned(t, e->line)));
        if (m != 3) throw ScenarioError("sim.hp_orders needs a three-species network", e->line);
    }
    try {
        sc.sim.validate();
    } catch (const ValidationError& err) {
        throw ScenarioError(err.what(), 0);
    }
    if (const auto* e = en.get("fit.window")) {
        const auto w = to_numbers(e->value, e->line);
        if (w.size() != 2 || !(w[0] >= 0.0 && w[0] < w[1] && w[1] <= 1.0)) {
            throw ScenarioError("fit.window needs lo hi with 0 <= lo < hi <= 1", e->line);
        }
        sc.window = {w[0], w[1]};
    }

    // Sweep.
    if (const auto* e = en.get("sweep.fractions")) {
        sc.sweep.fractions = to_numbers(e->value, e->line);
        for (double f : sc.sweep.fractions) {
            if (!(f > 0.0 && f <= 1.0)) throw ScenarioError("sweep fractions must lie in (0,1]", e->line);
        }
    }
    if (const auto* e = en.get("sweep.seeds")) {
        for (const auto& t : split_list(e->value)) sc.sweep.seeds.push_back(to_unsigned(t, e->line));
    }
    if (sc.sweep.seeds.empty()) sc.sweep.seeds = {1};
    if (const auto* e = en.get("sweep.mode")) {
        if (e->value == "both") {
            sc.sweep.mode = SweepMode::both;
        } else if (e->value == "first") {
            sc.sweep.mode = SweepMode::first_only;
        } else if (e->value == "second") {
            sc.sweep.mode = SweepMode::second_only;
        } else {
            throw ScenarioError("sweep.mode must be both, first or second", e->line);
        }
    }
    const auto* p1 = en.get("sweep.profile1");
    const auto* p2 = en.get("sweep.profile2");
    sc.sweep.profile1 = p1 ? p1->value : (!ids.empty() ? ids[0] : "");
    sc.sweep.profile2 = p2 ? p2->value : (ids.size() > 1 ? ids[1] : "");
    for (const auto* pe : {p1, p2}) {
        if (pe && std::find(ids.begin(), ids.end(), pe->value) == ids.end()) {
            throw ScenarioError("unknown sweep profile '" + pe->value + "'", pe->line);
        }
    }
    sc.sweep.kappa = number_or(en, "sweep.kappa", 1.0);
    sc.sweep.outside = number_or(en, "sweep.outside", 0.0);
    sc.sweep.horizon_ref = number_or(en, "sweep.horizon_ref", 0.0);
    if (!(sc.sweep.kappa > 0.0) || !(sc.sweep.outside >= 0.0) || !(sc.sweep.horizon_ref >= 0.0)) {
        throw ScenarioError("sweep.kappa must be > 0, sweep.outside and sweep.horizon_ref >= 0", 0);
    }

    // Probe.
    if (const auto* e = en.get("probe.n")) sc.probe.n = to_unsigned(e->value, e->line);
    if (const auto* e = en.get("probe.seed")) sc.probe.seed = to_unsigned(e->value, e->line);
    sc.probe.roughness = number_or(en, "probe.roughness", 1.0);
    if (sc.probe.n == 0 || !(sc.probe.roughness >= 0.0)) {
        throw ScenarioError("probe.n must be >= 1 and probe.roughness >= 0", 0);
    }

    // Epsilon-regularized runs.
    if (const auto* e = en.get("eps.species")) {
        species_or_fail(sc.net, e->value, e->line);
        sc.eps.species = e->value;
    }
    if (const auto* e = en.get("eps.values")) {
        sc.eps.values = to_numbers(e->value, e->line);
        for (std::size_t i = 0; i < sc.eps.values.size(); ++i) {
            if (!(sc.eps.values[i] > 0.0) || (i > 0 && !(sc.eps.values[i] < sc.eps.values[i - 1]))) {
                throw ScenarioError("eps.values must be positive and decreasing", e->line);
            }
        }
        if (sc.eps.species.empty()) throw ScenarioError("eps.values needs eps.species", e->line);
    }

    en.check_all_used();
    validate_fields(sc.net, sc.fields, sc.grid);
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioError("cannot read scenario file '" + path + "'", 0);
    std::stringstream ss;
    ss << f.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_scenario(ss.str(), dir.empty() ? "." : dir.string());
}

EquilibriumResult scenario_equilibrium(const Scenario& sc, const std::vector<double>& totals) {
    if (sc.method == EquilibriumMethod::special) {
        EquilibriumResult res;
        res.u_inf = special_equilibrium(totals.at(0));
        for (const auto& r : complex_balance_residual(sc.net, res.u_inf)) {
            res.cb_residual = std::max(res.cb_residual, std::abs(r.value));
        }
        res.cons_residual = std::abs(homogeneous_totals(sc.net, res.u_inf)[0] - totals[0]);
        res.converged = true;
        return res;
    }
    return find_cbe(sc.net, totals);
}

State initial_state(const Scenario& sc, const std::vector<double>& u_inf) {
    const auto& base = sc.init.values.empty() ? u_inf : sc.init.values;
    const std::size_t m = sc.net.num_species();
    const auto& grid = sc.grid;
    switch (sc.init.kind) {
        case InitKind::uniform:
            return State::uniform(base, grid.num_cells());
        case InitKind::cosine: {
            State s(m, grid.num_cells());
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t c = 0; c < grid.num_cells(); ++c) {
                    const auto x = grid.center(c);
                    double shape = std::cos(std::numbers::pi * static_cast<double>(i + 1) * x[0]);
                    if (grid.dim() == 2) shape *= std::cos(std::numbers::pi * x[1]);
                    s.at(i, c) = base[i] * (1.0 + sc.init.amplitude * shape);
                }
            }
            return s;
        }
        case InitKind::step: {
            State s(m, grid.num_cells());
            for (std::size_t c = 0; c < grid.num_cells(); ++c) {
                const bool left = grid.center(c)[0] < sc.init.step_at;
                for (std::size_t i = 0; i < m; ++i) s.at(i, c) = left ? base[i] : sc.init.right[i];
            }
            return s;
        }
        case InitKind::random:
            return sample_compatible_state(sc.net, grid, homogeneous_totals(sc.net, base), sc.init.seed,
                                           sc.init.amplitude);
    }
    throw ValidationError("unknown initial data kind");
}

ResolvedRun resolve_run(const Scenario& sc) {
    std::vector<double> base;
    if (sc.init.values.empty() && !sc.totals && sc.net.num_conservation_laws() > 0) {
        throw ScenarioError("need init.values or equilibrium.totals", 0);
    }
    if (sc.init.values.empty()) {
        const auto eq = scenario_equilibrium(sc, sc.totals.value_or(std::vector<double>{}));
        if (!eq.converged) throw SolverFailure("equilibrium for equilibrium.totals: " + eq.diagnostic);
        base = eq.u_inf;
    }
    ResolvedRun run;
    run.u0 = initial_state(sc, base);
    run.equilibrium = scenario_equilibrium(sc, conserved_totals(sc.net, run.u0, sc.grid));
    if (!run.equilibrium.converged) {
        throw SolverFailure("equilibrium for the initial totals: " + run.equilibrium.diagnostic);
    }
    return run;
}

SweepSetup sweep_setup(const Scenario& sc, const ResolvedRun& run) {
    if (sc.sweep.profile1.empty() || sc.sweep.profile2.empty()) {
        throw ScenarioError("a sweep needs two reaction profiles", 0);
    }
    SweepSetup setup;
    setup.net = &sc.net;
    setup.grid = &sc.grid;
    setup.base = sc.fields;
    setup.profile1 = sc.sweep.profile1;
    setup.profile2 = sc.sweep.profile2;
    setup.kappa = sc.sweep.kappa;
    setup.outside = sc.sweep.outside;
    setup.u0 = run.u0;
    setup.u_inf = run.equilibrium.u_inf;
    setup.cfg = sc.sim;
    setup.mode = sc.sweep.mode;
    setup.horizon_ref = sc.sweep.horizon_ref;
    setup.window = sc.window;
    return setup;
}

}  // namespace crnrd
