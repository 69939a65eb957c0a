#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dnl/diagnostics/energy.hpp"
#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/nonlinearities.hpp"
#include "dnl/profiles.hpp"
#include "dnl/semiflow.hpp"

namespace dnl::cli {

enum class ExperimentKind { Simulate, Smoothing, Contraction, OmegaLimit, Ladder, StationaryScan };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::Smoothing: return "smoothing";
        case ExperimentKind::Contraction: return "contraction";
        case ExperimentKind::OmegaLimit: return "omega_limit";
        case ExperimentKind::Ladder: return "ladder";
        case ExperimentKind::StationaryScan: return "stationary_scan";
    }
    return "unknown";
}

/// A named profile with numeric arguments, written `name(a, b, ...)` or a bare number.
struct ProfileSpec {
    std::string name = "zero";
    std::vector<double> args;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Simulate;
    int seeds = 1;

    std::size_t grid_n = 63;
    double x_lo = 0.0;
    double x_hi = 1.0;
    BoundaryCondition bc = BoundaryCondition::Dirichlet;

    PotentialKind potential = PotentialKind::Quadratic;
    PotentialParams potential_params{};
    DissipationKind alpha = DissipationKind::Linear;
    DissipationParams alpha_params{};
    ProfileSpec source{"constant", {0.0}};

    StepperConfig stepper{};

    ProfileSpec init{};
    profiles::FourierOptions fourier{};
    std::optional<double> d2_radius;  // rescale the datum to this d_2 distance from 0

    std::string output_dir = "out";
    std::map<std::string, std::string> params;  // experiment-specific [params] section

    double param(const std::string& key, double fallback) const;
    int param_int(const std::string& key, int fallback) const;
    bool param_bool(const std::string& key, bool fallback) const;
};

namespace detail {

inline std::string trim(std::string s) {
    auto blank = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), [&](char c) { return !blank(c); }));
    s.erase(std::find_if(s.rbegin(), s.rend(), [&](char c) { return !blank(c); }).base(), s.end());
    return s;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double to_number(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw ConfigError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + t + "'");
    }
}

inline int to_int(const std::string& text, const std::string& key) {
    const double v = to_number(text, key);
    if (v != static_cast<double>(static_cast<long long>(v))) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + trim(text) + "'");
    }
    return static_cast<int>(v);
}

inline bool to_bool(const std::string& text, const std::string& key) {
    const std::string t = lower(trim(text));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + t + "'");
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline ProfileSpec parse_profile(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError("config: '" + key + "' is empty");
    ProfileSpec p;
    const auto open = t.find('(');
    if (open == std::string::npos) {
        const char c = t.front();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            p.name = "constant";
            p.args = {to_number(t, key)};
        } else {
            p.name = lower(t);
        }
        return p;
    }
    if (t.back() != ')') throw ConfigError("config: '" + key + "' has unbalanced parentheses: " + t);
    p.name = lower(trim(t.substr(0, open)));
    for (const auto& a : split(t.substr(open + 1, t.size() - open - 2), ',')) p.args.push_back(to_number(a, key));
    return p;
}

inline void require_args(const ProfileSpec& p, std::size_t n, const std::string& key) {
    if (p.args.size() != n) {
        throw ConfigError("config: '" + key + "' profile " + p.name + " takes " + std::to_string(n) + " argument(s)");
    }
}

inline const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"", {"experiment", "seeds", "source"}},
        {"grid", {"n", "domain", "bc"}},
        {"potential", {"kind", "theta", "eta", "lambda"}},
        {"alpha", {"kind", "sigma", "a"}},
        {"time", {"dt", "t_end", "record_every"}},
        {"solver", {"newton_tol", "newton_max_iters", "line_search_shrink"}},
        {"init", {"profile", "k_lo", "k_hi", "decay", "min_magnitude", "d2_radius"}},
        {"regularization", {"n"}},
        {"output", {"dir"}},
    };
    return keys;
}

} // namespace detail

inline double ExperimentConfig::param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : detail::to_number(it->second, "params." + key);
}

inline int ExperimentConfig::param_int(const std::string& key, int fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : detail::to_int(it->second, "params." + key);
}

inline bool ExperimentConfig::param_bool(const std::string& key, bool fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : detail::to_bool(it->second, "params." + key);
}

/**
 * Builds a config from a parsed INI tree. Unknown sections or keys are
 * rejected so that typos do not silently fall back to defaults; the
 * [params] and [sweep] sections are free-form.
 */
inline ExperimentConfig parse_config(const boost::property_tree::ptree& tree) {
    using detail::lower;
    using detail::to_int;
    using detail::to_number;
    using detail::trim;
    const auto& known = detail::known_keys();
    ExperimentConfig cfg;

    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            const bool empty_section = node.data().empty() && (known.count(name) || name == "params" || name == "sweep");
            if (!known.at("").count(name) && !empty_section) {
                throw ConfigError("config: unknown top-level key '" + name + "'");
            }
            continue;
        }
        if (name == "params" || name == "sweep") continue;
        auto sec = known.find(name);
        if (sec == known.end() || name.empty()) throw ConfigError("config: unknown section [" + name + "]");
        for (const auto& kv : node) {
            if (!sec->second.count(kv.first)) {
                throw ConfigError("config: unknown key '" + kv.first + "' in [" + name + "]");
            }
        }
    }
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(boost::property_tree::ptree::path_type(path, '.'))) {
            return trim(*v);
        }
        return std::nullopt;
    };

    const std::string kind = lower(get("experiment").value_or("simulate"));
    const std::map<std::string, ExperimentKind> kinds = {
        {"simulate", ExperimentKind::Simulate},       {"smoothing", ExperimentKind::Smoothing},
        {"contraction", ExperimentKind::Contraction}, {"omega_limit", ExperimentKind::OmegaLimit},
        {"ladder", ExperimentKind::Ladder},           {"stationary_scan", ExperimentKind::StationaryScan},
    };
    if (!kinds.count(kind)) throw ConfigError("config: unknown experiment '" + kind + "'");
    cfg.experiment = kinds.at(kind);
    if (auto v = get("seeds")) cfg.seeds = to_int(*v, "seeds");
    if (cfg.seeds < 1) throw ConfigError("config: seeds must be >= 1");
    if (auto v = get("source")) cfg.source = detail::parse_profile(*v, "source");

    if (auto v = get("grid.n")) {
        const int n = to_int(*v, "grid.n");
        if (n < 2) throw ConfigError("config: grid.n must be >= 2");
        cfg.grid_n = static_cast<std::size_t>(n);
    }
    if (auto v = get("grid.domain")) {
        const auto parts = detail::split(*v, ',');
        if (parts.size() != 2) throw ConfigError("config: grid.domain expects 'lo, hi'");
        cfg.x_lo = to_number(parts[0], "grid.domain");
        cfg.x_hi = to_number(parts[1], "grid.domain");
        if (!(cfg.x_hi > cfg.x_lo)) throw ConfigError("config: grid.domain needs lo < hi");
    }
    if (auto v = get("grid.bc")) {
        const std::string b = lower(*v);
        if (b == "dirichlet") cfg.bc = BoundaryCondition::Dirichlet;
        else if (b == "neumann") cfg.bc = BoundaryCondition::Neumann;
        else throw ConfigError("config: grid.bc must be dirichlet or neumann");
    }

    if (auto v = get("potential.kind")) {
        const std::string k = lower(*v);
        if (k == "quadratic") cfg.potential = PotentialKind::Quadratic;
        else if (k == "double_well") cfg.potential = PotentialKind::DoubleWell;
        else if (k == "logarithmic" || k == "log") cfg.potential = PotentialKind::Logarithmic;
        else throw ConfigError("config: unknown potential.kind '" + k + "'");
    }
    if (auto v = get("potential.theta")) cfg.potential_params.theta = to_number(*v, "potential.theta");
    if (auto v = get("potential.eta")) cfg.potential_params.eta = to_number(*v, "potential.eta");
    if (auto v = get("potential.lambda")) cfg.potential_params.lambda = to_number(*v, "potential.lambda");

    if (auto v = get("alpha.kind")) {
        const std::string k = lower(*v);
        if (k == "linear") cfg.alpha = DissipationKind::Linear;
        else if (k == "cubic") cfg.alpha = DissipationKind::Cubic;
        else if (k == "sinh") cfg.alpha = DissipationKind::Sinh;
        else throw ConfigError("config: unknown alpha.kind '" + k + "'");
    }
    if (auto v = get("alpha.sigma")) cfg.alpha_params.sigma = to_number(*v, "alpha.sigma");
    if (auto v = get("alpha.a")) cfg.alpha_params.a = to_number(*v, "alpha.a");

    if (auto v = get("time.dt")) cfg.stepper.dt = to_number(*v, "time.dt");
    if (auto v = get("time.t_end")) cfg.stepper.t_end = to_number(*v, "time.t_end");
    if (auto v = get("time.record_every")) cfg.stepper.record_every = to_int(*v, "time.record_every");
    if (!(cfg.stepper.dt > 0.0) || !(cfg.stepper.t_end > 0.0)) throw ConfigError("config: dt and t_end must be positive");
    if (cfg.stepper.record_every < 1) throw ConfigError("config: time.record_every must be >= 1");
    if (auto v = get("solver.newton_tol")) cfg.stepper.newton_tol = to_number(*v, "solver.newton_tol");
    if (auto v = get("solver.newton_max_iters")) cfg.stepper.newton_max_iters = to_int(*v, "solver.newton_max_iters");
    if (auto v = get("solver.line_search_shrink")) {
        cfg.stepper.line_search_shrink = to_number(*v, "solver.line_search_shrink");
    }
    if (auto v = get("regularization.n")) {
        const int n = to_int(*v, "regularization.n");
        if (n < 1) throw ConfigError("config: regularization.n must be >= 1");
        cfg.stepper.regularization_level = n;
    }

    if (auto v = get("init.profile")) cfg.init = detail::parse_profile(*v, "init.profile");
    if (auto v = get("init.k_lo")) cfg.fourier.k_lo = to_int(*v, "init.k_lo");
    if (auto v = get("init.k_hi")) cfg.fourier.k_hi = to_int(*v, "init.k_hi");
    if (auto v = get("init.decay")) cfg.fourier.decay = to_number(*v, "init.decay");
    if (auto v = get("init.min_magnitude")) cfg.fourier.min_magnitude = to_number(*v, "init.min_magnitude");
    if (auto v = get("init.d2_radius")) cfg.d2_radius = to_number(*v, "init.d2_radius");

    if (auto v = get("output.dir")) cfg.output_dir = *v;

    if (auto p = tree.get_child_optional("params")) {
        for (const auto& kv : *p) cfg.params[kv.first] = trim(kv.second.data());
    }

    const std::map<std::string, std::size_t> arity = {{"zero", 0}, {"constant", 1}, {"sine", 2}, {"random", 2}};
    for (const auto& [key, prof] : {std::pair{"init.profile", cfg.init}, std::pair{"source", cfg.source}}) {
        auto it = arity.find(prof.name);
        if (it == arity.end()) throw ConfigError(std::string("config: unknown profile '") + prof.name + "' in " + key);
        detail::require_args(prof, it->second, key);
    }
    if (cfg.source.name == "random") throw ConfigError("config: source cannot be a random profile");
    return cfg;
}

inline boost::property_tree::ptree read_ini(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return tree;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_ini(path)); }

// ---------------------------------------------------------------------------
// building solver objects from a config

inline Grid build_grid(const ExperimentConfig& cfg) { return Grid(cfg.grid_n, cfg.x_lo, cfg.x_hi, cfg.bc); }

namespace detail {
inline Field build_profile(const ProfileSpec& p, const Grid& g, std::uint64_t seed_offset,
                           const profiles::FourierOptions& fourier) {
    if (p.name == "zero") return profiles::zero(g);
    if (p.name == "constant") return profiles::constant(g, p.args[0]);
    if (p.name == "sine") return profiles::sine(g, static_cast<int>(p.args[0]), p.args[1]);
    if (p.name == "random") {
        const auto seed = static_cast<std::uint64_t>(p.args[0]) + seed_offset;
        return profiles::random_fourier(g, seed, p.args[1], fourier);
    }
    throw ConfigError("config: unknown profile '" + p.name + "'");
}
} // namespace detail

/// Wraps construction errors of the nonlinearities as configuration errors.
inline Model build_model(const ExperimentConfig& cfg) {
    try {
        const Grid g = build_grid(cfg);
        Field f = detail::build_profile(cfg.source, g, 0, cfg.fourier);
        return Model(g, make_dissipation(cfg.alpha, cfg.alpha_params), make_potential(cfg.potential, cfg.potential_params),
                     std::move(f));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: invalid model: ") + e.what());
    }
}

namespace detail {
/// Scale c > 0 with d_2(c u, 0) = target; d_2(c u, 0) is increasing in c because W' + lambda is monotone.
inline Field scale_to_d2(const Field& u, double target, const Potential& W) {
    if (norm_Linf(u) == 0.0) throw ConfigError("config: init.d2_radius needs a nonzero datum");
    double c_hi = 1.0;
    if (W.bounded()) {
        c_hi = std::numeric_limits<double>::infinity();
        for (double v : u.values()) {
            if (v > 0.0) c_hi = std::min(c_hi, (W.hi() - 0.01) / v);
            if (v < 0.0) c_hi = std::min(c_hi, (W.lo() + 0.01) / v);
        }
        if (distance_d2_to_zero(c_hi * u, W) < target) {
            throw ConfigError("config: init.d2_radius not reachable inside the admissible interval");
        }
    } else {
        while (distance_d2_to_zero(c_hi * u, W) < target) {
            c_hi *= 2.0;
            if (c_hi > 1e12) throw ConfigError("config: init.d2_radius not reachable");
        }
    }
    double c_lo = 0.0;
    for (int it = 0; it < 200 && c_hi - c_lo > 1e-15 * c_hi; ++it) {
        const double mid = 0.5 * (c_lo + c_hi);
        (distance_d2_to_zero(mid * u, W) < target ? c_lo : c_hi) = mid;
    }
    return (0.5 * (c_lo + c_hi)) * u;
}
} // namespace detail

/**
 * Initial datum number `member` of an ensemble. Random data are shifted
 * in seed by `member` and pulled inside I with margin 0.01; with
 * init.d2_radius set the datum is then rescaled to that d_2 distance from 0.
 * Deterministic data must already lie strictly inside I.
 */
inline Field build_initial(const ExperimentConfig& cfg, const Model& model, std::uint64_t member = 0) {
    Field u = detail::build_profile(cfg.init, model.grid, member, cfg.fourier);
    if (cfg.init.name == "random") u = profiles::fit_into(u, model.potential);
    if (!model.admissible(u)) throw ConfigError("config: initial datum leaves the admissible interval");
    if (cfg.d2_radius) {
        if (!(*cfg.d2_radius > 0.0)) throw ConfigError("config: init.d2_radius must be positive");
        u = detail::scale_to_d2(u, *cfg.d2_radius, model.potential);
    }
    return u;
}

} // namespace dnl::cli
