#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "dnl/cli/config.hpp"
#include "dnl/cli/experiments.hpp"
#include "dnl/cli/output.hpp"

namespace dnl::cli {

/// One child of a sweep: where its config comes from and an optional seed override.
struct SweepChild {
    std::string name;
    std::filesystem::path config;
    std::optional<int> seed;  // replaces the first argument of a random init profile
};

struct SweepEntry {
    std::string name;
    std::string config;
    int status = exit_ok;
    json report;                 // the child's report.json, when it got that far
    std::optional<std::string> error;
};

/**
 * Reads the [sweep] section: either `configs = a.ini, b.ini` (paths
 * relative to the sweep file) or `base = a.ini` with `seeds = 0, 1, ...`.
 */
inline std::vector<SweepChild> parse_sweep(const std::filesystem::path& path) {
    const auto tree = read_ini(path);
    const auto sec = tree.get_child_optional("sweep");
    if (!sec) throw ConfigError("sweep: missing [sweep] section");
    const std::filesystem::path dir = path.parent_path();
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path q(detail::trim(p));
        return q.is_absolute() ? q : dir / q;
    };
    for (const auto& kv : *sec) {
        if (kv.first != "configs" && kv.first != "base" && kv.first != "seeds") {
            throw ConfigError("sweep: unknown key '" + kv.first + "'");
        }
    }
    std::vector<SweepChild> children;
    if (auto list = sec->get_optional<std::string>("configs")) {
        if (sec->count("base")) throw ConfigError("sweep: use either configs or base, not both");
        for (const auto& item : detail::split(*list, ',')) {
            const auto p = resolve(item);
            children.push_back({p.stem().string(), p, std::nullopt});
        }
    } else if (auto base = sec->get_optional<std::string>("base")) {
        const auto p = resolve(*base);
        const auto seeds = detail::split(sec->get<std::string>("seeds", ""), ',');
        if (seeds.empty()) {
            children.push_back({p.stem().string(), p, std::nullopt});
        } else {
            for (const auto& s : seeds) {
                const int v = detail::to_int(s, "sweep.seeds");
                children.push_back({p.stem().string() + "_seed" + std::to_string(v), p, v});
            }
        }
    } else {
        throw ConfigError("sweep: need configs or base");
    }
    if (children.empty()) throw ConfigError("sweep: no configs listed");
    for (std::size_t i = 0; i < children.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (children[i].name == children[j].name) children[i].name += "_" + std::to_string(i);
        }
    }
    return children;
}

/// Runs one child in isolation; no exception escapes.
inline SweepEntry run_child(const SweepChild& child, const std::filesystem::path& out) {
    SweepEntry e;
    e.name = child.name;
    e.config = child.config.string();
    try {
        ExperimentConfig cfg = load_config(child.config);
        if (child.seed) {
            if (cfg.init.name != "random") throw ConfigError("sweep: seed override needs a random init profile");
            cfg.init.args[0] = *child.seed;
        }
        const ExperimentOutcome o = run_experiment(cfg, out / child.name);
        e.status = o.status();
        e.report = o.report;
        if (o.solver_failure) e.error = *o.solver_failure;
    } catch (const ConfigError& ex) {
        e.status = exit_config_error;
        e.error = ex.what();
    } catch (const std::exception& ex) {
        e.status = exit_solver_failure;
        e.error = ex.what();
    }
    return e;
}

/// Aggregates numeric entries of each child's report["fitted"].
inline json aggregate_fitted(const std::vector<SweepEntry>& entries) {
    std::map<std::string, std::vector<double>> values;
    for (const auto& e : entries) {
        if (!e.report.is_object() || !e.report.contains("fitted")) continue;
        for (const auto& [k, v] : e.report["fitted"].items()) {
            if (v.is_number()) values[k].push_back(v.get<double>());
        }
    }
    json agg = json::object();
    for (const auto& [k, v] : values) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        double mean = 0.0;
        for (double x : v) mean += x / static_cast<double>(v.size());
        const double spread = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::quiet_NaN();
        agg[k] = {{"values", v}, {"min", *lo}, {"max", *hi}, {"mean", mean}, {"spread", spread}};
    }
    return agg;
}

/**
 * Runs all children, at most hardware_concurrency at a time, and writes
 * sweep.json. Returns 0 iff every child passed.
 */
inline int run_sweep(const std::vector<SweepChild>& children, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
    std::vector<SweepEntry> entries;
    for (std::size_t start = 0; start < children.size(); start += width) {
        std::vector<std::future<SweepEntry>> batch;
        const std::size_t stop = std::min(children.size(), start + width);
        for (std::size_t i = start; i < stop; ++i) {
            batch.push_back(std::async(std::launch::async, run_child, std::cref(children[i]), std::cref(out)));
        }
        for (auto& f : batch) entries.push_back(f.get());
    }
    json list = json::array();
    std::size_t passed = 0;
    for (const auto& e : entries) {
        json j = {{"name", e.name}, {"config", e.config}, {"status", e.status}, {"passed", e.status == exit_ok}};
        if (!e.report.is_null()) j["report"] = e.report;
        if (e.error) j["error"] = *e.error;
        if (e.status == exit_ok) ++passed;
        list.push_back(j);
    }
    json sweep = {{"entries", list},
                  {"passed", passed},
                  {"failed", entries.size() - passed},
                  {"all_passed", passed == entries.size()},
                  {"fitted", aggregate_fitted(entries)}};
    write_json(out / "sweep.json", sweep);
    return passed == entries.size() ? exit_ok : exit_assertion_failed;
}

} // namespace dnl::cli
