#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dnl/cli/config.hpp"
#include "dnl/cli/output.hpp"
#include "dnl/diagnostics.hpp"
#include "dnl/longtime.hpp"
#include "dnl/profiles.hpp"
#include "dnl/semiflow.hpp"

namespace dnl::cli {

/// Exit statuses of `dnl run`.
enum ExitStatus : int { exit_ok = 0, exit_assertion_failed = 1, exit_config_error = 2, exit_solver_failure = 3 };

/// Collects named pass/fail assertions and fitted constants for report.json.
class Assertions {
public:
    void check(const std::string& name, bool ok) {
        items_[name] = ok;
        all_ = all_ && ok;
    }
    bool all() const noexcept { return all_; }
    const json& items() const noexcept { return items_; }

private:
    json items_ = json::object();
    bool all_ = true;
};

struct ExperimentOutcome {
    json report = json::object();
    bool passed = false;
    std::optional<std::string> solver_failure;

    int status() const noexcept {
        if (solver_failure) return exit_solver_failure;
        return passed ? exit_ok : exit_assertion_failed;
    }
};

namespace detail {

/// True when (alpha(v_k), v_k) >= sigma ||v_k||^2 - 1e-12 at every recorded step.
inline bool dissipation_floor(const TrajectorySegment& traj) {
    const double sigma = traj.model.alpha.sigma();
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const Field& v = traj.velocities[k];
        if (dissipation(v, traj.model.alpha) < sigma * inner_H(v, v) - 1e-12) return false;
    }
    return true;
}

inline json model_json(const ExperimentConfig& cfg, const Model& model) {
    json j;
    j["grid"] = {{"n", cfg.grid_n}, {"domain", {cfg.x_lo, cfg.x_hi}}, {"bc", to_string(cfg.bc)}};
    j["potential"] = {{"kind", model.potential.label()}, {"lambda", model.potential.lambda()},
                      {"lo", model.potential.lo()}, {"hi", model.potential.hi()}};
    j["alpha"] = {{"kind", model.alpha.label()}, {"sigma", model.alpha.sigma()}};
    j["time"] = {{"dt", cfg.stepper.dt}, {"t_end", cfg.stepper.t_end}, {"record_every", cfg.stepper.record_every}};
    if (cfg.stepper.regularization_level) j["regularization"] = *cfg.stepper.regularization_level;
    return j;
}

inline void write_run(const std::filesystem::path& out, const TrajectorySegment& traj) {
    write_trajectory_csv(out / "trajectory.csv", traj);
    write_fields(out / "fields", traj);
}

/// Records a failed run in the outcome; the partial trajectory is still written by the caller.
inline bool note_failure(ExperimentOutcome& o, const TrajectorySegment& traj, const std::string& who) {
    if (traj.ok()) return false;
    if (!o.solver_failure) o.solver_failure = who + ": " + *traj.failure;
    return true;
}

inline double spread(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

/**
 * Continuous-time V-decay rate of a difference of two solutions of the
 * linear model (alpha = sigma id, quadratic W): the smallest eigenvalue of
 * B_h + 1 divided by sigma.
 */
inline double spectral_rate(const Model& model) {
    const Grid& g = model.grid;
    const double h = g.h();
    const double mu = g.bc() == BoundaryCondition::Dirichlet
                          ? (2.0 / (h * h)) * (1.0 - std::cos(std::numbers::pi * h / g.length()))
                          : 1.0;
    return (mu + model.potential.d2W(0.0)) / model.alpha.sigma();
}

} // namespace detail

// ---------------------------------------------------------------------------

inline ExperimentOutcome run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    ExperimentOutcome o;
    const Model model = build_model(cfg);
    const Field u0 = build_initial(cfg, model);
    const TrajectorySegment traj = solve_trajectory(u0, cfg.stepper, model);
    detail::write_run(out, traj);
    detail::note_failure(o, traj, "simulate");

    Assertions a;
    const LiapunovReport lia = liapunov_check(traj, 0.0);
    a.check("run_completed", traj.ok());
    a.check("G_nonincreasing", lia.ok());
    a.check("dissipation_floor", detail::dissipation_floor(traj));
    const EnergyReport last = energy_report(traj.times.back(), traj.back(), traj.velocities.back(), traj.model);
    o.report["fitted"] = {{"liapunov_c", fit_liapunov_constant(g_series(traj), cfg.stepper.dt)}};
    o.report["liapunov"] = {{"steps", lia.steps}, {"violations", lia.violations}, {"worst_increase", lia.worst_increase}};
    o.report["final"] = {{"t", last.t}, {"E", last.E}, {"F", last.F}, {"G", last.G}, {"ut_Linf", last.ut_Linf},
                         {"u_min", last.u_min}, {"u_max", last.u_max}};
    o.report["assertions"] = a.items();
    o.passed = a.all();
    return o;
}

inline ExperimentOutcome run_smoothing(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    ExperimentOutcome o;
    const Model model = build_model(cfg);
    const double window_lo = cfg.param("window_lo", 0.01);
    const double window_hi = cfg.param("window_hi", 0.1);
    const double factor = cfg.param("factor", 3.0);
    std::vector<TrajectorySegment> runs;
    bool floor_ok = true;
    for (int s = 0; s < cfg.seeds; ++s) {
        runs.push_back(solve_trajectory(build_initial(cfg, model, static_cast<std::uint64_t>(s)), cfg.stepper, model));
        const TrajectorySegment& r = runs.back();
        if (s == 0) detail::write_run(out, r);
        else write_trajectory_csv(out / "runs" / ("member_" + std::to_string(s) + ".csv"), r);
        floor_ok = floor_ok && detail::dissipation_floor(r);
        if (detail::note_failure(o, r, "smoothing member " + std::to_string(s))) return o;
    }
    const SmoothingEnsemble ens = smoothing_uniformity(runs, factor, window_lo, window_hi);
    json members = json::array();
    for (std::size_t k = 0; k < ens.fits.size(); ++k) {
        const SmoothingFit& f = ens.fits[k];
        members.push_back({{"c1", f.c1}, {"c2", f.c2}, {"G0", f.G0}, {"monotone", f.monotone},
                           {"degenerate", f.degenerate}, {"quotient", k < ens.quotients.size() ? ens.quotients[k] : 0.0}});
    }
    Assertions a;
    a.check("ut_Linf_nonincreasing", ens.all_monotone);
    a.check("bound_ok", ens.bound_ok);
    a.check("dissipation_floor", floor_ok);
    o.report["c2"] = ens.c2;
    o.report["bound_ok"] = ens.bound_ok;
    o.report["fitted"] = {{"c2", ens.c2}, {"c2_spread", ens.c2_spread}, {"quotient_spread", ens.quotient_spread}};
    o.report["window"] = {window_lo, window_hi};
    o.report["factor"] = factor;
    o.report["members"] = members;
    o.report["assertions"] = a.items();
    o.passed = a.all();
    return o;
}

inline ExperimentOutcome run_contraction(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    ExperimentOutcome o;
    const Model model = build_model(cfg);
    const double ell = cfg.param("ell", 0.1);
    const double pert_amp = cfg.param("perturbation", 0.05);
    const double factor = cfg.param("factor", 3.0);
    profiles::FourierOptions pert{cfg.param_int("perturbation_k_lo", 1), cfg.param_int("perturbation_k_hi", 4),
                                  cfg.param("perturbation_decay", 2.0), cfg.param("perturbation_min_magnitude", 0.5)};
    const auto pert_seed = static_cast<std::uint64_t>(cfg.param_int("perturbation_seed", 1000));
    ContractionOptions opt;
    opt.basin_horizon = cfg.param("basin_horizon", 0.0);
    const bool linear = model.alpha.label() == "linear" && model.potential.label() == "quadratic" &&
                        model.source.max() == 0.0 && model.source.min() == 0.0;

    std::vector<double> q1, q2, rates;
    std::size_t pairs = 0, violations = 0;
    bool basins_ok = true, floor_ok = true;
    json members = json::array();
    for (int s = 0; s < cfg.seeds; ++s) {
        const Field ua = build_initial(cfg, model, static_cast<std::uint64_t>(s));
        const Field ub = profiles::fit_into(ua + profiles::random_fourier(model.grid, pert_seed + static_cast<std::uint64_t>(s),
                                                                          pert_amp, pert),
                                            model.potential);
        ContractionReport rep;
        try {
            rep = contraction_experiment(ua, ub, ell, model, cfg.stepper, opt);
        } catch (const StepFailure& e) {
            o.solver_failure = std::string("contraction member ") + std::to_string(s) + ": " + e.what();
            return o;
        }
        if (s == 0) {
            detail::write_run(out, *rep.run_a);
            std::vector<double> t, dv;
            for (std::size_t k = 0; k < rep.run_a->size(); ++k) {
                t.push_back(rep.run_a->times[k]);
                dv.push_back(norm_V(rep.run_a->states[k] - rep.run_b->states[k]));
            }
            write_table(out / "difference.csv", {"t", "dist_V"}, {t, dv});
        }
        floor_ok = floor_ok && detail::dissipation_floor(*rep.run_a) && detail::dissipation_floor(*rep.run_b);
        pairs += rep.envelope_pairs;
        violations += rep.envelope_violations;
        if (!rep.degenerate) {
            q1.push_back(rep.Q1);
            q2.push_back(rep.Q2);
            rates.push_back(rep.decay_rate);
        }
        if (opt.basin_horizon > 0.0) basins_ok = basins_ok && rep.same_basin_checked && rep.same_basin;
        members.push_back({{"Q1", rep.Q1}, {"Q2", rep.Q2}, {"decay_rate", rep.decay_rate},
                           {"envelope_pairs", rep.envelope_pairs}, {"envelope_violations", rep.envelope_violations},
                           {"envelope_worst_ratio", rep.envelope_worst_ratio}, {"gronwall_c", rep.gronwall_c},
                           {"w2_bound", rep.w2_bound}, {"degenerate", rep.degenerate},
                           {"same_basin_checked", rep.same_basin_checked}, {"same_basin", rep.same_basin}});
    }
    Assertions a;
    a.check("envelope_never_violated", violations == 0);
    const bool finite = std::all_of(q1.begin(), q1.end(), [](double v) { return std::isfinite(v); }) &&
                        std::all_of(q2.begin(), q2.end(), [](double v) { return std::isfinite(v); });
    a.check("quotients_finite", finite);
    if (q1.size() > 1) a.check("quotient_spread_ok", detail::spread(q1) <= factor && detail::spread(q2) <= factor);
    if (opt.basin_horizon > 0.0) a.check("same_basin", basins_ok);
    a.check("dissipation_floor", floor_ok);
    double mean_rate = 0.0;
    for (double r : rates) mean_rate += r / static_cast<double>(rates.size());
    if (linear && !rates.empty()) {
        const double spectral = detail::spectral_rate(model);
        const double tol = cfg.param("rate_tol", 0.05);
        bool within = true;
        for (double r : rates) within = within && std::abs(r - spectral) <= tol * spectral;
        a.check("rate_matches_spectral", within);
        o.report["spectral_rate"] = spectral;
    }
    o.report["fitted"] = {{"decay_rate", mean_rate}, {"Q1_spread", detail::spread(q1)}, {"Q2_spread", detail::spread(q2)}};
    o.report["ell"] = ell;
    o.report["envelope_pairs"] = pairs;
    o.report["envelope_violations"] = violations;
    o.report["members"] = members;
    o.report["assertions"] = a.items();
    o.passed = a.all();
    return o;
}

inline ExperimentOutcome run_omega_limit(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    ExperimentOutcome o;
    const Model model = build_model(cfg);
    OmegaLimitOptions opt;
    opt.settle_tol = cfg.param("settle_tol", 1e-6);
    opt.distance_tol = cfg.param("distance_tol", 1e-4);
    const double residual_tol = cfg.param("residual_tol", 1e-8);
    const bool refine = cfg.param_bool("refine", true);
    const double refine_tol = cfg.param("refine_tol", 1e-4);

    Assertions a;
    bool settled = true, residual_ok = true, monotone = true, refined_ok = true, floor_ok = true;
    json members = json::array();
    for (int s = 0; s < cfg.seeds; ++s) {
        const Field u0 = build_initial(cfg, model, static_cast<std::uint64_t>(s));
        const TrajectorySegment traj = solve_trajectory(u0, cfg.stepper, model);
        if (s == 0) detail::write_run(out, traj);
        if (detail::note_failure(o, traj, "omega_limit member " + std::to_string(s))) return o;
        floor_ok = floor_ok && detail::dissipation_floor(traj);
        json m;
        m["settle_velocity"] = norm_Linf(traj.velocities.back());
        try {
            const OmegaLimitReport rep = omega_limit(traj, opt);
            if (s == 0) write_table(out / "omega.csv", {"t", "dist_V", "dist_inf"}, {rep.times, rep.dist_V, rep.dist_inf});
            m["residual"] = rep.limit.residual;
            m["tail_monotone"] = rep.tail_monotone;
            m["converged"] = rep.converged;
            m["u_inf_min"] = rep.limit.u_inf.min();
            m["u_inf_max"] = rep.limit.u_inf.max();
            m["F_inf"] = energy_F(rep.limit.u_inf, model.source, model.potential);
            residual_ok = residual_ok && rep.limit.residual <= residual_tol;
            monotone = monotone && rep.tail_monotone;
            if (refine) {
                StepperConfig fine = cfg.stepper;
                fine.dt = 0.5 * cfg.stepper.dt;
                fine.record_every = 2 * cfg.stepper.record_every;
                const TrajectorySegment t2 = solve_trajectory(u0, fine, model);
                if (detail::note_failure(o, t2, "omega_limit refined member " + std::to_string(s))) return o;
                const OmegaLimitReport r2 = omega_limit(t2, opt);
                const double d = norm_V(r2.limit.u_inf - rep.limit.u_inf);
                m["refined_distance"] = d;
                refined_ok = refined_ok && d <= refine_tol;
            }
        } catch (const InsufficientDataError& e) {
            settled = false;
            m["error"] = e.what();
        }
        members.push_back(m);
    }
    a.check("settled", settled);
    a.check("residual_ok", residual_ok);
    a.check("tail_monotone", monotone);
    if (refine) a.check("refined_same_limit", refined_ok);
    a.check("dissipation_floor", floor_ok);
    o.report["members"] = members;
    o.report["fitted"] = json::object();
    o.report["assertions"] = a.items();
    o.passed = a.all();
    return o;
}

inline ExperimentOutcome run_ladder(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    ExperimentOutcome o;
    const Model model = build_model(cfg);
    const int j_max = cfg.param_int("j_max", 8);
    const double eps = cfg.param("epsilon", 0.2);
    const double threshold = cfg.param("stabilization", 0.05);
    const double slack = cfg.param("linf_slack", 0.1);
    LadderSchedule sched(j_max, eps);
    StepperConfig sc = cfg.stepper;
    sc.t_end = std::max(sc.t_end, sched.T.back());
    const TrajectorySegment traj = solve_trajectory(build_initial(cfg, model), sc, model);
    detail::write_run(out, traj);
    if (detail::note_failure(o, traj, "ladder")) return o;
    const LadderReport rep = lp_ladder(traj, sched, threshold);

    double closed_err = 0.0;
    for (int j = 1; j <= j_max; ++j) {
        closed_err = std::max(closed_err, std::abs(sched.p_at(j) - LadderSchedule::closed_form(j)) /
                                              std::max(1.0, std::abs(LadderSchedule::closed_form(j))));
    }
    std::vector<double> js, ps, Ts, norms;
    for (const auto& r : rep.rungs) {
        js.push_back(r.j);
        ps.push_back(r.p);
        Ts.push_back(r.T_next);
        norms.push_back(r.sup_norm);
    }
    write_table(out / "ladder.csv", {"j", "p", "T_next", "sup_norm"}, {js, ps, Ts, norms});

    Assertions a;
    a.check("closed_form", closed_err <= 1e-12);
    a.check("ap_bounds", rep.ap_bounds_hold);
    a.check("nonincreasing_after_stabilization", rep.nonincreasing_after_stabilization);
    a.check("max_within_linf_estimate", rep.max_norm <= (1.0 + slack) * rep.linf_reference);
    a.check("dissipation_floor", detail::dissipation_floor(traj));
    o.report["fitted"] = {{"max_norm", rep.max_norm}, {"linf_reference", rep.linf_reference}};
    o.report["stabilization_index"] = rep.stabilization_index;
    o.report["closed_form_error"] = closed_err;
    o.report["epsilon"] = eps;
    o.report["rows"] = rep.rungs.size();
    o.report["assertions"] = a.items();
    o.passed = a.all();
    return o;
}

inline ExperimentOutcome run_stationary_scan(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    ExperimentOutcome o;
    const Model model = build_model(cfg);
    EnumerationOptions opt;
    opt.random_guesses = cfg.param_int("random_guesses", 50);
    opt.constant_guesses = cfg.param_int("constant_guesses", 9);
    opt.dedup_distance = cfg.param("dedup_distance", 1e-4);
    opt.seed = static_cast<std::uint64_t>(cfg.param_int("seed", 0));
    const double tol = cfg.param("residual_tol", 1e-8);
    const std::vector<StationaryState> states = enumerate_stationary(model.source, model, opt);
    write_empty_trajectory_csv(out / "trajectory.csv");

    const double half_f2 = 0.5 * inner_H(model.source, model.source);
    bool residual_ok = true, energy_ok = true;
    json list = json::array();
    for (std::size_t k = 0; k < states.size(); ++k) {
        const StationaryState& s = states[k];
        char name[48];
        std::snprintf(name, sizeof name, "stationary_%03zu.txt", k);
        write_field(out / "fields" / name, s.u_inf);
        const double F = energy_F(s.u_inf, model.source, model.potential);
        residual_ok = residual_ok && s.residual <= tol;
        energy_ok = energy_ok && std::abs(F + half_f2) <= tol;
        list.push_back({{"residual", s.residual}, {"F", F}, {"F_plus_half_f2", F + half_f2}, {"min", s.u_inf.min()},
                        {"max", s.u_inf.max()}, {"E", energy_E(s.u_inf, model.source, model.potential)},
                        {"newton_iters", s.newton_iters}});
    }
    Assertions a;
    a.check("found_any", !states.empty());
    a.check("residual_ok", residual_ok);
    a.check("F_equals_minus_half_f2", energy_ok);
    o.report["states"] = list;
    o.report["fitted"] = {{"count", states.size()}};
    o.report["assertions"] = a.items();
    o.passed = a.all();
    return o;
}

/**
 * Runs the configured experiment into `out` and writes report.json.
 * Config errors raised while building the model or data surface as
 * ConfigError; solver failures are reported in the outcome.
 */
inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    std::filesystem::create_directories(out);
    try {
        cfg.stepper.validate(build_model(cfg));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    ExperimentOutcome o;
    try {
        switch (cfg.experiment) {
            case ExperimentKind::Simulate: o = run_simulate(cfg, out); break;
            case ExperimentKind::Smoothing: o = run_smoothing(cfg, out); break;
            case ExperimentKind::Contraction: o = run_contraction(cfg, out); break;
            case ExperimentKind::OmegaLimit: o = run_omega_limit(cfg, out); break;
            case ExperimentKind::Ladder: o = run_ladder(cfg, out); break;
            case ExperimentKind::StationaryScan: o = run_stationary_scan(cfg, out); break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const ConvergenceError& e) {
        o.solver_failure = e.what();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    o.report["experiment"] = to_string(cfg.experiment);
    o.report["model"] = detail::model_json(cfg, build_model(cfg));
    o.report["seeds"] = cfg.seeds;
    o.report["passed"] = o.passed && !o.solver_failure;
    o.report["status"] = o.status();
    if (o.solver_failure) o.report["solver_failure"] = *o.solver_failure;
    if (!o.report.contains("assertions")) o.report["assertions"] = json::object();
    if (!o.report.contains("fitted")) o.report["fitted"] = json::object();
    write_json(out / "report.json", o.report);
    return o;
}

} // namespace dnl::cli
