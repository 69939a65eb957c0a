#pragma once

#include <cmath>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/fit.hpp"
#include "dnl/semiflow.hpp"

namespace dnl {

/**
 * A solution restricted to a window of length ell, re-based to [0, ell].
 * `t_start` is the absolute time of the window start in the parent run.
 */
struct LTrajectory {
    double ell = 0.0;
    TrajectorySegment segment;
    double t_start = 0.0;
};

/// Solves from u0 on [0, ell] and wraps the result.
inline LTrajectory make_ltrajectory(const Field& u0, double ell, const Model& model, StepperConfig cfg) {
    if (!(ell > 0.0)) throw DomainError("make_ltrajectory: ell must be positive");
    cfg.t_end = ell;
    TrajectorySegment seg = solve_trajectory(u0, cfg, model);
    if (!seg.ok()) throw StepFailure("make_ltrajectory: " + *seg.failure, 0.0);
    return LTrajectory{ell, std::move(seg), 0.0};
}

/**
 * Shift L_t: continues the run behind `chi` to t + ell and returns the
 * window [t, t + ell] re-based to [0, ell]. t must be a multiple of cfg.dt;
 * cfg.dt and cfg.record_every must match the ones that produced chi.
 */
inline LTrajectory shift(const LTrajectory& chi, double t, StepperConfig cfg) {
    if (!(t >= 0.0)) throw DomainError("shift: t must be >= 0");
    if (t == 0.0) return chi;
    if (std::abs(cfg.dt - chi.segment.dt) > 1e-15 * cfg.dt) throw DomainError("shift: dt differs from chi's");
    const double steps = t / cfg.dt;
    if (std::abs(steps - std::round(steps)) > 1e-6) throw DomainError("shift: t is not a multiple of dt");

    // continue in absolute time so that step indices (and recording) line up with the parent
    TrajectorySegment run = chi.segment;
    for (double& s : run.times) s += chi.t_start;
    extend_trajectory(run, chi.t_start + t + chi.ell, cfg);
    if (!run.ok()) throw StepFailure("shift: continuation failed: " + *run.failure, 0.0);

    const double from = chi.t_start + t;
    const double tol = 1e-9 * std::max(1.0, from + chi.ell);
    TrajectorySegment out{run.model, run.dt, {}, {}, {}, {}, std::nullopt};
    for (std::size_t k = 0; k < run.size(); ++k) {
        if (run.times[k] < from - tol || run.times[k] > from + chi.ell + tol) continue;
        out.times.push_back(run.times[k] - from);
        out.states.push_back(run.states[k]);
        out.velocities.push_back(run.velocities[k]);
        out.newton_iters.push_back(run.newton_iters[k]);
    }
    return LTrajectory{chi.ell, std::move(out), from};
}

/// e(chi) = chi(ell).
inline Field eval_endpoint(const LTrajectory& chi) { return chi.segment.states.back(); }

namespace detail {
inline void require_same_window(const LTrajectory& a, const LTrajectory& b) {
    if (std::abs(a.ell - b.ell) > 1e-12 * std::max(1.0, a.ell) || a.segment.size() != b.segment.size()) {
        throw DimensionError("l-trajectories live on different windows");
    }
    for (std::size_t k = 0; k < a.segment.size(); ++k) {
        if (std::abs(a.segment.times[k] - b.segment.times[k]) > 1e-9 * std::max(1.0, a.ell)) {
            throw DimensionError("l-trajectories use different time grids");
        }
    }
    if (!(a.segment.model.grid == b.segment.model.grid)) throw DimensionError("l-trajectories on different grids");
}
} // namespace detail

/// Pointwise-in-time difference chi_a - chi_b (states and velocities).
inline LTrajectory difference(const LTrajectory& a, const LTrajectory& b) {
    detail::require_same_window(a, b);
    LTrajectory d = a;
    for (std::size_t k = 0; k < a.segment.size(); ++k) {
        d.segment.states[k] = a.segment.states[k] - b.segment.states[k];
        d.segment.velocities[k] = a.segment.velocities[k] - b.segment.velocities[k];
    }
    return d;
}

/// ||chi_a - chi_b|| in L^2(0, ell; V), time trapezoid.
inline double xell_norm(const LTrajectory& a, const LTrajectory& b) {
    detail::require_same_window(a, b);
    std::vector<double> sq(a.segment.size());
    for (std::size_t k = 0; k < sq.size(); ++k) {
        const double v = norm_V(a.segment.states[k] - b.segment.states[k]);
        sq[k] = v * v;
    }
    return std::sqrt(trapezoid(a.segment.times, sq));
}

/// Norm of the space {v in L^2(0, ell; H^2) : v_t in L^2(0, ell; H)}.
inline double well_norm(const LTrajectory& chi) {
    const auto& seg = chi.segment;
    std::vector<double> h2(seg.size()), vt(seg.size());
    for (std::size_t k = 0; k < seg.size(); ++k) {
        const double a = norm_H2(seg.states[k]);
        const double b = norm_H(seg.velocities[k]);
        h2[k] = a * a;
        vt[k] = b * b;
    }
    return std::sqrt(trapezoid(seg.times, h2) + trapezoid(seg.times, vt));
}

} // namespace dnl
