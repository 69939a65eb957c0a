#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/fit.hpp"
#include "dnl/longtime/stationary.hpp"
#include "dnl/semiflow.hpp"

namespace dnl {

struct ContractionOptions {
    int envelope_points = 64;      // recorded times used for the (s, y) envelope pairs
    double rate_window_lo = -1.0;  // decay-rate fit window; defaults to [ell, 2 ell]
    double rate_window_hi = -1.0;
    double basin_horizon = 0.0;    // > 2 ell: continue both runs and compare their limits
    double basin_tol = 1e-6;
};

struct ContractionReport {
    bool degenerate = false;     // identical data: u = 0, quotients undefined
    double ell = 0.0;
    double w2_bound = 0.0;       // M = max |W''| over the range of both runs
    double gronwall_c = 0.0;     // c = (M + 1)^2 / sigma
    std::size_t envelope_pairs = 0;
    std::size_t envelope_violations = 0;
    double envelope_worst_ratio = 0.0;  // max ||u(y)||_V^2 / envelope
    double Q1 = 0.0;             // sigma ell ||u_t||^2_{L2(ell,2ell;H)} / ||u||^2_{L2(0,ell;V)}
    double Q2 = 0.0;             // ||u||^2_{L2(ell,2ell;H2)} / ||u||^2_{L2(0,ell;V)}
    double decay_rate = 0.0;     // minus the slope of log ||u(t)||_V on the fit window
    bool same_basin_checked = false;
    bool same_basin = false;
    std::optional<TrajectorySegment> run_a;
    std::optional<TrajectorySegment> run_b;
};

/**
 * Evolves two data on [0, 2 ell] and measures the difference u = u_a - u_b:
 * the Gronwall envelope ||u(y)||_V^2 <= (1 - c dt)^{-(y-s)/dt} ||u(s)||_V^2
 * (the backward-Euler form of e^{c(y-s)}), the smoothing quotients Q1, Q2
 * and the exponential decay rate of ||u(t)||_V.
 */
inline ContractionReport contraction_experiment(const Field& u0_a, const Field& u0_b, double ell,
                                                const Model& model, StepperConfig cfg,
                                                ContractionOptions opt = {}) {
    if (!(ell > 0.0)) throw DomainError("contraction_experiment: ell must be positive");
    cfg.t_end = 2.0 * ell;
    ContractionReport rep{};
    rep.ell = ell;
    rep.run_a = solve_trajectory(u0_a, cfg, model);
    rep.run_b = solve_trajectory(u0_b, cfg, model);
    const TrajectorySegment& a = *rep.run_a;
    const TrajectorySegment& b = *rep.run_b;
    if (!a.ok()) throw StepFailure("contraction_experiment: run a failed: " + *a.failure, 0.0);
    if (!b.ok()) throw StepFailure("contraction_experiment: run b failed: " + *b.failure, 0.0);

    const std::size_t n = a.size();
    std::vector<double> vsq(n), hsq(n), h2sq(n);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    bool all_zero = true;
    for (std::size_t k = 0; k < n; ++k) {
        const Field u = a.states[k] - b.states[k];
        const Field ut = a.velocities[k] - b.velocities[k];
        const double v = norm_V(u), h = norm_H(ut), h2 = norm_H2(u);
        vsq[k] = v * v;
        hsq[k] = h * h;
        h2sq[k] = h2 * h2;
        if (v != 0.0) all_zero = false;
        lo = std::min({lo, a.states[k].min(), b.states[k].min()});
        hi = std::max({hi, a.states[k].max(), b.states[k].max()});
    }
    if (all_zero) {
        rep.degenerate = true;
        rep.Q1 = rep.Q2 = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }

    // envelope constant from the range of both runs
    for (int k = 0; k <= 1000; ++k) {
        const double r = lo + (hi - lo) * k / 1000.0;
        rep.w2_bound = std::max(rep.w2_bound, std::abs(a.model.potential.d2W(r)));
    }
    const double sigma = a.model.alpha.sigma();
    rep.gronwall_c = (rep.w2_bound + 1.0) * (rep.w2_bound + 1.0) / sigma;
    const double growth = rep.gronwall_c * cfg.dt;
    if (!(growth < 1.0)) throw DomainError("contraction_experiment: dt too large for the discrete envelope");

    std::vector<std::size_t> idx;
    const std::size_t stride = std::max<std::size_t>(1, (n - 1) / static_cast<std::size_t>(opt.envelope_points - 1));
    for (std::size_t k = 0; k < n; k += stride) idx.push_back(k);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            const double steps = (a.times[idx[j]] - a.times[idx[i]]) / cfg.dt;
            const double envelope = std::pow(1.0 - growth, -steps) * vsq[idx[i]];
            ++rep.envelope_pairs;
            const double ratio = envelope > 0.0 ? vsq[idx[j]] / envelope : (vsq[idx[j]] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            rep.envelope_worst_ratio = std::max(rep.envelope_worst_ratio, ratio);
            if (vsq[idx[j]] > envelope * (1.0 + 1e-10) + 1e-300) ++rep.envelope_violations;
        }
    }

    std::vector<double> t0, v0, t1, h1, q1;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = a.times[k];
        if (t <= ell + 1e-12) {
            t0.push_back(t);
            v0.push_back(vsq[k]);
        }
        if (t >= ell - 1e-12) {
            t1.push_back(t);
            h1.push_back(hsq[k]);
            q1.push_back(h2sq[k]);
        }
    }
    const double base = trapezoid(t0, v0);
    rep.Q1 = sigma * ell * trapezoid(t1, h1) / base;
    rep.Q2 = trapezoid(t1, q1) / base;

    const double wlo = opt.rate_window_lo >= 0.0 ? opt.rate_window_lo : ell;
    const double whi = opt.rate_window_hi >= 0.0 ? opt.rate_window_hi : 2.0 * ell;
    std::vector<double> ft, fy;
    for (std::size_t k = 0; k < n; ++k) {
        if (a.times[k] >= wlo - 1e-12 && a.times[k] <= whi + 1e-12 && vsq[k] > 0.0) {
            ft.push_back(a.times[k]);
            fy.push_back(0.5 * std::log(vsq[k]));
        }
    }
    if (ft.size() >= 2) rep.decay_rate = -fit_line(ft, fy).slope;

    if (opt.basin_horizon > 2.0 * ell) {
        StepperConfig c2 = cfg;
        TrajectorySegment ea = a, eb = b;
        extend_trajectory(ea, opt.basin_horizon, c2);
        extend_trajectory(eb, opt.basin_horizon, c2);
        if (ea.ok() && eb.ok()) {
            try {
                const StationaryState la = solve_stationary(model.source, ea.back(), a.model);
                const StationaryState lb = solve_stationary(model.source, eb.back(), a.model);
                rep.same_basin_checked = true;
                rep.same_basin = norm_V(la.u_inf - lb.u_inf) <= opt.basin_tol;
            } catch (const Error&) {
                rep.same_basin_checked = false;
            }
        }
    }
    return rep;
}

} // namespace dnl
