#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "dnl/diagnostics/energy.hpp"
#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/fit.hpp"
#include "dnl/semiflow.hpp"

namespace dnl {

// ---------------------------------------------------------------------------
// smoothing for t > 0

struct SmoothingFit {
    double c1 = 0.0;          // exp(intercept) / (1 + G(u0))
    double c2 = 0.0;          // minus the log-log slope of ||u_t||_inf^2
    bool degenerate = false;  // u_t vanishes on the window; nothing to fit
    bool monotone = true;     // ||u_t(t)||_inf nonincreasing over recorded t > 0
    double G0 = 0.0;
    std::size_t points = 0;
};

/**
 * Fits log ||u_t(t)||_inf^2 against log t on (window_lo, window_hi].
 * Throws InsufficientDataError if the run ends before window_hi or has
 * fewer than three samples in the window.
 */
inline SmoothingFit smoothing_rate(const TrajectorySegment& traj, double window_lo = 0.01, double window_hi = 0.1) {
    if (traj.size() < 2 || traj.times.back() < window_hi * (1.0 - 1e-12)) {
        throw InsufficientDataError("smoothing_rate: trajectory too short for the fitting window");
    }
    SmoothingFit fit;
    fit.G0 = energy_G(traj.states.front(), traj.model.source, traj.model.potential);
    std::vector<double> lx, ly;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double nv = norm_Linf(traj.velocities[k]);
        if (nv > prev * (1.0 + 1e-12) + 1e-300) fit.monotone = false;
        prev = nv;
        const double t = traj.times[k];
        if (t > window_lo && t <= window_hi * (1.0 + 1e-12) && nv > 0.0) {
            lx.push_back(std::log(t));
            ly.push_back(std::log(nv * nv));
        }
    }
    std::size_t in_window = 0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        if (traj.times[k] > window_lo && traj.times[k] <= window_hi * (1.0 + 1e-12)) ++in_window;
    }
    if (in_window < 3) throw InsufficientDataError("smoothing_rate: fewer than three samples in the window");
    if (lx.size() < 3) {
        fit.degenerate = true;
        return fit;
    }
    const LineFit line = fit_line(lx, ly);
    fit.c2 = -line.slope;
    fit.c1 = std::exp(line.intercept) / (1.0 + fit.G0);
    fit.points = lx.size();
    return fit;
}

/// sup over recorded t > 0 of t^{c2} ||u_t(t)||_inf^2 / (1 + G(u0)).
inline double smoothing_quotient(const TrajectorySegment& traj, double c2) {
    const double G0 = energy_G(traj.states.front(), traj.model.source, traj.model.potential);
    double q = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double nv = norm_Linf(traj.velocities[k]);
        q = std::max(q, std::pow(traj.times[k], c2) * nv * nv);
    }
    return q / (1.0 + G0);
}

struct SmoothingEnsemble {
    std::vector<SmoothingFit> fits;
    std::vector<double> quotients;
    double c2 = 0.0;          // mean of the individual exponents
    double c2_spread = 0.0;   // max / min of the individual exponents
    double quotient_spread = 0.0;
    bool all_monotone = true;
    bool bound_ok = false;
};

/// Pools per-datum fits and checks that the normalized quotient varies by at most `factor`.
inline SmoothingEnsemble smoothing_uniformity(const std::vector<TrajectorySegment>& runs, double factor = 3.0,
                                              double window_lo = 0.01, double window_hi = 0.1) {
    if (runs.empty()) throw InsufficientDataError("smoothing_uniformity: no runs");
    SmoothingEnsemble ens;
    double c2_min = std::numeric_limits<double>::infinity(), c2_max = 0.0;
    std::size_t fitted = 0;
    for (const auto& r : runs) {
        ens.fits.push_back(smoothing_rate(r, window_lo, window_hi));
        const SmoothingFit& f = ens.fits.back();
        ens.all_monotone = ens.all_monotone && f.monotone;
        if (!f.degenerate) {
            ens.c2 += f.c2;
            c2_min = std::min(c2_min, f.c2);
            c2_max = std::max(c2_max, f.c2);
            ++fitted;
        }
    }
    if (fitted == 0) {
        ens.bound_ok = true;
        return ens;
    }
    ens.c2 /= static_cast<double>(fitted);
    ens.c2_spread = c2_min > 0.0 ? c2_max / c2_min : std::numeric_limits<double>::infinity();
    double qmin = std::numeric_limits<double>::infinity(), qmax = 0.0;
    for (const auto& r : runs) {
        const double q = smoothing_quotient(r, ens.c2);
        ens.quotients.push_back(q);
        qmin = std::min(qmin, q);
        qmax = std::max(qmax, q);
    }
    ens.quotient_spread = qmin > 0.0 ? qmax / qmin : std::numeric_limits<double>::infinity();
    ens.bound_ok = std::isfinite(ens.quotient_spread) && ens.quotient_spread <= factor;
    return ens;
}

// ---------------------------------------------------------------------------
// separation from the singular barriers

struct SeparationReport {
    double r_lo = 0.0;
    double r_hi = 0.0;
    double margin = 0.0;                 // distance of [r_lo, r_hi] from the boundary of I
    std::vector<double> times;           // recorded t >= T
    std::vector<double> margins;         // per-time distance to the boundary
    bool margin_nondecreasing = true;
    bool ok() const noexcept { return margin > 0.0; }
};

inline SeparationReport separation_check(const TrajectorySegment& traj, double T, double t_stop = std::numeric_limits<double>::infinity()) {
    const Potential& W = traj.model.potential;
    if (!W.bounded()) throw PreconditionError("separation_check: potential has unbounded I");
    SeparationReport rep;
    rep.r_lo = std::numeric_limits<double>::infinity();
    rep.r_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        if (t < T - 1e-12 || t > t_stop + 1e-12) continue;
        const double lo = traj.states[k].min(), hi = traj.states[k].max();
        rep.r_lo = std::min(rep.r_lo, lo);
        rep.r_hi = std::max(rep.r_hi, hi);
        const double m = std::min(W.margin(lo), W.margin(hi));
        if (!rep.margins.empty() && m < rep.margins.back()) rep.margin_nondecreasing = false;
        rep.times.push_back(t);
        rep.margins.push_back(m);
    }
    if (rep.times.empty()) throw InsufficientDataError("separation_check: no samples after T");
    rep.margin = std::min(W.margin(rep.r_lo), W.margin(rep.r_hi));
    return rep;
}

// ---------------------------------------------------------------------------
// energy-method identity F(z(tau+M)) = e^{-M} F(z(tau)) + int e^{s-tau-M} H(z(s)) ds

/// H(z) = -(alpha(z_t), B z_t + W''(z) z_t) - (alpha(z_t), Bz + W'(z)) / 2.
inline double energy_method_H(const Field& z, const Field& zt, const Model& model) {
    const Field a = zt.map([&](double r) { return model.alpha(r); });
    Field lin = apply_B(zt);
    std::vector<double> w2(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) w2[i] = model.potential.d2W(z[i]) * zt[i];
    lin += Field(z.grid(), std::move(w2));
    const Field op = apply_B(z) + model.dW(z);
    return -inner_H(a, lin) - 0.5 * inner_H(a, op);
}

struct EnergyIdentityReport {
    double lhs = 0.0;       // F(z(tau + M))
    double rhs = 0.0;       // e^{-M} F(z(tau)) + integral
    double residual = 0.0;  // |lhs - rhs|
    double F_start = 0.0;   // F(z(tau))
};

/**
 * Evaluates both sides of the identity on the recorded samples of [tau, tau + M]
 * (trapezoid in time, z_t taken as the stored backward difference). Requires
 * f = 0 and tau, tau + M on the recording grid. `drop_H` replaces H by 0.
 */
inline EnergyIdentityReport energy_method_identity(const TrajectorySegment& traj, double tau, double M,
                                                   bool drop_H = false) {
    for (double fi : traj.model.source.values()) {
        if (fi != 0.0) throw PreconditionError("energy_method_identity: requires f = 0");
    }
    if (!(tau > 0.0) || !(M > 0.0)) throw DomainError("energy_method_identity: tau and M must be positive");
    auto index_of = [&](double t) {
        const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t - 1e-9 * std::max(1.0, t));
        if (it == traj.times.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, t)) {
            throw InsufficientDataError("energy_method_identity: time not on the recording grid");
        }
        return static_cast<std::size_t>(it - traj.times.begin());
    };
    const std::size_t i0 = index_of(tau), i1 = index_of(tau + M);
    const Field& f = traj.model.source;
    const Potential& W = traj.model.potential;

    std::vector<double> ts, integrand;
    for (std::size_t k = i0; k <= i1; ++k) {
        const double s = traj.times[k];
        const double h = drop_H ? 0.0 : energy_method_H(traj.states[k], traj.velocities[k], traj.model);
        ts.push_back(s);
        integrand.push_back(std::exp(s - tau - M) * h);
    }
    EnergyIdentityReport rep;
    rep.F_start = energy_F(traj.states[i0], f, W);
    rep.lhs = energy_F(traj.states[i1], f, W);
    rep.rhs = std::exp(-M) * rep.F_start + trapezoid(ts, integrand);
    rep.residual = std::abs(rep.lhs - rep.rhs);
    return rep;
}

} // namespace dnl
