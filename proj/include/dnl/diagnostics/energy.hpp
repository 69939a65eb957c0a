#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/nonlinearities.hpp"
#include "dnl/semiflow.hpp"

namespace dnl {

namespace detail {
inline void require_admissible(const Field& u, const Potential& W, const char* who) {
    for (double v : u.values()) {
        if (!W.admissible(v)) throw AdmissibilityError(std::string(who) + ": state outside I");
    }
}
} // namespace detail

/**
 * Discrete energy: integral of |grad u|^2/2 + W(u) - f u.
 *
 * For Neumann grids the identity part of B = Id - Laplacian is folded into
 * the potential term (W(u) + u^2/2), so that the gradient of E is exactly
 * Bu + W'(u) - f in both cases.
 */
inline double energy_E(const Field& u, const Field& f, const Potential& W) {
    u.require_same(f);
    detail::require_admissible(u, W, "energy_E");
    const bool neumann = u.grid().bc() == BoundaryCondition::Neumann;
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        s += W(u[i]) - f[i] * u[i];
        if (neumann) s += 0.5 * u[i] * u[i];
    }
    return 0.5 * gradient_energy(u) + u.grid().h() * s;
}

/// F(u) = ||Bu + W'(u)||^2 / 2 - (f, Bu + W'(u)).
inline double energy_F(const Field& u, const Field& f, const Potential& W) {
    u.require_same(f);
    detail::require_admissible(u, W, "energy_F");
    Field a = apply_B(u) + u.map([&](double r) { return W.dW(r); });
    return 0.5 * inner_H(a, a) - inner_H(f, a);
}

/// G = lambda E + F.
inline double energy_G(const Field& u, const Field& f, const Potential& W) {
    return W.lambda() * energy_E(u, f, W) + energy_F(u, f, W);
}

inline Field shifted_dW(const Field& u, const Potential& W) {
    const double lam = W.lambda();
    return u.map([&](double r) { return W.dW(r) + lam * r; });
}

/// d_2(u, v)^2 = ||u-v||^2 + ||Bu-Bv||^2 + ||(W'+lambda)(u) - (W'+lambda)(v)||^2.
inline double distance_d2(const Field& u, const Field& v, const Potential& W) {
    const Field du = u - v;
    const Field dB = apply_B(du);
    const Field dw = shifted_dW(u, W) - shifted_dW(v, W);
    return std::sqrt(inner_H(du, du) + inner_H(dB, dB) + inner_H(dw, dw));
}

/// Same structure as d_2 with sup norms.
inline double distance_dinf(const Field& u, const Field& v, const Potential& W) {
    const Field du = u - v;
    const double a = norm_Linf(du);
    const double b = norm_Linf(apply_B(du));
    const double c = norm_Linf(shifted_dW(u, W) - shifted_dW(v, W));
    return std::sqrt(a * a + b * b + c * c);
}

inline double distance_d2_to_zero(const Field& u, const Potential& W) {
    return distance_d2(u, Field(u.grid()), W);
}

inline double distance_dinf_to_zero(const Field& u, const Potential& W) {
    return distance_dinf(u, Field(u.grid()), W);
}

/// (alpha(v), v) in H.
inline double dissipation(const Field& v, const DissipationLaw& alpha) {
    return inner_H(v.map([&](double r) { return alpha(r); }), v);
}

struct EnergyReport {
    double t = 0.0;
    double E = 0.0;
    double F = 0.0;
    double G = 0.0;
    double d2_to_zero = 0.0;
    double dinf_to_zero = 0.0;
    double ut_Linf = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    double dissipation = 0.0;
};

inline EnergyReport energy_report(double t, const Field& u, const Field& v, const Model& model) {
    EnergyReport r;
    r.t = t;
    r.E = energy_E(u, model.source, model.potential);
    r.F = energy_F(u, model.source, model.potential);
    r.G = model.potential.lambda() * r.E + r.F;
    r.d2_to_zero = distance_d2_to_zero(u, model.potential);
    r.dinf_to_zero = distance_dinf_to_zero(u, model.potential);
    r.ut_Linf = norm_Linf(v);
    r.u_min = u.min();
    r.u_max = u.max();
    r.dissipation = dissipation(v, model.alpha);
    return r;
}

inline std::vector<EnergyReport> energy_history(const TrajectorySegment& traj) {
    std::vector<EnergyReport> out;
    out.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out.push_back(energy_report(traj.times[k], traj.states[k], traj.velocities[k], traj.model));
    }
    return out;
}

/// Outcome of the Liapounov test G(t_{k+1}) <= G(t_k) + tol along a run.
struct LiapunovReport {
    std::size_t steps = 0;
    std::size_t violations = 0;
    double worst_increase = 0.0;   // max over k of G(t_{k+1}) - G(t_k), may be negative
    std::size_t worst_index = 0;
    double tolerance_constant = 0.0;
    bool ok() const noexcept { return violations == 0; }
};

/// Relative rounding allowance of one evaluation of G.
inline double g_rounding_floor(double g_prev, double g_next) {
    return 1e-13 * std::max({1.0, std::abs(g_prev), std::abs(g_next)});
}

/**
 * Checks G(t_{k+1}) <= G(t_k) + c dt^2 at every consecutive recorded pair.
 * An increase is only counted above the rounding floor of G itself.
 */
inline LiapunovReport liapunov_check(const std::vector<double>& G, double dt, double c) {
    LiapunovReport rep;
    rep.tolerance_constant = c;
    rep.worst_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < G.size(); ++k) {
        const double inc = G[k + 1] - G[k];
        ++rep.steps;
        if (inc > rep.worst_increase) {
            rep.worst_increase = inc;
            rep.worst_index = k;
        }
        if (inc > c * dt * dt + g_rounding_floor(G[k], G[k + 1])) ++rep.violations;
    }
    if (rep.steps == 0) rep.worst_increase = 0.0;
    return rep;
}

inline std::vector<double> g_series(const TrajectorySegment& traj) {
    std::vector<double> G(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        G[k] = energy_G(traj.states[k], traj.model.source, traj.model.potential);
    }
    return G;
}

inline LiapunovReport liapunov_check(const TrajectorySegment& traj, double c = 0.0) {
    return liapunov_check(g_series(traj), traj.dt, c);
}

/// Smallest c with zero violations on the given series (the calibration step).
inline double fit_liapunov_constant(const std::vector<double>& G, double dt) {
    double c = 0.0;
    for (std::size_t k = 0; k + 1 < G.size(); ++k) {
        const double excess = G[k + 1] - G[k] - g_rounding_floor(G[k], G[k + 1]);
        c = std::max(c, excess / (dt * dt));
    }
    return c;
}

/**
 * Constants of eta1 d2^2 - eta2 <= G <= eta3 (d2^2 + 1), fitted on a
 * sample family. eta3 is the smallest admissible upper constant, eta1 a
 * quarter of the smallest ratio G/d2^2 over samples with d2 >= 1 (or of
 * eta3 when no such sample exists), eta2 the smallest offset making the
 * lower bound hold on the sample.
 */
struct SandwichConstants {
    double eta1 = 0.0;
    double eta2 = 0.0;
    double eta3 = 0.0;
};

struct SandwichResult {
    double lower = 0.0;
    double G = 0.0;
    double upper = 0.0;
    double d2_squared = 0.0;
    bool holds() const noexcept { return lower <= G && G <= upper; }
};

inline SandwichConstants fit_sandwich(const std::vector<Field>& samples, const Model& model) {
    if (samples.empty()) throw InsufficientDataError("fit_sandwich: no samples");
    SandwichConstants c;
    std::vector<double> g(samples.size()), d(samples.size());
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        g[k] = energy_G(samples[k], model.source, model.potential);
        const double dd = distance_d2_to_zero(samples[k], model.potential);
        d[k] = dd * dd;
        c.eta3 = std::max(c.eta3, g[k] / (d[k] + 1.0));
        if (d[k] >= 1.0) min_ratio = std::min(min_ratio, g[k] / d[k]);
    }
    c.eta3 = std::max(c.eta3, 1e-12);
    c.eta1 = 0.25 * (std::isfinite(min_ratio) && min_ratio > 0.0 ? min_ratio : c.eta3);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        c.eta2 = std::max(c.eta2, c.eta1 * d[k] - g[k]);
    }
    return c;
}

inline SandwichResult liapunov_sandwich(const Field& u, const Model& model, const SandwichConstants& c) {
    SandwichResult r;
    r.G = energy_G(u, model.source, model.potential);
    const double d = distance_d2_to_zero(u, model.potential);
    r.d2_squared = d * d;
    r.lower = c.eta1 * r.d2_squared - c.eta2;
    r.upper = c.eta3 * (r.d2_squared + 1.0);
    return r;
}

} // namespace dnl
