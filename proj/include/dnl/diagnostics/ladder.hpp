#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/nonlinearities.hpp"
#include "dnl/semiflow.hpp"

namespace dnl {

/**
 * Exponent/time schedule of the L^p bootstrap:
 * p_1 = 2, p_{j+1} = 7 p_j / 6 + 1, tau_j = eps / j^2, T_1 = 0, T_{j+1} = T_j + tau_j.
 * Index j is 1-based; vectors store entry j at position j - 1.
 */
struct LadderSchedule {
    static constexpr double growth = 7.0 / 6.0;

    int j_max = 0;
    double epsilon = 0.0;
    std::vector<double> p;
    std::vector<double> tau;
    std::vector<double> T;  // T_1 .. T_{j_max + 1}

    LadderSchedule(int jmax, double eps) : j_max(jmax), epsilon(eps) {
        if (jmax < 1) throw DomainError("LadderSchedule: j_max must be >= 1");
        if (!(eps > 0.0 && eps < 1.0)) throw DomainError("LadderSchedule: epsilon must lie in (0,1)");
        p.push_back(2.0);
        T.push_back(0.0);
        for (int j = 1; j <= jmax; ++j) {
            if (j > 1) p.push_back(growth * p.back() + 1.0);
            tau.push_back(eps / (static_cast<double>(j) * j));
            T.push_back(T.back() + tau.back());
        }
    }

    /// Closed form of the recurrence: p_j = 8 (7/6)^{j-1} - 6.
    static double closed_form(int j) { return 8.0 * std::pow(growth, j - 1) - 6.0; }

    double p_at(int j) const { return p.at(static_cast<std::size_t>(j - 1)); }
    double T_at(int j) const { return T.at(static_cast<std::size_t>(j - 1)); }
};

/// Adaptive Simpson quadrature on [a, b].
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-12, int max_depth = 40) {
    struct Rec {
        static double run(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                          int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double diff = left + right - whole;
            if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
            return run(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   run(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec::run(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// a_p(s) = integral_0^s alpha'(r) |r|^{p-2} r dr.
inline double a_p(const DissipationLaw& alpha, double p, double s) {
    if (!(p >= 2.0)) throw DomainError("a_p: p must be >= 2");
    if (s == 0.0) return 0.0;
    auto integrand = [&](double r) { return alpha.deriv(r) * std::pow(std::abs(r), p - 2.0) * r; };
    const double scale = std::max(1e-300, std::abs(alpha(s) * std::pow(std::abs(s), p - 1.0)));
    return adaptive_simpson(integrand, 0.0, s, 1e-13 * scale);
}

struct APBound {
    double s = 0.0;
    double lower = 0.0;  // sigma |s|^p / p
    double value = 0.0;  // a_p(s)
    double upper = 0.0;  // alpha(s) |s|^{p-2} s
    bool holds(double tol = 1e-9) const noexcept { return lower <= value + tol && value <= upper + tol; }
};

inline APBound a_p_bounds(const DissipationLaw& alpha, double p, double s) {
    APBound b;
    b.s = s;
    b.value = a_p(alpha, p, s);
    b.lower = alpha.sigma() * std::pow(std::abs(s), p) / p;
    b.upper = alpha(s) * std::pow(std::abs(s), p - 2.0) * s;
    return b;
}

struct LadderRung {
    int j = 0;
    double p = 0.0;
    double T_next = 0.0;    // T_{j+1}
    double sup_norm = 0.0;  // sup_{t >= T_{j+1}} ||u_t(t)||_{L^{p_j}}
    bool ap_bounds_hold = true;
};

struct LadderReport {
    std::vector<LadderRung> rungs;
    double linf_reference = 0.0;  // sup_{t >= T_2} ||u_t(t)||_inf
    double max_norm = 0.0;        // max over rungs of sup_norm
    bool ap_bounds_hold = true;
    int stabilization_index = 0;  // first j whose relative change to j+1 is within the threshold (0: none)
    bool nonincreasing_after_stabilization = false;  // false as well when the rungs never stabilize
};

namespace detail {

/// sup over t >= T of ||v(t)||_p, with v linearly interpolated in time between records.
inline double sup_norm_after(const TrajectorySegment& traj, double T, double p) {
    std::size_t k = 1;  // the initial velocity is not a backward difference; start at the first step
    while (k < traj.size() && traj.times[k] < T) ++k;
    double best = 0.0;
    if (k >= traj.size()) return best;
    if (k > 1 && traj.times[k] > T) {
        const double t0 = traj.times[k - 1], t1 = traj.times[k];
        const double w = (T - t0) / (t1 - t0);
        const Field vT = (1.0 - w) * traj.velocities[k - 1] + w * traj.velocities[k];
        best = norm_Lp(vT, p);
    }
    for (; k < traj.size(); ++k) best = std::max(best, norm_Lp(traj.velocities[k], p));
    return best;
}

} // namespace detail

/**
 * Evaluates the L^p ladder on a trajectory: per rung the sup-window norm of
 * u_t in L^{p_j} after T_{j+1}, the pointwise a_{p_j} sandwich on sample
 * points, and the stabilization pattern of the rung norms.
 */
inline LadderReport lp_ladder(const TrajectorySegment& traj, const LadderSchedule& schedule,
                              double stabilization_threshold = 0.05) {
    LadderReport rep;
    const DissipationLaw& alpha = traj.model.alpha;
    for (int j = 1; j <= schedule.j_max; ++j) {
        LadderRung rung;
        rung.j = j;
        rung.p = schedule.p_at(j);
        rung.T_next = schedule.T_at(j + 1);
        rung.sup_norm = detail::sup_norm_after(traj, rung.T_next, rung.p);
        for (int k = -10; k <= 10; ++k) {
            if (k == 0) continue;
            const double s = 0.25 * k;
            if (!a_p_bounds(alpha, rung.p, s).holds()) rung.ap_bounds_hold = false;
        }
        rep.ap_bounds_hold = rep.ap_bounds_hold && rung.ap_bounds_hold;
        rep.max_norm = std::max(rep.max_norm, rung.sup_norm);
        rep.rungs.push_back(rung);
    }
    rep.linf_reference = detail::sup_norm_after(traj, schedule.T_at(2), std::numeric_limits<double>::infinity());

    // stabilization: first rung whose norm moves by at most the threshold (relative) to the next one
    for (std::size_t i = 1; i < rep.rungs.size(); ++i) {
        const double prev = rep.rungs[i - 1].sup_norm, cur = rep.rungs[i].sup_norm;
        const double rel = prev > 0.0 ? (cur - prev) / prev : 0.0;
        if (std::abs(rel) <= stabilization_threshold) {
            rep.stabilization_index = rep.rungs[i - 1].j;
            break;
        }
    }
    rep.nonincreasing_after_stabilization = rep.stabilization_index != 0;
    for (std::size_t i = 1; i < rep.rungs.size() && rep.stabilization_index != 0; ++i) {
        if (rep.rungs[i - 1].j < rep.stabilization_index) continue;
        const double prev = rep.rungs[i - 1].sup_norm;
        if (rep.rungs[i].sup_norm > prev * (1.0 + 1e-12)) rep.nonincreasing_after_stabilization = false;
    }
    return rep;
}

} // namespace dnl
