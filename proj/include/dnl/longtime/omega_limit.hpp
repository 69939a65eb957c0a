#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/longtime/stationary.hpp"
#include "dnl/semiflow.hpp"

namespace dnl {

struct OmegaLimitReport {
    StationaryState limit;
    double settle_velocity = 0.0;        // ||u_t(t_end)||_inf
    std::vector<double> times;
    std::vector<double> dist_V;          // ||u(t) - u_inf||_V
    std::vector<double> dist_inf;        // ||u(t) - u_inf||_inf
    double tail_start = 0.0;             // start of the final decade, t_end / 10
    bool tail_monotone = true;           // both distances nonincreasing on [tail_start, t_end]
    bool converged = false;              // final distances below the distance tolerance
};

struct OmegaLimitOptions {
    double settle_tol = 1e-6;     // ||u_t(t_end)||_inf must be below this
    double distance_tol = 1e-4;   // final distances must be below this
    StationaryOptions newton{};
};

/**
 * Polishes the last state of a settled run into a stationary state and
 * reports the approach u(t) -> u_inf. Needs an analytic potential; throws
 * InsufficientDataError when the run has not settled.
 */
inline OmegaLimitReport omega_limit(const TrajectorySegment& traj, OmegaLimitOptions opt = {}) {
    const Model& model = traj.model;
    if (!model.potential.analytic()) {
        throw PreconditionError("omega_limit: convergence to a single state needs an analytic potential");
    }
    if (traj.size() < 2) throw InsufficientDataError("omega_limit: trajectory too short");
    OmegaLimitReport rep{solve_stationary(model.source, traj.back(), model, opt.newton), 0.0, {}, {}, {}, 0.0, true, false};
    rep.settle_velocity = norm_Linf(traj.velocities.back());
    if (rep.settle_velocity > opt.settle_tol) {
        throw InsufficientDataError("omega_limit: run has not settled (||u_t||_inf = " +
                                    std::to_string(rep.settle_velocity) + ")");
    }
    const double t_end = traj.times.back();
    rep.tail_start = t_end / 10.0;
    double prev_v = std::numeric_limits<double>::infinity(), prev_i = prev_v;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Field d = traj.states[k] - rep.limit.u_inf;
        const double dv = norm_V(d), di = norm_Linf(d);
        rep.times.push_back(traj.times[k]);
        rep.dist_V.push_back(dv);
        rep.dist_inf.push_back(di);
        if (traj.times[k] >= rep.tail_start) {
            if (dv > prev_v + 1e-12 || di > prev_i + 1e-12) rep.tail_monotone = false;
            prev_v = dv;
            prev_i = di;
        }
    }
    rep.converged = rep.dist_V.back() <= opt.distance_tol && rep.dist_inf.back() <= opt.distance_tol;
    return rep;
}

} // namespace dnl
