#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/nonlinearities.hpp"

namespace dnl {

/// Everything that defines alpha(u_t) + Bu + W'(u) = f on a grid.
struct Model {
    Grid grid;
    DissipationLaw alpha;
    Potential potential;
    Field source;

    Model(Grid g, DissipationLaw a, Potential w, Field f)
        : grid(std::move(g)), alpha(std::move(a)), potential(std::move(w)), source(std::move(f)) {
        if (!(source.grid() == grid)) throw DimensionError("Model: source lives on another grid");
    }

    Model(Grid g, DissipationLaw a, Potential w, double f_const = 0.0)
        : Model(g, std::move(a), std::move(w), Field::constant(g, f_const)) {}

    /// Problem (P_n): alpha and W replaced by their level-n regularizations.
    Model regularized(int level) const {
        RegularizedPair pair = regularize(alpha, potential, level);
        return Model(grid, pair.alpha_n, pair.W_n, source);
    }

    bool admissible(const Field& u) const {
        for (double v : u.values()) {
            if (!potential.admissible(v)) return false;
        }
        return true;
    }

    Field dW(const Field& u) const {
        return u.map([this](double r) { return potential.dW(r); });
    }

    /// Bu + W'(u) - f.
    Field stationary_residual(const Field& u) const { return apply_B(u) + dW(u) - source; }
};

struct StepperConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    double newton_tol = 1e-10;
    int newton_max_iters = 50;
    double line_search_shrink = 0.5;
    std::optional<int> regularization_level{};
    int record_every = 1;

    /// Checks tolerances and the monotonicity safeguard dt < sigma / (2 lambda).
    void validate(const Model& model) const {
        if (!(dt > 0.0) || !(t_end >= 0.0)) throw DomainError("StepperConfig: dt, t_end must be positive");
        if (!(newton_tol > 0.0) || newton_max_iters < 1) throw DomainError("StepperConfig: bad Newton settings");
        if (!(line_search_shrink > 0.0 && line_search_shrink < 1.0)) {
            throw DomainError("StepperConfig: line_search_shrink must lie in (0,1)");
        }
        if (record_every < 1) throw DomainError("StepperConfig: record_every must be >= 1");
        const double lam = model.potential.lambda();
        if (lam > 0.0 && !(dt < model.alpha.sigma() / (2.0 * lam))) {
            throw DomainError("StepperConfig: dt must be below sigma/(2 lambda) = " +
                              std::to_string(model.alpha.sigma() / (2.0 * lam)));
        }
    }
};

struct StepReport {
    int newton_iters = 0;
    double residual = 0.0;
    bool retried = false;  // the step was redone as two half steps
};

/// A step whose Newton solve failed even after the half-step retry.
class StepFailure : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

namespace detail {

struct NewtonOutcome {
    std::optional<Field> solution;
    int iters = 0;
    double residual = 0.0;
    bool admissibility_failure = false;
};

/**
 * Damped Newton for R(w) = 0 with a tridiagonal Jacobian.
 *
 * `residual(w)` and `jacobian(w)` are only called on admissible iterates.
 * The line search backtracks until the trial point is admissible and the
 * H-norm of the residual decreases.
 */
template <class ResidualFn, class JacobianFn>
NewtonOutcome damped_newton(const Model& model, Field w, ResidualFn&& residual, JacobianFn&& jacobian,
                            double tol, int max_iters, double shrink) {
    NewtonOutcome out;
    Field r = residual(w);
    double rnorm = norm_H(r);
    for (int it = 0; it <= max_iters; ++it) {
        out.iters = it;
        out.residual = rnorm;
        if (rnorm <= tol) {
            out.solution = std::move(w);
            return out;
        }
        if (it == max_iters) break;
        Tridiagonal jac = jacobian(w);
        std::vector<double> rhs(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
        std::vector<double> delta;
        try {
            delta = jac.solve(rhs);
        } catch (const DomainError&) {
            return out;
        }
        bool accepted = false;
        bool ever_admissible = false;
        double step = 1.0;
        for (int ls = 0; ls < 60; ++ls, step *= shrink) {
            std::vector<double> trial(w.size());
            bool inside = true;
            for (std::size_t i = 0; i < w.size(); ++i) {
                trial[i] = w[i] + step * delta[i];
                if (!model.potential.admissible(trial[i]) || !std::isfinite(trial[i])) inside = false;
            }
            if (!inside) continue;
            ever_admissible = true;
            Field wt(w.grid(), std::move(trial));
            Field rt = residual(wt);
            const double rt_norm = norm_H(rt);
            if (rt_norm < rnorm) {
                w = std::move(wt);
                r = std::move(rt);
                rnorm = rt_norm;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // stagnation at rounding level counts as convergence
            double dmax = 0.0;
            for (double d : delta) dmax = std::max(dmax, std::abs(d));
            if (ever_admissible && dmax <= 1e-13 * std::max(1.0, norm_Linf(w))) {
                out.solution = std::move(w);
                return out;
            }
            out.admissibility_failure = !ever_admissible;
            return out;
        }
    }
    return out;
}

inline NewtonOutcome implicit_euler_solve(const Field& u_prev, double tau, const Model& model,
                                          const StepperConfig& cfg) {
    const Tridiagonal bands = b_operator_bands(model.grid);
    auto residual = [&](const Field& w) {
        const std::size_t n = w.size();
        std::vector<double> bw = bands.multiply(w.values());
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = (w[i] - u_prev[i]) / tau;
            r[i] = model.alpha(v) + bw[i] + model.potential.dW(w[i]) - model.source[i];
        }
        return Field(w.grid(), std::move(r));
    };
    auto jacobian = [&](const Field& w) {
        Tridiagonal j = bands;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double v = (w[i] - u_prev[i]) / tau;
            j.diag[i] += model.alpha.deriv(v) / tau + model.potential.d2W(w[i]);
        }
        return j;
    };
    return damped_newton(model, u_prev, residual, jacobian, cfg.newton_tol, cfg.newton_max_iters,
                         cfg.line_search_shrink);
}

} // namespace detail

/**
 * One backward-Euler step: returns w with
 * alpha((w - u_prev)/dt) + Bw + W'(w) = f up to cfg.newton_tol in H.
 *
 * On Newton failure the step is retried once as two steps of dt/2.
 */
inline std::pair<Field, StepReport> step(const Field& u_prev, const StepperConfig& cfg, const Model& model) {
    if (!(u_prev.grid() == model.grid)) throw DimensionError("step: state lives on another grid");
    if (!model.admissible(u_prev)) throw AdmissibilityError("step: previous state outside I");

    detail::NewtonOutcome full = detail::implicit_euler_solve(u_prev, cfg.dt, model, cfg);
    if (full.solution) {
        return {std::move(*full.solution), StepReport{full.iters, full.residual, false}};
    }
    detail::NewtonOutcome first = detail::implicit_euler_solve(u_prev, 0.5 * cfg.dt, model, cfg);
    if (first.solution) {
        detail::NewtonOutcome second = detail::implicit_euler_solve(*first.solution, 0.5 * cfg.dt, model, cfg);
        if (second.solution) {
            return {std::move(*second.solution),
                    StepReport{first.iters + second.iters, second.residual, true}};
        }
        full = std::move(second);
    } else {
        full = std::move(first);
    }
    if (full.admissibility_failure) {
        throw AdmissibilityError("step: line search could not keep the iterate inside I");
    }
    throw StepFailure("step: Newton did not converge (residual " + std::to_string(full.residual) + ")",
                      full.residual);
}

/**
 * Discrete l-trajectory: recorded states with the backward-difference
 * velocity of the step that produced them.
 *
 * The velocity stored at the initial time is alpha^{-1}(f - Bu0 - W'(u0)),
 * the value the equation prescribes for u_t(0).
 */
struct TrajectorySegment {
    Model model;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Field> states;
    std::vector<Field> velocities;
    std::vector<int> newton_iters;
    std::optional<std::string> failure{};

    std::size_t size() const noexcept { return times.size(); }
    bool ok() const noexcept { return !failure.has_value(); }
    const Field& back() const { return states.back(); }
};

inline Field initial_velocity(const Field& u0, const Model& model) {
    // alpha(u_t) = f - Bu0 - W'(u0)
    return (-model.stationary_residual(u0)).map([&](double y) { return model.alpha.inverse(y); });
}

/// Continues `seg` in place from its last state up to absolute time t_stop.
inline void extend_trajectory(TrajectorySegment& seg, double t_stop, const StepperConfig& cfg) {
    const double t0 = seg.times.back();
    const auto steps = static_cast<long long>(std::llround((t_stop - t0) / cfg.dt));
    Field u = seg.states.back();
    const long long base_index = static_cast<long long>(std::llround(t0 / cfg.dt));
    for (long long k = 1; k <= steps; ++k) {
        const long long global = base_index + k;
        try {
            auto [next, report] = step(u, cfg, seg.model);
            Field v = (1.0 / cfg.dt) * (next - u);
            u = std::move(next);
            if (global % cfg.record_every == 0 || k == steps) {
                seg.times.push_back(static_cast<double>(global) * cfg.dt);
                seg.states.push_back(u);
                seg.velocities.push_back(std::move(v));
                seg.newton_iters.push_back(report.newton_iters);
            }
        } catch (const Error& e) {
            seg.failure = "t = " + std::to_string(static_cast<double>(global) * cfg.dt) + ": " + e.what();
            return;
        }
    }
}

/**
 * Integrates from u0 over [0, cfg.t_end] with step cfg.dt.
 *
 * With cfg.regularization_level set, alpha and W' are replaced by their
 * regularizations; u0 itself is used as given. A failing step ends the run
 * and the partial trajectory is returned with `failure` set.
 */
inline TrajectorySegment solve_trajectory(const Field& u0, const StepperConfig& cfg, const Model& base_model) {
    Model model = cfg.regularization_level ? base_model.regularized(*cfg.regularization_level) : base_model;
    cfg.validate(model);
    if (!(u0.grid() == model.grid)) throw DimensionError("solve_trajectory: u0 lives on another grid");
    if (!model.admissible(u0)) throw AdmissibilityError("solve_trajectory: u0 outside I");

    TrajectorySegment seg{model, cfg.dt, {}, {}, {}, {}, std::nullopt};
    seg.times.push_back(0.0);
    seg.states.push_back(u0);
    seg.velocities.push_back(initial_velocity(u0, model));
    seg.newton_iters.push_back(0);
    extend_trajectory(seg, cfg.t_end, cfg);
    return seg;
}

/**
 * Reference solution of alpha(u') + u + W'(u) = f for spatially constant
 * Neumann data, by classical RK4 on u' = alpha^{-1}(f - u - W'(u)) with
 * `substeps` stages per stepper interval. Returns samples at k * cfg.dt.
 */
inline std::vector<double> ode_oracle(double u0, const StepperConfig& cfg, const Model& model,
                                      int substeps = 20) {
    if (model.grid.bc() != BoundaryCondition::Neumann) {
        throw PreconditionError("ode_oracle: needs a Neumann model");
    }
    const double f = model.source[0];
    for (double fi : model.source.values()) {
        if (fi != f) throw PreconditionError("ode_oracle: source must be spatially constant");
    }
    auto rhs = [&](double u) { return model.alpha.inverse(f - u - model.potential.dW(u)); };
    const auto steps = static_cast<long long>(std::llround(cfg.t_end / cfg.dt));
    const double hs = cfg.dt / substeps;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    double u = u0;
    out.push_back(u);
    for (long long k = 0; k < steps; ++k) {
        for (int s = 0; s < substeps; ++s) {
            const double k1 = rhs(u);
            const double k2 = rhs(u + 0.5 * hs * k1);
            const double k3 = rhs(u + 0.5 * hs * k2);
            const double k4 = rhs(u + hs * k3);
            u += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push_back(u);
    }
    return out;
}

} // namespace dnl
