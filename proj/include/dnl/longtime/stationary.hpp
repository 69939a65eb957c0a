#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/profiles.hpp"
#include "dnl/semiflow.hpp"

namespace dnl {

struct StationaryState {
    Field u_inf;
    double residual = 0.0;  // ||B u + W'(u) - f||_H
    int newton_iters = 0;
};

struct StationaryOptions {
    double tol = 1e-10;
    int max_iters = 200;
    double shrink = 0.5;
};

/**
 * Damped Newton on Bu + W'(u) = f starting from `guess`, with the same
 * interiority line search as the time stepper. The Jacobian B + W''(u)
 * may be indefinite; the Newton direction still decreases ||R||.
 */
inline StationaryState solve_stationary(const Field& f, const Field& guess, const Model& model,
                                        StationaryOptions opt = {}) {
    f.require_same(guess);
    if (!model.admissible(guess)) throw AdmissibilityError("solve_stationary: guess outside I");
    const Tridiagonal bands = b_operator_bands(model.grid);
    auto residual = [&](const Field& u) {
        std::vector<double> r = bands.multiply(u.values());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += model.potential.dW(u[i]) - f[i];
        return Field(u.grid(), std::move(r));
    };
    auto jacobian = [&](const Field& u) {
        Tridiagonal j = bands;
        for (std::size_t i = 0; i < u.size(); ++i) j.diag[i] += model.potential.d2W(u[i]);
        return j;
    };
    detail::NewtonOutcome out = detail::damped_newton(model, guess, residual, jacobian, opt.tol, opt.max_iters,
                                                      opt.shrink);
    if (!out.solution) {
        throw ConvergenceError("solve_stationary: Newton did not converge", out.residual);
    }
    const double res = norm_H(residual(*out.solution));
    return StationaryState{std::move(*out.solution), res, out.iters};
}

struct EnumerationOptions {
    int random_guesses = 50;
    int constant_guesses = 9;
    double dedup_distance = 1e-4;  // V-distance below which two states are the same
    std::uint64_t seed = 0;
    StationaryOptions newton{};
};

/**
 * Multi-start search for solutions of Bu + W'(u) = f: seeded random
 * Fourier guesses plus spatially constant guesses on an interior grid of I
 * ([-1.5, 1.5] where I is unbounded). Converged states are deduplicated
 * by V-distance.
 */
inline std::vector<StationaryState> enumerate_stationary(const Field& f, const Model& model,
                                                         EnumerationOptions opt = {}) {
    std::vector<Field> guesses;
    const double lo = std::isfinite(model.potential.lo()) ? model.potential.lo() : -1.5;
    const double hi = std::isfinite(model.potential.hi()) ? model.potential.hi() : 1.5;
    for (int k = 1; k <= opt.constant_guesses; ++k) {
        guesses.push_back(Field::constant(model.grid, lo + (hi - lo) * k / (opt.constant_guesses + 1)));
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> amp(0.1, 1.5);
    std::uniform_int_distribution<int> modes(1, 6);
    for (int k = 0; k < opt.random_guesses; ++k) {
        const double a = amp(rng);
        const int khi = modes(rng);
        Field g = profiles::random_fourier(model.grid, rng(), a, {1, khi, 1.0, 0.0});
        guesses.push_back(profiles::fit_into(g, model.potential));
    }

    std::vector<StationaryState> found;
    for (const Field& g : guesses) {
        try {
            StationaryState s = solve_stationary(f, g, model, opt.newton);
            bool duplicate = false;
            for (const auto& known : found) {
                if (norm_V(known.u_inf - s.u_inf) < opt.dedup_distance) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) found.push_back(std::move(s));
        } catch (const Error&) {
            // a guess that does not converge contributes nothing
        }
    }
    return found;
}

} // namespace dnl
