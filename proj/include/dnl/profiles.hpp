#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "dnl/discretization.hpp"
#include "dnl/errors.hpp"
#include "dnl/nonlinearities.hpp"

namespace dnl::profiles {

inline Field zero(const Grid& g) { return Field(g); }

inline Field constant(const Grid& g, double c) { return Field::constant(g, c); }

/// amp * sin(k pi (x - x_lo) / L) for Dirichlet, amp * cos(k pi (x - x_lo) / L) for Neumann.
inline Field sine(const Grid& g, int k, double amp) {
    const double w = static_cast<double>(k) * std::numbers::pi / g.length();
    const bool dir = g.bc() == BoundaryCondition::Dirichlet;
    return Field::from_function(g, [&](double x) {
        const double s = w * (x - g.x_lo());
        return amp * (dir ? std::sin(s) : std::cos(s));
    });
}

struct FourierOptions {
    int k_lo = 1;
    int k_hi = 8;
    double decay = 1.0;          // coefficient envelope k^{-decay}
    double min_magnitude = 0.0;  // |c_k| k^{decay} drawn from U(min_magnitude, 1) with a random sign
};

/**
 * Seeded random Fourier sum over modes k_lo..k_hi (boundary-compatible
 * basis), rescaled so that max |u| = amp. Two draws per mode: sign, then magnitude.
 */
inline Field random_fourier(const Grid& g, std::uint64_t seed, double amp, FourierOptions opt = {}) {
    if (opt.k_lo < 0 || opt.k_hi < opt.k_lo) throw DomainError("random_fourier: bad mode range");
    if (g.bc() == BoundaryCondition::Dirichlet && opt.k_lo == 0) opt.k_lo = 1;
    std::mt19937_64 rng(seed);
    if (!(opt.min_magnitude >= 0.0 && opt.min_magnitude <= 1.0)) {
        throw DomainError("random_fourier: min_magnitude must lie in [0,1]");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> vals(g.n(), 0.0);
    for (int k = opt.k_lo; k <= opt.k_hi; ++k) {
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        const double mag = opt.min_magnitude + (1.0 - opt.min_magnitude) * unit(rng);
        const double c = sign * mag * std::pow(std::max(1, k), -opt.decay);
        const Field mode = sine(g, k, 1.0);
        for (std::size_t i = 0; i < g.n(); ++i) vals[i] += c * mode[i];
    }
    Field u(g, std::move(vals));
    const double m = norm_Linf(u);
    if (m == 0.0) return u;
    return (amp / m) * u;
}

/// Rescales u towards 0 so that it stays at least `margin` inside I.
inline Field fit_into(const Field& u, const Potential& W, double margin = 0.01) {
    double scale = 1.0;
    for (double v : u.values()) {
        if (v > 0.0 && std::isfinite(W.hi()) && v > W.hi() - margin) scale = std::min(scale, (W.hi() - margin) / v);
        if (v < 0.0 && std::isfinite(W.lo()) && v < W.lo() + margin) scale = std::min(scale, (W.lo() + margin) / v);
    }
    return scale * u;
}

} // namespace dnl::profiles
