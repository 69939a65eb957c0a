#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "dnl/errors.hpp"

namespace dnl {

struct GronwallReport {
    bool applicable = false;  // discrete y' <= a y + b held on every interval
    bool holds = false;       // conclusion verified at every sample t >= T + tau
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double bound = 0.0;       // (k2 + k3/tau) e^{k1}
    double worst_ratio = 0.0; // max y(t) / bound over the checked samples
    bool ok() const noexcept { return applicable && holds; }
};

namespace detail {

/// Trapezoid integral of a uniformly sampled series over [t, t+1] via prefix sums.
class WindowIntegrator {
public:
    WindowIntegrator(const std::vector<double>& t, const std::vector<double>& s) : t_(t), prefix_(t.size(), 0.0) {
        for (std::size_t k = 1; k < t.size(); ++k) {
            prefix_[k] = prefix_[k - 1] + 0.5 * (s[k] + s[k - 1]) * (t[k] - t[k - 1]);
        }
    }
    double integral(std::size_t from, std::size_t to) const { return prefix_[to] - prefix_[from]; }

private:
    const std::vector<double>& t_;
    std::vector<double> prefix_;
};

} // namespace detail

/**
 * Uniform Gronwall lemma on sampled series.
 *
 * Hypothesis: y' <= a y + b, checked per interval with trapezoid averages
 * and a relative tolerance. k1, k2, k3 are the sup over t >= T (with
 * t + 1 inside the samples) of the unit-window integrals of a, b, y; the
 * conclusion y(t + tau) <= (k2 + k3/tau) e^{k1} is checked at every sample
 * t + tau with t >= T. Sampling must be uniform with 1/dt an integer.
 */
inline GronwallReport uniform_gronwall_check(const std::vector<double>& t, const std::vector<double>& y,
                                             const std::vector<double>& a, const std::vector<double>& b,
                                             double T, double tau) {
    if (t.size() != y.size() || t.size() != a.size() || t.size() != b.size()) {
        throw DimensionError("uniform_gronwall_check: series lengths differ");
    }
    if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("uniform_gronwall_check: tau must lie in (0,1]");
    if (t.size() < 3) throw InsufficientDataError("uniform_gronwall_check: too few samples");
    const double dt = t[1] - t[0];
    const auto window = static_cast<std::size_t>(std::llround(1.0 / dt));
    if (std::abs(window * dt - 1.0) > 1e-9 || t.back() - T < 1.0) {
        throw InsufficientDataError("uniform_gronwall_check: need a unit window after T on a uniform grid");
    }

    GronwallReport rep;
    rep.applicable = true;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const double slope = (y[k + 1] - y[k]) / (t[k + 1] - t[k]);
        const double rhs = 0.5 * (a[k] * y[k] + a[k + 1] * y[k + 1]) + 0.5 * (b[k] + b[k + 1]);
        const double scale = std::max({1.0, std::abs(slope), std::abs(rhs)});
        // second-order consistency error of the trapezoid comparison
        if (slope > rhs + 1e-6 * scale) {
            rep.applicable = false;
            break;
        }
    }

    detail::WindowIntegrator ia(t, a), ib(t, b), iy(t, y);
    std::size_t first = 0;
    while (first < t.size() && t[first] < T - 1e-12) ++first;
    for (std::size_t k = first; k + window < t.size(); ++k) {
        rep.k1 = std::max(rep.k1, ia.integral(k, k + window));
        rep.k2 = std::max(rep.k2, ib.integral(k, k + window));
        rep.k3 = std::max(rep.k3, iy.integral(k, k + window));
    }
    rep.bound = (rep.k2 + rep.k3 / tau) * std::exp(rep.k1);

    rep.holds = true;
    for (std::size_t k = first; k < t.size(); ++k) {
        if (t[k] < T + tau - 1e-12) continue;
        const double ratio = rep.bound > 0.0 ? y[k] / rep.bound : (y[k] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
        if (y[k] > rep.bound * (1.0 + 1e-12)) rep.holds = false;
    }
    return rep;
}

} // namespace dnl
