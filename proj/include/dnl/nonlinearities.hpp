#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dnl/errors.hpp"

namespace dnl {

/**
 * Dissipation law alpha: C^1, alpha(0) = 0 and alpha' >= sigma > 0.
 *
 * The constructor checks alpha(0) = 0 and the slope floor on a sample of
 * [-20, 20]; laws violating either are rejected.
 */
class DissipationLaw {
public:
    using Fn = std::function<double(double)>;

    DissipationLaw(Fn eval, Fn deriv, double sigma, std::string label)
        : eval_(std::move(eval)), deriv_(std::move(deriv)), sigma_(sigma), label_(std::move(label)) {
        if (!(sigma_ > 0.0)) throw DomainError("DissipationLaw: sigma must be positive");
        if (std::abs(eval_(0.0)) > 1e-14) throw DomainError("DissipationLaw: alpha(0) != 0");
        for (int k = -400; k <= 400; ++k) {
            const double r = 0.05 * k;
            if (deriv_(r) < sigma_ * (1.0 - 1e-12)) {
                throw DomainError("DissipationLaw: alpha' below sigma at r = " + std::to_string(r));
            }
        }
    }

    double operator()(double r) const { return eval_(r); }
    double eval(double r) const { return eval_(r); }
    double deriv(double r) const { return deriv_(r); }
    double sigma() const noexcept { return sigma_; }
    const std::string& label() const noexcept { return label_; }

    /// alpha^{-1}(y) by bisection; alpha is onto since alpha' >= sigma.
    double inverse(double y, double tol = 1e-14) const {
        if (y == 0.0) return 0.0;
        // |alpha(r)| >= sigma |r| bounds the root by |y|/sigma
        double lo = y > 0.0 ? 0.0 : y / sigma_;
        double hi = y > 0.0 ? y / sigma_ : 0.0;
        for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (eval_(mid) < y) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    Fn eval_;
    Fn deriv_;
    double sigma_;
    std::string label_;
};

enum class DissipationKind { Linear, Cubic, Sinh };

struct DissipationParams {
    double sigma = 1.0;
    double a = 1.0;  // cubic coefficient
};

inline DissipationLaw make_dissipation(DissipationKind kind, DissipationParams p = {}) {
    if (!(p.sigma > 0.0)) throw DomainError("make_dissipation: sigma must be positive");
    const double s = p.sigma;
    switch (kind) {
    case DissipationKind::Linear:
        return DissipationLaw([s](double r) { return s * r; }, [s](double) { return s; }, s, "linear");
    case DissipationKind::Cubic: {
        if (!(p.a >= 0.0)) throw DomainError("make_dissipation: cubic coefficient must be >= 0");
        const double a = p.a;
        return DissipationLaw([s, a](double r) { return s * r + a * r * r * r; },
                              [s, a](double r) { return s + 3.0 * a * r * r; }, s, "cubic");
    }
    case DissipationKind::Sinh:
        return DissipationLaw([s](double r) { return s * std::sinh(r); },
                              [s](double r) { return s * std::cosh(r); }, s, "sinh");
    }
    throw DomainError("make_dissipation: unknown kind");
}

/**
 * Potential W on the open interval I = (lo, hi), 0 in I.
 *
 * Carries W, W', W'', the lambda-convexity constant (W'' >= -lambda), the
 * coercivity constant eta with W(r) >= eta r^2 / 2 after `shift` has been
 * added, and whether W is real analytic on I.
 */
class Potential {
public:
    using Fn = std::function<double(double)>;

    struct Spec {
        Fn eval;
        Fn dW;
        Fn d2W;
        double lambda = 0.0;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        double eta = 1.0;
        double shift = 0.0;
        bool analytic = true;
        std::string label;
    };

    explicit Potential(Spec s) : s_(std::move(s)) { validate(); }

    double operator()(double r) const { return s_.eval(r); }
    double eval(double r) const { return s_.eval(r); }
    double dW(double r) const { return s_.dW(r); }
    double d2W(double r) const { return s_.d2W(r); }
    double lambda() const noexcept { return s_.lambda; }
    double lo() const noexcept { return s_.lo; }
    double hi() const noexcept { return s_.hi; }
    double eta() const noexcept { return s_.eta; }
    double shift() const noexcept { return s_.shift; }
    bool analytic() const noexcept { return s_.analytic; }
    bool bounded() const noexcept { return std::isfinite(s_.lo) || std::isfinite(s_.hi); }
    const std::string& label() const noexcept { return s_.label; }
    const Spec& spec() const noexcept { return s_; }

    bool admissible(double r) const noexcept { return r > s_.lo && r < s_.hi; }

    /// Distance from r to the boundary of I (infinite for I = R).
    double margin(double r) const noexcept { return std::min(r - s_.lo, s_.hi - r); }

    /// Sample points strictly inside I, capped to [-cap, cap] for unbounded ends.
    std::vector<double> interior_samples(std::size_t count, double cap = 10.0, double inset = 1e-6) const {
        const double a = std::isfinite(s_.lo) ? s_.lo + inset : -cap;
        const double b = std::isfinite(s_.hi) ? s_.hi - inset : cap;
        std::vector<double> out(count);
        for (std::size_t k = 0; k < count; ++k) {
            out[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1);
        }
        return out;
    }

private:
    void validate() const {
        if (!(s_.lo < 0.0 && 0.0 < s_.hi)) throw DomainError("Potential: I must contain 0");
        if (!(s_.lambda >= 0.0)) throw DomainError("Potential: lambda must be >= 0");
        if (!(s_.eta > 0.0)) throw DomainError("Potential: eta must be positive");
        if (std::abs(s_.dW(0.0)) > 1e-12) throw DomainError("Potential: W'(0) != 0");
        for (double r : interior_samples(2001)) {
            if (s_.d2W(r) < -s_.lambda - 1e-9) {
                throw DomainError("Potential '" + s_.label + "': W'' < -lambda at r = " + std::to_string(r));
            }
            if (s_.eval(r) < 0.5 * s_.eta * r * r - 1e-12) {
                throw DomainError("Potential '" + s_.label + "': W < eta r^2/2 at r = " + std::to_string(r));
            }
        }
        // W' sign r must grow without bound towards finite endpoints
        if (std::isfinite(s_.hi) && s_.dW(s_.hi - 1e-12) < 10.0) {
            throw DomainError("Potential: W' does not blow up at sup I");
        }
        if (std::isfinite(s_.lo) && -s_.dW(s_.lo + 1e-12) < 10.0) {
            throw DomainError("Potential: W' does not blow up at inf I");
        }
    }

    Spec s_;
};

enum class PotentialKind { Quadratic, DoubleWell, Logarithmic };

struct PotentialParams {
    double theta = 0.0;                  // logarithmic: concave part -theta r^2 / 2
    double eta = 0.1;                    // coercivity target where it is not intrinsic
    std::optional<double> lambda{};      // optional override of the convexity constant
};

inline Potential make_potential(PotentialKind kind, PotentialParams p = {}) {
    Potential::Spec s;
    switch (kind) {
    case PotentialKind::Quadratic:
        s.eval = [](double r) { return 0.5 * r * r; };
        s.dW = [](double r) { return r; };
        s.d2W = [](double) { return 1.0; };
        s.lambda = 0.0;
        s.eta = 1.0;
        s.label = "quadratic";
        break;
    case PotentialKind::DoubleWell: {
        if (!(p.eta > 0.0 && p.eta < 1.0)) throw DomainError("make_potential: eta must lie in (0,1)");
        // min over s = r^2 of (1-s)^2/4 - eta s/2 is -(eta/2 + eta^2/4), attained at s = 1 + eta
        const double shift = 0.5 * p.eta + 0.25 * p.eta * p.eta;
        s.eval = [shift](double r) {
            const double q = 1.0 - r * r;
            return 0.25 * q * q + shift;
        };
        s.dW = [](double r) { return r * r * r - r; };
        s.d2W = [](double r) { return 3.0 * r * r - 1.0; };
        s.lambda = 1.0;
        s.eta = p.eta;
        s.shift = shift;
        s.label = "double_well";
        break;
    }
    case PotentialKind::Logarithmic: {
        if (!(p.theta >= 0.0) || !std::isfinite(p.theta)) throw DomainError("make_potential: theta must be >= 0");
        const double theta = p.theta;
        // the entropy part (1+r)ln(1+r)+(1-r)ln(1-r) dominates r^2 on (-1,1)
        double eta = 2.0 - theta;
        double shift = 0.0;
        if (theta >= 2.0) {
            if (!(p.eta > 0.0)) throw DomainError("make_potential: eta must be positive");
            eta = p.eta;
            shift = 0.5 * (theta + eta);
        } else if (theta > 1.9) {
            eta = std::min(eta, p.eta);
        }
        s.eval = [theta, shift](double r) {
            return (1.0 + r) * std::log1p(r) + (1.0 - r) * std::log1p(-r) - 0.5 * theta * r * r + shift;
        };
        s.dW = [theta](double r) { return std::log1p(r) - std::log1p(-r) - theta * r; };
        s.d2W = [theta](double r) { return 2.0 / (1.0 - r * r) - theta; };
        s.lambda = std::max(0.0, theta - 2.0);
        s.lo = -1.0;
        s.hi = 1.0;
        s.eta = eta;
        s.shift = shift;
        s.label = "logarithmic";
        break;
    }
    }
    if (p.lambda) {
        if (*p.lambda < s.lambda) throw DomainError("make_potential: lambda override below intrinsic value");
        s.lambda = *p.lambda;
    }
    return Potential(std::move(s));
}

/**
 * Bi-Lipschitz regularization of (alpha, W) at level n.
 *
 * alpha_n equals alpha on [-n, n] and continues with slope 1/n. W_n' equals
 * W' on the window [a_n, b_n] (distance 1/n from finite endpoints of I, or
 * +-n for infinite ones) and continues affinely with slope
 * max(W''(knot), 1/n). The tails are convex, so W_n stays coercive and
 * W_n' + 2 lambda id has slope at least 1/n. W_n is defined on all of R.
 */
struct RegularizedPair {
    DissipationLaw alpha;
    Potential W;
    int level;
    double window_lo;
    double window_hi;
    DissipationLaw alpha_n;
    Potential W_n;
};

inline RegularizedPair regularize(const DissipationLaw& alpha, const Potential& W, int n) {
    if (n < 1) throw DomainError("regularize: level must be >= 1");
    const double level = static_cast<double>(n);
    const double a = std::isfinite(W.lo()) ? W.lo() + 1.0 / level : -level;
    const double b = std::isfinite(W.hi()) ? W.hi() - 1.0 / level : level;
    if (!(a < 0.0 && 0.0 < b)) {
        throw DomainError("regularize: clamping window is empty at level " + std::to_string(n));
    }

    const double tail = 1.0 / level;
    auto alpha_n_eval = [alpha, level, tail](double r) {
        const double c = std::clamp(r, -level, level);
        return alpha(c) + tail * (r - c);
    };
    auto alpha_n_deriv = [alpha, level, tail](double r) {
        return std::abs(r) <= level ? alpha.deriv(r) : tail;
    };
    DissipationLaw alpha_n(alpha_n_eval, alpha_n_deriv, std::min(alpha.sigma(), tail),
                           alpha.label() + "_n" + std::to_string(n));

    const double lam = W.lambda();
    const double slope_floor = tail;
    const double slope_lo = std::max(W.d2W(a), slope_floor);
    const double slope_hi = std::max(W.d2W(b), slope_floor);
    const double Wa = W(a), Wb = W(b), dWa = W.dW(a), dWb = W.dW(b);

    Potential::Spec s;
    s.eval = [W, a, b, slope_lo, slope_hi, Wa, Wb, dWa, dWb](double r) {
        if (r < a) return Wa + dWa * (r - a) + 0.5 * slope_lo * (r - a) * (r - a);
        if (r > b) return Wb + dWb * (r - b) + 0.5 * slope_hi * (r - b) * (r - b);
        return W(r);
    };
    s.dW = [W, a, b, slope_lo, slope_hi, dWa, dWb](double r) {
        if (r < a) return dWa + slope_lo * (r - a);
        if (r > b) return dWb + slope_hi * (r - b);
        return W.dW(r);
    };
    s.d2W = [W, a, b, slope_lo, slope_hi](double r) {
        if (r < a) return slope_lo;
        if (r > b) return slope_hi;
        return W.d2W(r);
    };
    s.lambda = lam;
    s.shift = W.shift();
    s.analytic = false;
    s.label = W.label() + "_n" + std::to_string(n);

    // coercivity of W_n on the validation range; the tails may lower eta
    s.eta = W.eta();
    for (int k = -1000; k <= 1000; ++k) {
        const double r = 0.01 * k;
        if (k != 0) s.eta = std::min(s.eta, 2.0 * s.eval(r) / (r * r) * (1.0 - 1e-9));
    }
    if (!(s.eta > 0.0)) throw DomainError("regularize: W_n is not coercive");
    return RegularizedPair{alpha, W, n, a, b, std::move(alpha_n), Potential(std::move(s))};
}

} // namespace dnl
