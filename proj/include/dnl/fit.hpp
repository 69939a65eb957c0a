#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dnl/errors.hpp"

namespace dnl {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t count = 0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DimensionError("fit_line: length mismatch");
    if (x.size() < 2) throw InsufficientDataError("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw InsufficientDataError("fit_line: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.count = x.size();
    return f;
}

/// Trapezoid rule on a (possibly non-uniform) sample.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw DimensionError("trapezoid: length mismatch");
    double s = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (y[k] + y[k - 1]) * (t[k] - t[k - 1]);
    return s;
}

} // namespace dnl
