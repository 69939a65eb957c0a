#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dnl/errors.hpp"

namespace dnl {

/// Tridiagonal matrix in band storage; lower[i] = A(i+1,i), upper[i] = A(i,i+1).
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit Tridiagonal(std::size_t n) : lower(n > 0 ? n - 1 : 0), diag(n), upper(n > 0 ? n - 1 : 0) {}

    std::size_t size() const noexcept { return diag.size(); }

    std::vector<double> multiply(std::span<const double> x) const {
        const std::size_t n = size();
        if (x.size() != n) throw DimensionError("Tridiagonal::multiply: size mismatch");
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += lower[i - 1] * x[i - 1];
            if (i + 1 < n) s += upper[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }

    /// Thomas algorithm; no pivoting.
    std::vector<double> solve(std::span<const double> rhs) const {
        const std::size_t n = size();
        if (rhs.size() != n) throw DimensionError("Tridiagonal::solve: size mismatch");
        std::vector<double> c(n), d(n);
        double piv = diag[0];
        if (piv == 0.0 || !std::isfinite(piv)) throw DomainError("Tridiagonal::solve: zero pivot");
        c[0] = n > 1 ? upper[0] / piv : 0.0;
        d[0] = rhs[0] / piv;
        for (std::size_t i = 1; i < n; ++i) {
            piv = diag[i] - lower[i - 1] * c[i - 1];
            if (piv == 0.0 || !std::isfinite(piv)) throw DomainError("Tridiagonal::solve: zero pivot");
            c[i] = i + 1 < n ? upper[i] / piv : 0.0;
            d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
        }
        for (std::size_t i = n - 1; i-- > 0;) {
            d[i] -= c[i] * d[i + 1];
        }
        return d;
    }
};

} // namespace dnl
