#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dnl/errors.hpp"
#include "dnl/tridiagonal.hpp"

namespace dnl {

enum class BoundaryCondition { Dirichlet, Neumann };

inline std::string to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::Dirichlet ? "dirichlet" : "neumann";
}

/**
 * Uniform 1-D mesh on [x_lo, x_hi].
 *
 * Dirichlet unknowns are the n interior nodes x_i = x_lo + (i+1)h with
 * h = L/(n+1); the boundary values are zero. Neumann unknowns are the n
 * cell centers x_i = x_lo + (i+1/2)h with h = L/n and ghost reflection.
 * In both cases the quadrature weight of every unknown is h.
 */
class Grid {
public:
    Grid(std::size_t n, double x_lo, double x_hi, BoundaryCondition bc)
        : n_(n), x_lo_(x_lo), x_hi_(x_hi), bc_(bc) {
        if (n < 2) {
            throw DomainError("Grid: need at least 2 unknowns");
        }
        if (!(x_lo < x_hi) || !std::isfinite(x_lo) || !std::isfinite(x_hi)) {
            throw DomainError("Grid: domain must satisfy x_lo < x_hi");
        }
        const double length = x_hi - x_lo;
        h_ = bc == BoundaryCondition::Dirichlet ? length / static_cast<double>(n + 1)
                                                : length / static_cast<double>(n);
    }

    std::size_t n() const noexcept { return n_; }
    double x_lo() const noexcept { return x_lo_; }
    double x_hi() const noexcept { return x_hi_; }
    double length() const noexcept { return x_hi_ - x_lo_; }
    double h() const noexcept { return h_; }
    BoundaryCondition bc() const noexcept { return bc_; }

    double x(std::size_t i) const noexcept {
        const double offset = bc_ == BoundaryCondition::Dirichlet ? 1.0 : 0.5;
        return x_lo_ + (static_cast<double>(i) + offset) * h_;
    }

    std::vector<double> nodes() const {
        std::vector<double> xs(n_);
        for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
        return xs;
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.n_ == b.n_ && a.x_lo_ == b.x_lo_ && a.x_hi_ == b.x_hi_ && a.bc_ == b.bc_;
    }

private:
    std::size_t n_;
    double x_lo_;
    double x_hi_;
    BoundaryCondition bc_;
    double h_;
};

/// Real values sampled at the unknowns of a Grid. Values are always finite.
class Field {
public:
    explicit Field(const Grid& grid) : grid_(grid), values_(grid.n(), 0.0) {}

    Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.n()) {
            throw DimensionError("Field: value count does not match grid size");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw DomainError("Field: non-finite value");
            }
        }
    }

    template <class F>
    static Field from_function(const Grid& grid, F&& fn) {
        std::vector<double> vals(grid.n());
        for (std::size_t i = 0; i < grid.n(); ++i) vals[i] = fn(grid.x(i));
        return Field(grid, std::move(vals));
    }

    static Field constant(const Grid& grid, double c) {
        return Field(grid, std::vector<double>(grid.n(), c));
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& vector() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    template <class F>
    Field map(F&& fn) const {
        std::vector<double> out(values_.size());
        std::transform(values_.begin(), values_.end(), out.begin(), fn);
        return Field(grid_, std::move(out));
    }

    Field& operator+=(const Field& o) {
        require_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        require_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }
    friend Field operator*(Field a, double s) { return a *= s; }
    friend Field operator-(Field a) { return a *= -1.0; }

    void require_same(const Field& o) const {
        if (!(grid_ == o.grid_)) {
            throw DimensionError("Field: operands live on different grids");
        }
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Bands of the symmetric tridiagonal matrix representing B on `grid`.
inline Tridiagonal b_operator_bands(const Grid& grid) {
    const std::size_t n = grid.n();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    Tridiagonal bands(n);
    for (std::size_t i = 0; i < n; ++i) {
        bands.diag[i] = 2.0 * inv_h2;
        if (i + 1 < n) {
            bands.lower[i] = -inv_h2;
            bands.upper[i] = -inv_h2;
        }
    }
    if (grid.bc() == BoundaryCondition::Neumann) {
        // ghost reflection removes one coupling at each end; B = Id - Laplacian
        bands.diag.front() = inv_h2;
        bands.diag.back() = inv_h2;
        for (double& d : bands.diag) d += 1.0;
    }
    return bands;
}

/// Discrete B: negative Laplacian (Dirichlet) or Id minus Laplacian (Neumann).
inline Field apply_B(const Grid& grid, const Field& u) {
    if (!(u.grid() == grid)) {
        throw DimensionError("apply_B: field does not live on the grid");
    }
    return Field(grid, b_operator_bands(grid).multiply(u.values()));
}

inline Field apply_B(const Field& u) { return apply_B(u.grid(), u); }

/// Discrete Laplacian with the grid's boundary treatment.
inline Field laplacian(const Field& u) {
    Field bu = apply_B(u);
    if (u.grid().bc() == BoundaryCondition::Neumann) {
        bu -= u;
    }
    return -bu;
}

inline double inner_H(const Field& u, const Field& v) {
    u.require_same(v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return u.grid().h() * s;
}

inline double norm_H(const Field& u) { return std::sqrt(inner_H(u, u)); }

/// Sum of squared difference quotients, h-weighted: the discrete |grad u|^2 integral.
inline double gradient_energy(const Field& u) {
    const Grid& g = u.grid();
    const double h = g.h();
    const std::size_t n = u.size();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = u[i + 1] - u[i];
        s += d * d;
    }
    if (g.bc() == BoundaryCondition::Dirichlet) {
        s += u[0] * u[0] + u[n - 1] * u[n - 1];
    }
    return s / h;
}

inline double norm_V(const Field& u) { return std::sqrt(inner_H(u, u) + gradient_energy(u)); }

inline double norm_Linf(const Field& u) {
    double m = 0.0;
    for (double v : u.values()) m = std::max(m, std::abs(v));
    return m;
}

inline double norm_Lp(const Field& u, double p) {
    if (!(p >= 1.0)) {
        throw DomainError("norm_Lp: p must be >= 1");
    }
    if (std::isinf(p)) return norm_Linf(u);
    // scale by the max to avoid overflow for large p
    const double m = norm_Linf(u);
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double v : u.values()) s += std::pow(std::abs(v) / m, p);
    return m * std::pow(u.grid().h() * s, 1.0 / p);
}

/// ||u||_V^2 plus the H-norm of the second differences.
inline double norm_H2(const Field& u) {
    const double lap = norm_H(laplacian(u));
    return std::sqrt(norm_V(u) * norm_V(u) + lap * lap);
}

} // namespace dnl
