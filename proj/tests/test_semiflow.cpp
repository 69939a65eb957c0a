#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "dnl/diagnostics/energy.hpp"
#include "dnl/longtime/stationary.hpp"
#include "dnl/profiles.hpp"
#include "dnl/semiflow.hpp"

using namespace dnl;

namespace {

// Dense B from the stencil definition (ghost reflection for Neumann).
Eigen::MatrixXd dense_B(const Grid& g) {
    const auto n = static_cast<Eigen::Index>(g.n());
    const double h2 = g.h() * g.h();
    const bool neumann = g.bc() == BoundaryCondition::Neumann;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = 2.0 / h2 + (neumann ? 1.0 : 0.0);
        if (i > 0) m(i, i - 1) = -1.0 / h2;
        else if (neumann) m(i, i) -= 1.0 / h2;
        if (i + 1 < n) m(i, i + 1) = -1.0 / h2;
        else if (neumann) m(i, i) -= 1.0 / h2;
    }
    return m;
}

/// Bisection root of a strictly increasing scalar function.
template <class F>
double scalar_root(F&& g, double lo, double hi) {
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Model model_of(const Grid& g, DissipationKind a, PotentialKind w, double f = 0.0) {
    return Model(g, make_dissipation(a), make_potential(w), f);
}

const Grid dir63(63, 0.0, 1.0, BoundaryCondition::Dirichlet);
const Grid neu32(32, 0.0, 1.0, BoundaryCondition::Neumann);

} // namespace

TEST(Step, StationaryStateIsFixedPoint) {
    const Grid g(63, 0.0, 10.0, BoundaryCondition::Dirichlet);
    const Model m = model_of(g, DissipationKind::Cubic, PotentialKind::DoubleWell);
    const StationaryState s = solve_stationary(m.source, profiles::sine(g, 1, 0.8), m);
    ASSERT_GT(s.u_inf.max(), 0.5);  // the nontrivial branch, not 0
    StepperConfig cfg;
    const auto [w, rep] = step(s.u_inf, cfg, m);
    EXPECT_LE(norm_V(w - s.u_inf), 1e-10);
    const auto [z, rz] = step(Field(g), cfg, m);
    EXPECT_EQ(norm_Linf(z), 0.0);
    EXPECT_EQ(rz.newton_iters, 0);
}

TEST(Step, NeumannConstantMatchesScalarSolve) {
    const double u = 0.3;
    for (auto a : {DissipationKind::Linear, DissipationKind::Cubic, DissipationKind::Sinh}) {
        const Model m = model_of(neu32, a, PotentialKind::Quadratic);
        StepperConfig cfg;
        cfg.newton_tol = 1e-13;
        const double tau = cfg.dt;
        // alpha(v) + (u + tau v) + (u + tau v) = 0: B acts as the identity on constants
        const double v = scalar_root([&](double v) { return m.alpha(v) + 2.0 * (u + tau * v); }, -10.0, 10.0);
        const auto [w, rep] = step(Field::constant(neu32, u), cfg, m);
        for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], u + tau * v, 1e-12) << m.alpha.label();
    }
}

TEST(Step, LinearDirichletMatchesDenseSolve) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::Quadratic);
    StepperConfig cfg;
    cfg.dt = 0.01;
    cfg.newton_tol = 1e-13;
    const Field u = profiles::random_fourier(dir63, 4, 0.7, {1, 20, 0.5, 0.0});
    const auto n = static_cast<Eigen::Index>(dir63.n());
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) / cfg.dt + dense_B(dir63) + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs(i) = u[static_cast<std::size_t>(i)] / cfg.dt;
    const Eigen::VectorXd w_ref = A.fullPivLu().solve(rhs);
    const auto [w, rep] = step(u, cfg, m);
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(w[static_cast<std::size_t>(i)], w_ref(i), 1e-12);
}

TEST(Step, RejectsBadInput) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::Logarithmic);
    StepperConfig cfg;
    EXPECT_THROW(step(Field::constant(dir63, 1.2), cfg, m), AdmissibilityError);
    EXPECT_THROW(step(Field(neu32), cfg, m), DimensionError);
    const Model dw = model_of(dir63, DissipationKind::Linear, PotentialKind::DoubleWell);
    cfg.dt = 0.5;  // sigma / (2 lambda) = 0.5
    EXPECT_THROW(cfg.validate(dw), DomainError);
    EXPECT_THROW(solve_trajectory(Field(dir63), cfg, dw), DomainError);
}

TEST(Trajectory, ZeroStaysZero) {
    for (auto w : {PotentialKind::Quadratic, PotentialKind::DoubleWell, PotentialKind::Logarithmic}) {
        const Model m = model_of(dir63, DissipationKind::Cubic, w);
        StepperConfig cfg;
        cfg.t_end = 0.2;
        const auto traj = solve_trajectory(Field(dir63), cfg, m);
        ASSERT_TRUE(traj.ok());
        for (const auto& s : traj.states) EXPECT_EQ(norm_Linf(s), 0.0);
        for (const auto& v : traj.velocities) EXPECT_EQ(norm_Linf(v), 0.0);
    }
}

TEST(Trajectory, DoubleWellDecaysToZeroOnUnitInterval) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::DoubleWell);
    StepperConfig cfg;
    cfg.t_end = 5.0;
    cfg.record_every = 100;
    const auto traj = solve_trajectory(profiles::sine(dir63, 1, 0.9), cfg, m);
    ASSERT_TRUE(traj.ok());
    EXPECT_LE(norm_V(traj.back()), 1e-3);
    EXPECT_NEAR(traj.times.back(), 5.0, 1e-12);
    EXPECT_EQ(traj.size(), 51u);
}

TEST(Trajectory, RegularizedAgreesInsideWindow) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::Logarithmic);
    StepperConfig cfg;
    cfg.t_end = 0.5;
    const Field u0 = profiles::sine(dir63, 1, 0.5);
    const auto ref = solve_trajectory(u0, cfg, m);
    for (int n : {10, 20}) {
        StepperConfig rc = cfg;
        rc.regularization_level = n;
        const auto reg = solve_trajectory(u0, rc, m);
        ASSERT_TRUE(reg.ok());
        const RegularizedPair rp = regularize(m.alpha, m.potential, n);
        for (std::size_t k = 0; k < reg.size(); ++k) {
            ASSERT_GE(reg.states[k].min(), rp.window_lo);
            ASSERT_LE(reg.states[k].max(), rp.window_hi);
            ASSERT_LE(norm_Linf(reg.velocities[k]), n);
            EXPECT_LE(norm_V(reg.states[k] - ref.states[k]), 1e-8);
        }
    }
}

TEST(Trajectory, LogarithmicIteratesStayInside) {
    const Model m = model_of(dir63, DissipationKind::Sinh, PotentialKind::Logarithmic);
    StepperConfig cfg;
    cfg.t_end = 0.3;
    const auto traj = solve_trajectory(profiles::sine(dir63, 3, 0.999), cfg, m);
    ASSERT_TRUE(traj.ok());
    for (const auto& s : traj.states) EXPECT_LT(norm_Linf(s), 1.0);
}

TEST(Trajectory, InitialVelocitySolvesEquation) {
    const Model m = model_of(dir63, DissipationKind::Cubic, PotentialKind::DoubleWell, 0.2);
    const Field u0 = profiles::sine(dir63, 2, 0.6);
    const Field v0 = initial_velocity(u0, m);
    const Field lhs = v0.map([&](double r) { return m.alpha(r); }) + m.stationary_residual(u0);
    EXPECT_LE(norm_Linf(lhs), 1e-10);
}

TEST(Trajectory, RecordEveryAndPartialFailure) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::Quadratic);
    StepperConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 0.25;
    cfg.record_every = 10;
    const auto traj = solve_trajectory(profiles::sine(dir63, 1, 1.0), cfg, m);
    const std::vector<double> expected = {0.0, 0.1, 0.2, 0.25};
    ASSERT_EQ(traj.size(), expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(traj.times[k], expected[k], 1e-12);

    StepperConfig hard = cfg;
    hard.newton_max_iters = 1;
    hard.newton_tol = 1e-300;  // unreachable: every step fails
    const auto failed = solve_trajectory(profiles::sine(dir63, 1, 1.0), hard, m);
    EXPECT_FALSE(failed.ok());
    EXPECT_EQ(failed.size(), 1u);
}

TEST(Trajectory, JacobianPositiveDefiniteAtAcceptedIterates) {
    const Grid g(24, 0.0, 1.0, BoundaryCondition::Dirichlet);
    const Model m = model_of(g, DissipationKind::Linear, PotentialKind::DoubleWell);
    StepperConfig cfg;
    cfg.dt = 0.2;  // below sigma / (2 lambda) = 0.5 but large enough to matter
    cfg.t_end = 2.0;
    const auto traj = solve_trajectory(profiles::sine(g, 1, 0.9), cfg, m);
    ASSERT_TRUE(traj.ok());
    const Eigen::MatrixXd B = dense_B(g);
    for (std::size_t k = 1; k < traj.size(); ++k) {
        Eigen::MatrixXd J = B;
        for (std::size_t i = 0; i < g.n(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            J(ii, ii) += m.alpha.deriv(traj.velocities[k][i]) / cfg.dt + m.potential.d2W(traj.states[k][i]);
        }
        EXPECT_LE((J - J.transpose()).cwiseAbs().maxCoeff(), 1e-9);
        const double emin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(J).eigenvalues().minCoeff();
        EXPECT_GE(emin, m.alpha.sigma() / (2.0 * cfg.dt));
    }
}

TEST(Trajectory, EnergyDropsByDissipationPerStep) {
    // lambda-convexity gives E(u_k) - E(u_{k-1}) <= -tau (alpha(v), v) + lambda tau^2 ||v||^2 / 2
    const Model m = model_of(dir63, DissipationKind::Cubic, PotentialKind::DoubleWell);
    StepperConfig cfg;
    cfg.t_end = 1.0;
    const auto traj = solve_trajectory(profiles::sine(dir63, 1, 0.9), cfg, m);
    ASSERT_TRUE(traj.ok());
    const double tau = cfg.dt, sigma = m.alpha.sigma(), lam = m.potential.lambda();
    double c_fit = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const Field& v = traj.velocities[k];
        const double dE = energy_E(traj.states[k], m.source, m.potential) -
                          energy_E(traj.states[k - 1], m.source, m.potential);
        const double vv = inner_H(v, v);
        EXPECT_LE(dE, -tau * dissipation(v, m.alpha) + 0.5 * lam * tau * tau * vv + 1e-13);
        c_fit = std::max(c_fit, (dE + sigma * tau * vv) / (tau * tau));
    }
    double vmax = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) vmax = std::max(vmax, inner_H(traj.velocities[k], traj.velocities[k]));
    EXPECT_LE(c_fit, 0.5 * lam * vmax + 1e-7);
}

TEST(OdeOracle, Examples) {
    StepperConfig cfg;
    cfg.t_end = 1.0;
    const Model lin = model_of(neu32, DissipationKind::Linear, PotentialKind::Quadratic);
    for (double u : ode_oracle(0.0, cfg, lin)) EXPECT_EQ(u, 0.0);
    const auto ref = ode_oracle(0.4, cfg, lin);
    EXPECT_NEAR(ref.back(), 0.4 * std::exp(-2.0), 1e-13);

    const Model cub = model_of(neu32, DissipationKind::Cubic, PotentialKind::DoubleWell);
    const auto a = ode_oracle(0.7, cfg, cub);
    StepperConfig half = cfg;
    half.dt = 0.5 * cfg.dt;
    const auto b = ode_oracle(0.7, half, cub);
    ASSERT_EQ(b.size(), 2 * a.size() - 1);
    double diff = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[2 * k]));
    EXPECT_LE(diff, 1e-10);

    EXPECT_THROW(ode_oracle(0.1, cfg, model_of(dir63, DissipationKind::Linear, PotentialKind::Quadratic)),
                 PreconditionError);
}

TEST(OdeOracle, BackwardEulerIsFirstOrder) {
    const Model m = model_of(neu32, DissipationKind::Sinh, PotentialKind::Logarithmic);
    auto max_err = [&](double dt) {
        StepperConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 1.0;
        const auto ref = ode_oracle(0.1, cfg, m);
        const auto traj = solve_trajectory(Field::constant(neu32, 0.1), cfg, m);
        double e = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k) e = std::max(e, norm_Linf(traj.states[k] - Field::constant(neu32, ref[k])));
        return e;
    };
    const double e1 = max_err(1e-3), e2 = max_err(5e-4);
    EXPECT_LE(e1, 1e-4);
    EXPECT_NEAR(e1 / e2, 2.0, 0.2);
}
