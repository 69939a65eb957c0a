#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dnl/fit.hpp"
#include "dnl/longtime.hpp"
#include "dnl/profiles.hpp"

using namespace dnl;

namespace {

const double pi = std::numbers::pi;
const Grid dir63(63, 0.0, 1.0, BoundaryCondition::Dirichlet);
const Grid long63(63, 0.0, 10.0, BoundaryCondition::Dirichlet);

Model model_of(const Grid& g, DissipationKind a, PotentialKind w, double f = 0.0) {
    return Model(g, make_dissipation(a), make_potential(w), f);
}

StepperConfig stepper(double dt = 1e-3, double t_end = 1.0, int record_every = 1) {
    StepperConfig cfg;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.record_every = record_every;
    return cfg;
}

const profiles::FourierOptions smooth_modes{1, 4, 2.0, 0.5};

Field base_datum(const Grid& g, std::uint64_t s) { return profiles::random_fourier(g, 100 + s, 0.6, smooth_modes); }
Field perturbed_datum(const Grid& g, std::uint64_t s) {
    return base_datum(g, s) + profiles::random_fourier(g, 200 + s, 0.05, smooth_modes);
}

/// The envelope growth factor (1 - c dt)^{-steps} used by the contraction estimate.
double envelope_factor(const Model& m, double lo, double hi, double dt, double span) {
    double M = 0.0;
    for (int k = 0; k <= 1000; ++k) M = std::max(M, std::abs(m.potential.d2W(lo + (hi - lo) * k / 1000.0)));
    const double c = (M + 1.0) * (M + 1.0) / m.alpha.sigma();
    return std::pow(1.0 - c * dt, -span / dt);
}

} // namespace

// ---------------------------------------------------------------------------
// stationary states

TEST(Stationary, QuadraticIsZero) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::Quadratic);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const StationaryState st = solve_stationary(m.source, profiles::random_fourier(dir63, s, 2.0), m);
        EXPECT_LE(norm_V(st.u_inf), 1e-10);
        EXPECT_LE(st.residual, 1e-10);
    }
}

TEST(Stationary, DoubleWellUnitIntervalOnlyZero) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::DoubleWell);
    const auto states = enumerate_stationary(m.source, m);
    ASSERT_EQ(states.size(), 1u);
    EXPECT_LE(norm_V(states[0].u_inf), 1e-8);
}

TEST(Stationary, DoubleWellLongIntervalHasSymmetricPair) {
    const Model m = model_of(long63, DissipationKind::Linear, PotentialKind::DoubleWell);
    const auto states = enumerate_stationary(m.source, m);
    ASSERT_GE(states.size(), 3u);
    bool has_zero = false, has_pair = false;
    for (std::size_t i = 0; i < states.size(); ++i) {
        EXPECT_LE(states[i].residual, 1e-10);
        EXPECT_LT(norm_Linf(states[i].u_inf), 1.0 + 1e-12);  // W'(u) has the sign of u beyond 1
        if (norm_V(states[i].u_inf) < 1e-8) has_zero = true;
        for (std::size_t j = i + 1; j < states.size(); ++j) {
            EXPECT_GT(norm_V(states[i].u_inf - states[j].u_inf), 0.1);
            if (norm_V(states[i].u_inf + states[j].u_inf) < 1e-6) has_pair = true;
        }
    }
    EXPECT_TRUE(has_zero);
    EXPECT_TRUE(has_pair);
}

TEST(Stationary, StepsLeaveEquilibriumInPlace) {
    const Model m = model_of(long63, DissipationKind::Sinh, PotentialKind::DoubleWell, 0.1);
    const StationaryState st = solve_stationary(m.source, profiles::sine(long63, 1, 0.9), m);
    const auto traj = solve_trajectory(st.u_inf, stepper(1e-3, 0.1), m);
    ASSERT_TRUE(traj.ok());
    EXPECT_LE(norm_V(traj.back() - st.u_inf), 1e-10);
}

TEST(Stationary, NonConvergenceThrows) {
    const Model m = model_of(long63, DissipationKind::Linear, PotentialKind::DoubleWell);
    StationaryOptions opt;
    opt.max_iters = 1;
    EXPECT_THROW(solve_stationary(m.source, profiles::sine(long63, 3, 0.7), m, opt), ConvergenceError);
    const Model lg = model_of(long63, DissipationKind::Linear, PotentialKind::Logarithmic);
    EXPECT_THROW(solve_stationary(lg.source, Field::constant(long63, 1.0), lg), AdmissibilityError);
}

// ---------------------------------------------------------------------------
// omega-limit

TEST(OmegaLimit, StartAtEquilibrium) {
    const Model m = model_of(long63, DissipationKind::Linear, PotentialKind::DoubleWell);
    const StationaryState st = solve_stationary(m.source, profiles::sine(long63, 1, 0.9), m);
    const OmegaLimitReport rep = omega_limit(solve_trajectory(st.u_inf, stepper(1e-3, 1.0, 100), m));
    EXPECT_LE(norm_V(rep.limit.u_inf - st.u_inf), 1e-10);
    for (double d : rep.dist_V) EXPECT_LE(d, 1e-10);
    EXPECT_TRUE(rep.converged);
}

TEST(OmegaLimit, QuadraticDecaysAtSpectralRate) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::Quadratic);
    const auto traj = solve_trajectory(profiles::random_fourier(dir63, 3, 0.8), stepper(1e-3, 10.0, 50), m);
    const OmegaLimitReport rep = omega_limit(traj);
    EXPECT_LE(norm_V(rep.limit.u_inf), 1e-10);  // Newton tolerance of the polish
    EXPECT_TRUE(rep.tail_monotone);
    std::vector<double> t, y;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.times[k] >= 0.5 && traj.times[k] <= 2.0) {
            t.push_back(traj.times[k]);
            y.push_back(std::log(norm_V(traj.states[k])));
        }
    }
    const double h = dir63.h();
    const double mu = (2.0 / (h * h)) * (1.0 - std::cos(pi * h)) + 1.0;
    // backward Euler contracts the slowest mode by 1 / (1 + dt mu) per step
    const double be_rate = std::log1p(1e-3 * mu) / 1e-3;
    EXPECT_NEAR(-fit_line(t, y).slope, be_rate, 1e-3 * be_rate);
}

TEST(OmegaLimit, DoubleWellLongIntervalSettles) {
    const Model m = model_of(long63, DissipationKind::Linear, PotentialKind::DoubleWell);
    const auto traj = solve_trajectory(profiles::random_fourier(long63, 2, 0.9, smooth_modes), stepper(1e-3, 20.0, 100), m);
    ASSERT_TRUE(traj.ok());
    const OmegaLimitReport rep = omega_limit(traj);
    EXPECT_LE(rep.limit.residual, 1e-8);
    EXPECT_TRUE(rep.tail_monotone);
    EXPECT_TRUE(rep.converged);
    EXPECT_GT(norm_V(rep.limit.u_inf), 0.1);  // a nontrivial equilibrium
}

TEST(OmegaLimit, Preconditions) {
    const Model m = model_of(long63, DissipationKind::Linear, PotentialKind::DoubleWell);
    const Field u0 = profiles::sine(long63, 2, 0.5);
    EXPECT_THROW(omega_limit(solve_trajectory(u0, stepper(1e-3, 0.5), m)), InsufficientDataError);
    StepperConfig reg = stepper(1e-3, 0.5);
    reg.regularization_level = 10;
    EXPECT_THROW(omega_limit(solve_trajectory(u0, reg, m)), PreconditionError);
}

// ---------------------------------------------------------------------------
// contraction

TEST(Contraction, DegeneratePair) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::DoubleWell);
    const Field u0 = base_datum(dir63, 0);
    const ContractionReport rep = contraction_experiment(u0, u0, 0.1, m, stepper());
    EXPECT_TRUE(rep.degenerate);
    EXPECT_TRUE(std::isnan(rep.Q1));
    EXPECT_TRUE(std::isnan(rep.Q2));
}

TEST(Contraction, LinearRateMatchesSpectralValue) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::Quadratic);
    const profiles::FourierOptions opt{1, 8, 1.0, 0.0};
    const ContractionReport rep = contraction_experiment(profiles::random_fourier(dir63, 1, 0.5, opt),
                                                         profiles::random_fourier(dir63, 2, 0.5, opt), 0.5, m,
                                                         stepper());
    const double h = dir63.h();
    const double spectral = (2.0 / (h * h)) * (1.0 - std::cos(pi * h)) + 1.0;
    EXPECT_NEAR(rep.decay_rate, spectral, 0.05 * spectral);
    EXPECT_EQ(rep.envelope_violations, 0u);
}

TEST(Contraction, DoubleWellEnsemble) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::DoubleWell);
    ContractionOptions opt;
    opt.basin_horizon = 5.0;
    std::vector<double> q1, q2;
    std::size_t pairs = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const ContractionReport rep =
            contraction_experiment(base_datum(dir63, s), perturbed_datum(dir63, s), 0.1, m, stepper(), opt);
        ASSERT_FALSE(rep.degenerate);
        EXPECT_TRUE(rep.same_basin_checked && rep.same_basin);
        EXPECT_EQ(rep.envelope_violations, 0u);
        EXPECT_LE(rep.envelope_worst_ratio, 1.0);
        pairs += rep.envelope_pairs;
        q1.push_back(rep.Q1);
        q2.push_back(rep.Q2);
    }
    EXPECT_GE(pairs, 1000u);
    for (const auto* q : {&q1, &q2}) {
        const auto [lo, hi] = std::minmax_element(q->begin(), q->end());
        EXPECT_TRUE(std::isfinite(*hi));
        EXPECT_GT(*lo, 0.0);
        EXPECT_LE(*hi / *lo, 3.0);
    }
}

// ---------------------------------------------------------------------------
// l-trajectories

TEST(LTrajectory, ShiftByZeroIsIdentity) {
    const Model m = model_of(dir63, DissipationKind::Cubic, PotentialKind::DoubleWell);
    const StepperConfig cfg = stepper(1e-3, 0.0, 5);
    const LTrajectory chi = make_ltrajectory(base_datum(dir63, 1), 0.1, m, cfg);
    const LTrajectory same = shift(chi, 0.0, cfg);
    ASSERT_EQ(same.segment.size(), chi.segment.size());
    for (std::size_t k = 0; k < chi.segment.size(); ++k) {
        EXPECT_LE(norm_Linf(same.segment.states[k] - chi.segment.states[k]), 1e-15);
    }
    EXPECT_EQ(xell_norm(chi, same), 0.0);
}

TEST(LTrajectory, SemigroupAndEndpoint) {
    const Model m = model_of(dir63, DissipationKind::Cubic, PotentialKind::DoubleWell);
    const StepperConfig cfg = stepper(1e-3, 0.0, 5);
    const double ell = 0.1;
    const Field u0 = base_datum(dir63, 2);
    const LTrajectory chi = make_ltrajectory(u0, ell, m, cfg);
    const LTrajectory two_hops = shift(shift(chi, 0.05, cfg), 0.15, cfg);
    const LTrajectory one_hop = shift(chi, 0.2, cfg);
    EXPECT_NEAR(two_hops.t_start, 0.2, 1e-12);
    EXPECT_LE(xell_norm(two_hops, one_hop), 1e-12);
    ASSERT_EQ(one_hop.segment.size(), chi.segment.size());
    EXPECT_NEAR(one_hop.segment.times.back(), ell, 1e-12);

    const auto parent = solve_trajectory(u0, stepper(1e-3, 0.2 + ell, 5), m);
    EXPECT_LE(norm_V(eval_endpoint(one_hop) - parent.back()), 1e-12);
    EXPECT_THROW(shift(chi, 0.0005, cfg), DomainError);
    EXPECT_THROW(shift(chi, 0.1, stepper(5e-4)), DomainError);
}

TEST(LTrajectory, ZeroStaysZero) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::DoubleWell);
    const StepperConfig cfg = stepper();
    const LTrajectory chi = make_ltrajectory(Field(dir63), 0.1, m, cfg);
    const LTrajectory later = shift(chi, 0.3, cfg);
    for (const auto& s : later.segment.states) EXPECT_EQ(norm_Linf(s), 0.0);
    EXPECT_EQ(norm_Linf(eval_endpoint(later)), 0.0);
    EXPECT_EQ(well_norm(later), 0.0);
}

TEST(LTrajectory, NormsOfConstantInTimeFields) {
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::Quadratic);
    const double ell = 0.4;
    auto frozen = [&](const Field& u) {
        TrajectorySegment seg{m, 0.1, {}, {}, {}, {}, std::nullopt};
        for (int k = 0; k <= 4; ++k) {
            seg.times.push_back(0.1 * k);
            seg.states.push_back(u);
            seg.velocities.push_back(Field(dir63));
            seg.newton_iters.push_back(0);
        }
        return LTrajectory{ell, seg, 0.0};
    };
    const Field u = profiles::sine(dir63, 1, 0.7), v = profiles::sine(dir63, 3, 0.2);
    EXPECT_NEAR(xell_norm(frozen(u), frozen(v)), std::sqrt(ell) * norm_V(u - v), 1e-12);
    EXPECT_NEAR(well_norm(frozen(u)), std::sqrt(ell) * norm_H2(u), 1e-12);
    EXPECT_THROW(xell_norm(frozen(u), make_ltrajectory(v, 0.2, m, stepper(0.1))), DimensionError);
}

namespace {

struct Pair {
    LTrajectory a, b;
};

std::vector<Pair> ensemble(const Model& m, const StepperConfig& cfg, double ell, int count) {
    std::vector<Pair> out;
    for (int s = 0; s < count; ++s) {
        const auto us = static_cast<std::uint64_t>(s);
        out.push_back({make_ltrajectory(base_datum(dir63, us), ell, m, cfg),
                       make_ltrajectory(perturbed_datum(dir63, us), ell, m, cfg)});
    }
    return out;
}

} // namespace

TEST(LTrajectory, LipschitzTraces) {
    // smoothing of differences, uniformly Lipschitz shifts and a Lipschitz endpoint map
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::DoubleWell);
    const StepperConfig cfg = stepper(1e-3, 0.0, 5);
    const double ell = 0.1, tau = 0.2;
    const auto pairs = ensemble(m, cfg, ell, 10);
    // all data stay inside [-1, 1], where |W''| <= 2
    const double growth_tau = envelope_factor(m, -1.0, 1.0, cfg.dt, tau);
    const double growth_ell = envelope_factor(m, -1.0, 1.0, cfg.dt, ell);
    std::vector<double> m1;
    for (const Pair& p : pairs) {
        for (const auto& s : p.a.segment.states) ASSERT_LE(norm_Linf(s), 1.0);
        const double base = xell_norm(p.a, p.b);
        ASSERT_GT(base, 0.0);
        for (double t : {0.05, 0.1, 0.2}) {
            EXPECT_LE(xell_norm(shift(p.a, t, cfg), shift(p.b, t, cfg)), std::sqrt(growth_tau) * base * (1.0 + 1e-9));
        }
        const double endpoint = norm_V(eval_endpoint(p.a) - eval_endpoint(p.b));
        EXPECT_LE(endpoint, std::sqrt(growth_ell / ell) * base * (1.0 + 1e-6));
        m1.push_back(well_norm(difference(shift(p.a, ell, cfg), shift(p.b, ell, cfg))) / base);
    }
    const auto [lo, hi] = std::minmax_element(m1.begin(), m1.end());
    EXPECT_TRUE(std::isfinite(*hi));
    EXPECT_LE(*hi / *lo, 3.0);
}

TEST(LTrajectory, HalfHolderInTime) {
    // ||L_{t1} chi - L_{t2} chi||_{X_ell} <= c |t1 - t2|^{1/2}
    const Model m = model_of(dir63, DissipationKind::Linear, PotentialKind::DoubleWell);
    const StepperConfig cfg = stepper(1e-3, 0.0, 1);
    const LTrajectory chi = make_ltrajectory(base_datum(dir63, 4), 0.1, m, cfg);
    const LTrajectory ref = shift(chi, 0.05, cfg);
    std::vector<double> lx, ly;
    for (double d : {0.001, 0.002, 0.004, 0.008, 0.016}) {
        lx.push_back(std::log(d));
        ly.push_back(std::log(xell_norm(ref, shift(chi, 0.05 + d, cfg))));
    }
    EXPECT_GE(fit_line(lx, ly).slope, 0.5);
}
