#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <boost/math/tools/roots.hpp>

#include "lastzero/boundary.hpp"
#include "lastzero/errors.hpp"

using namespace lastzero;

namespace {

const BoundaryPair& solved(double mu, std::size_t n = 400) {
    static std::map<std::pair<double, std::size_t>, BoundaryPair> cache;
    auto it = cache.find({mu, n});
    if (it == cache.end()) {
        SolverConfig cfg;
        cfg.n_steps = n;
        it = cache.emplace(std::pair{mu, n}, solve_boundaries({mu, 1.0}, cfg)).first;
    }
    return it->second;
}

// Root of 4 Phi(z) - 2 z phi(z) - 3 = 0, the known zero-drift constant.
double zero_drift_constant() {
    auto f = [](double z) { return 4.0 * norm_cdf(z) - 2.0 * z * norm_pdf(z) - 3.0; };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t it = 100;
    const auto r = boost::math::tools::toms748_solve(f, 0.5, 2.0, tol, it);
    return 0.5 * (r.first + r.second);
}

}  // namespace

TEST(SqrtGrid, Layout) {
    const auto g = sqrt_time_grid({0.0, 2.0}, 10);
    ASSERT_EQ(g.size(), 11u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 2.0);
    for (std::size_t k = 0; k <= 10; ++k) EXPECT_NEAR(std::sqrt(2.0 - g[k]), std::sqrt(2.0) * (1.0 - k / 10.0), 1e-14);
}

TEST(Boundaries, TerminalValuesExact) {
    for (double mu : {-1.0, 0.0, 1.0}) {
        const auto& bp = solved(mu);
        EXPECT_EQ(bp.b_minus.back(), 0.0);
        EXPECT_EQ(bp.b_plus.back(), 0.0);
        EXPECT_EQ(bp.grid.back(), 1.0);
        EXPECT_EQ(bp.grid.front(), 0.0);
    }
}

TEST(Boundaries, MonotoneAndInUniquenessClass) {
    for (double mu : {-1.0, 0.0, 1.0}) {
        const auto& bp = solved(mu);
        for (std::size_t k = 0; k < bp.size(); ++k) {
            ASSERT_LE(bp.b_minus[k], bp.h_minus[k]) << mu << " " << k;
            ASSERT_LE(bp.h_minus[k], 0.0);
            ASSERT_GE(bp.h_plus[k], 0.0);
            ASSERT_GE(bp.b_plus[k], bp.h_plus[k]) << mu << " " << k;
            if (k > 0) {
                ASSERT_GE(bp.b_minus[k], bp.b_minus[k - 1]);
                ASSERT_LE(bp.b_plus[k], bp.b_plus[k - 1]);
            }
        }
        EXPECT_LE(bp.max_clamp, 10.0 * SolverConfig{}.tol_b);
    }
}

TEST(Boundaries, StoredResidualsWithinTolerance) {
    for (double mu : {-1.0, 0.0, 1.0}) {
        const auto& bp = solved(mu);
        for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
            ASSERT_LE(std::abs(bp.residual_minus[k]), SolverConfig{}.tol_res);
            ASSERT_LE(std::abs(bp.residual_plus[k]), SolverConfig{}.tol_res);
        }
    }
}

TEST(Boundaries, ResidualCertificateUnderFinerQuadrature) {
    std::mt19937_64 rng(1234);
    for (double mu : {-1.0, 0.0, 1.0}) {
        const auto& bp = solved(mu);
        std::uniform_int_distribution<std::size_t> pick(0, bp.size() - 2);
        const LagQuadrature fine = LagQuadrature{}.refined();
        for (int i = 0; i < 20; ++i) {
            const std::size_t k = pick(rng);
            ASSERT_LE(std::abs(equation_residual(bp, k, bp.b_minus[k], fine)), 10.0 * SolverConfig{}.tol_res);
            ASSERT_LE(std::abs(equation_residual(bp, k, bp.b_plus[k], fine)), 10.0 * SolverConfig{}.tol_res);
        }
    }
}

TEST(Boundaries, ZeroDriftSymmetricSquareRoot) {
    const auto& bp = solved(0.0);
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t k = 0; k < bp.size(); ++k) {
        ASSERT_NEAR(bp.b_minus[k], -bp.b_plus[k], 1e-3);
        const double t = bp.grid[k];
        if (t < 0.05 || t > 0.9) continue;
        const double z = bp.b_plus[k] / std::sqrt(1.0 - t);
        lo = std::min(lo, z);
        hi = std::max(hi, z);
    }
    EXPECT_LE((hi - lo) / (0.5 * (hi + lo)), 0.01);
}

TEST(Boundaries, ZeroDriftConstantMatchesKnownRoot) {
    const double zstar = zero_drift_constant();
    const auto& bp = solved(0.0);
    for (std::size_t k = 0; k + 1 < bp.size(); k += 20) {
        ASSERT_NEAR(bp.b_plus[k] / std::sqrt(1.0 - bp.grid[k]), zstar, 1e-4) << bp.grid[k];
    }
}

TEST(Boundaries, DriftIsAsymmetric) {
    const auto& bp = solved(1.0);
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        ASSERT_GT(std::abs(std::abs(bp.b_minus[k]) - bp.b_plus[k]), 10.0 * SolverConfig{}.tol_b) << bp.grid[k];
    }
}

TEST(Boundaries, DriftFlipMirrors) {
    const auto& up = solved(1.0, 100);
    const auto& down = solved(-1.0, 100);
    const BoundaryPair m = mirror(up);
    EXPECT_EQ(m.spec, down.spec);
    for (std::size_t k = 0; k < up.size(); ++k) {
        ASSERT_NEAR(m.b_minus[k], down.b_minus[k], 2.0 * SolverConfig{}.tol_b);
        ASSERT_NEAR(m.b_plus[k], down.b_plus[k], 2.0 * SolverConfig{}.tol_b);
    }
}

TEST(Boundaries, GridRefinementConverges) {
    const double b50 = solved(1.0, 50).b_plus.front();
    const double b100 = solved(1.0, 100).b_plus.front();
    const double b200 = solved(1.0, 200).b_plus.front();
    EXPECT_LT(std::abs(b200 - b100), std::abs(b100 - b50));
    const double m50 = solved(1.0, 50).b_minus.front();
    const double m100 = solved(1.0, 100).b_minus.front();
    const double m200 = solved(1.0, 200).b_minus.front();
    EXPECT_LT(std::abs(m200 - m100), std::abs(m100 - m50));
}

TEST(Boundaries, NonConvergenceReportsStep) {
    SolverConfig cfg;
    cfg.n_steps = 20;
    cfg.max_iter = 1;
    cfg.tol_res = 1e-14;
    cfg.tol_b = 1e-16;
    try {
        solve_boundaries({0.5, 1.0}, cfg);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_LT(e.step(), 20u);
        EXPECT_GT(std::abs(e.residual()), 0.0);
    }
}

TEST(SolverConfig, Validation) {
    SolverConfig c;
    c.damping = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.damping = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.tol_b = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.n_steps = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_NO_THROW(SolverConfig{}.validate());
}

TEST(Interpolation, TerminalAndNodes) {
    const auto& bp = solved(1.0, 50);
    const auto [a, b] = interpolate_boundary(bp, 1.0);
    EXPECT_EQ(a, 0.0);
    EXPECT_EQ(b, 0.0);
    for (std::size_t k = 0; k < bp.size(); ++k) {
        const auto [lo, hi] = interpolate_boundary(bp, bp.grid[k]);
        ASSERT_EQ(lo, bp.b_minus[k]);
        ASSERT_EQ(hi, bp.b_plus[k]);
    }
    EXPECT_THROW(interpolate_boundary(bp, -0.01), DomainError);
    EXPECT_THROW(interpolate_boundary(bp, 1.01), DomainError);
}

TEST(Interpolation, ConstantSegmentAndMonotone) {
    BoundaryPair bp;
    bp.spec = {0.0, 1.0};
    bp.grid = {0.0, 0.5, 0.8, 1.0};
    bp.b_minus = {-1.0, -0.6, -0.6, 0.0};
    bp.b_plus = {1.0, 0.7, 0.7, 0.0};
    bp.h_minus = bp.h_plus = bp.residual_minus = bp.residual_plus = {0.0, 0.0, 0.0, 0.0};
    const auto [lo, hi] = interpolate_boundary(bp, 0.65);
    EXPECT_EQ(lo, -0.6);
    EXPECT_EQ(hi, 0.7);
    double prev_lo = -INFINITY, prev_hi = INFINITY;
    for (double t = 0.0; t <= 1.0; t += 0.001) {
        const auto [l, h] = interpolate_boundary(bp, t);
        ASSERT_GE(l, prev_lo);
        ASSERT_LE(h, prev_hi);
        prev_lo = l;
        prev_hi = h;
    }
}
