#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lastzero/closed_forms.hpp"
#include "lastzero/errors.hpp"

using namespace lastzero;

namespace {

// Running maximum of nu r + B_r on [0, t], sampled exactly: draw the endpoint,
// then the maximum of the bridge, M = (b + sqrt(b^2 - 2 t log U)) / 2.
double sample_max(std::mt19937_64& rng, double nu, double t) {
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01;
    const double b = nu * t + std::sqrt(t) * n01(rng);
    const double u = 1.0 - u01(rng);
    return 0.5 * (b + std::sqrt(b * b - 2.0 * t * std::log(u)));
}

// Zero of B^mu in (t, T) decided from B_t and B_T alone: opposite signs, or
// the bridge crosses with probability exp(-2 B_t B_T / (T - t)).
bool zero_after(std::mt19937_64& rng, double mu, double t, double T) {
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01;
    const double a = mu * t + std::sqrt(t) * n01(rng);
    const double b = a + mu * (T - t) + std::sqrt(T - t) * n01(rng);
    if (a * b <= 0.0) return true;
    return u01(rng) < std::exp(-2.0 * a * b / (T - t));
}

}  // namespace

TEST(NormCdf, TrivialValues) {
    EXPECT_EQ(norm_cdf(0.0), 0.5);
    EXPECT_EQ(norm_cdf(40.0), 1.0);
}

TEST(NormCdf, MatchesFortyDigitReference) {
    // mpmath ncdf(1) at 40 digits: 0.8413447460685429485852325456320379224779
    EXPECT_NEAR(norm_cdf(1.0), 0.8413447460685429485852325456, 2e-16);
}

TEST(NormCdf, SymmetryOnRandomSample) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    for (int i = 0; i < 10000; ++i) {
        const double z = u(rng);
        ASSERT_NEAR(norm_cdf(z) + norm_cdf(-z), 1.0, 1e-14) << z;
    }
}

TEST(NormCdf, MonotoneAndBounded) {
    double prev = 0.0;
    for (double z = -40.0; z <= 40.0; z += 0.01) {
        const double p = norm_cdf(z);
        ASSERT_GE(p, prev);
        ASSERT_GE(p, 0.0);
        ASSERT_LE(p, 1.0);
        prev = p;
    }
}

TEST(NormCdf, LogTailAgreesWithDirectLog) {
    for (double z : {-35.0, -20.0, -5.0, 0.0, 3.0}) {
        EXPECT_NEAR(log_norm_cdf(z), std::log(norm_cdf(z)), 1e-12 * std::abs(std::log(norm_cdf(z))) + 1e-15);
    }
    EXPECT_TRUE(std::isfinite(log_norm_cdf(-60.0)));
    EXPECT_LT(log_norm_cdf(-60.0), -1800.0);
}

TEST(MaxCdf, ZeroDriftReflection) {
    EXPECT_NEAR(max_cdf(0.0, 1.0, 1.0), 0.6826894921370858971704650912640758, 1e-15);
}

TEST(MaxCdf, VanishesAtZeroLevel) {
    for (double nu : {-3.0, -1.0, 0.0, 1.0, 3.0}) EXPECT_EQ(max_cdf(nu, 1.0, 0.0), 0.0);
}

TEST(MaxCdf, DomainErrors) {
    EXPECT_THROW(max_cdf(0.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(max_cdf(0.0, -1.0, 1.0), DomainError);
    EXPECT_THROW(max_cdf(0.0, 1.0, -0.1), DomainError);
    EXPECT_THROW(max_cdf_dx(0.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(max_cdf_dx(0.0, 1.0, -0.1), DomainError);
}

TEST(MaxCdf, NondecreasingInLevel) {
    for (double nu : {-2.0, 0.0, 2.0}) {
        double prev = 0.0;
        for (double x = 0.0; x < 8.0; x += 0.01) {
            const double f = max_cdf(nu, 0.7, x);
            ASSERT_GE(f, prev - 1e-16);
            ASSERT_LE(f, 1.0);
            prev = f;
        }
    }
}

TEST(MaxCdf, MatchesExactMaximumSampling) {
    constexpr int n = 1000000;
    std::mt19937_64 rng(2024);
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += sample_max(rng, 1.0, 1.0) <= 1.0 ? 1 : 0;
    const double p = static_cast<double>(hits) / n;
    const double se = std::sqrt(p * (1.0 - p) / n);
    EXPECT_NEAR(max_cdf(1.0, 1.0, 1.0), p, 3.0 * se);
}

TEST(MaxCdfDx, ZeroDriftAtOrigin) { EXPECT_NEAR(max_cdf_dx(0.0, 1.0, 0.0), 0.7978845608028653558798921, 1e-15); }

TEST(MaxCdfDx, Bound) {
    for (double x = 0.0; x < 10.0; x += 0.005) {
        ASSERT_LE(max_cdf_dx(1.0, 1.0, x), 4.0);
        ASSERT_LE(max_cdf_dx(-1.0, 1.0, x), 4.0);
    }
}

TEST(MaxCdfDx, ClosedFormExpression) {
    const double nu = 0.7, t = 0.4, x = 0.25;
    const double st = std::sqrt(t);
    const double expect = 2.0 / st * norm_pdf((x - nu * t) / st) - 2.0 * nu * std::exp(2.0 * nu * x) * norm_cdf((-x - nu * t) / st);
    EXPECT_NEAR(max_cdf_dx(nu, t, x), expect, 1e-14);
}

TEST(MaxCdfDx, FiniteDifferenceAtPoint) {
    const double h = 1e-6;
    const double fd = (max_cdf(1.0, 0.5, 0.3 + h) - max_cdf(1.0, 0.5, 0.3 - h)) / (2.0 * h);
    const double d = max_cdf_dx(1.0, 0.5, 0.3);
    EXPECT_LE(std::abs(fd - d), 1e-6 * std::abs(d));
}

TEST(MaxCdfDx, FiniteDifferenceOnGrid) {
    const double h = 1e-6;
    for (double nu : {-1.0, 0.0, 1.0}) {
        for (int i = 0; i < 50; ++i) {
            const double t = 0.05 + 1.95 * i / 49.0;
            for (int j = 0; j < 50; ++j) {
                const double x = 0.01 + 2.0 * std::sqrt(t) * j / 49.0;
                const double fd = (max_cdf(nu, t, x + h) - max_cdf(nu, t, x - h)) / (2.0 * h);
                const double d = max_cdf_dx(nu, t, x);
                ASSERT_LE(std::abs(fd - d), 1e-5 * std::abs(d)) << nu << " " << t << " " << x;
            }
        }
    }
}

TEST(GainH, MinusOneAtZero) {
    for (double mu : {-1.0, 0.0, 2.0}) {
        for (double t : {0.0, 0.5, 0.99}) EXPECT_EQ(gain_H({mu, 1.0}, t, 0.0), -1.0);
    }
}

TEST(GainH, TailLimit) { EXPECT_GE(gain_H({0.0, 1.0}, 0.0, 10.0), 1.0 - 1e-6); }

TEST(GainH, ZeroAtQuartileLevel) {
    const double q = boost::math::quantile(boost::math::normal(), 0.75);
    EXPECT_NEAR(q, 0.6744897501960817, 1e-15);
    EXPECT_NEAR(gain_H({0.0, 1.0}, 0.0, 0.6744897501960817), 0.0, 1e-12);
}

TEST(GainH, DomainErrorAtOrAfterHorizon) {
    EXPECT_THROW(gain_H({0.0, 1.0}, 1.0, 0.5), DomainError);
    EXPECT_THROW(gain_H({0.0, 1.0}, 1.5, 0.5), DomainError);
    EXPECT_THROW(gain_H({0.0, 1.0}, -0.1, 0.5), DomainError);
}

TEST(GainH, BoundedMonotoneSymmetric) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(0.0, 0.999), ux(-4.0, 4.0), um(-3.0, 3.0);
    for (int i = 0; i < 5000; ++i) {
        const double mu = um(rng);
        const ProblemSpec spec{mu, 1.0};
        double t1 = ut(rng), t2 = ut(rng);
        if (t1 > t2) std::swap(t1, t2);
        const double x = ux(rng);
        const double h1 = gain_H(spec, t1, x);
        const double h2 = gain_H(spec, t2, x);
        ASSERT_LE(std::abs(h1), 1.0);
        ASSERT_GE(h2, h1 - 1e-14) << mu << " " << t1 << " " << t2 << " " << x;
        ASSERT_NEAR(h1, gain_H({-mu, 1.0}, t1, -x), 1e-14);
    }
}

TEST(GainH, NondecreasingInStateOnPositiveAxis) {
    for (double mu : {-1.0, 0.0, 1.0}) {
        double prev = -1.0;
        for (double x = 0.0; x < 5.0; x += 0.01) {
            const double h = gain_H({mu, 1.0}, 0.3, x);
            ASSERT_GE(h, prev - 1e-15);
            prev = h;
        }
    }
}

TEST(HCurves, ZeroDriftClosedForm) {
    const ProblemSpec spec{0.0, 1.0};
    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i) grid.push_back(i / 200.0);
    const auto hc = h_curves(spec, grid);
    const double q = boost::math::quantile(boost::math::normal(), 0.75);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ASSERT_NEAR(hc.h_plus[i], q * std::sqrt(1.0 - grid[i]), 1e-8);
        ASSERT_NEAR(hc.h_minus[i], -hc.h_plus[i], 1e-12);
    }
    EXPECT_EQ(hc.h_minus.back(), 0.0);
    EXPECT_EQ(hc.h_plus.back(), 0.0);
}

TEST(HCurves, InvariantsWithDrift) {
    for (double mu : {-2.0, -1.0, 1.0, 2.0}) {
        const ProblemSpec spec{mu, 1.5};
        std::vector<double> grid;
        for (int i = 0; i <= 150; ++i) grid.push_back(1.5 * i / 150.0);
        const auto hc = h_curves(spec, grid);
        EXPECT_EQ(hc.h_minus.back(), 0.0);
        EXPECT_EQ(hc.h_plus.back(), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            ASSERT_LE(hc.h_minus[i], 0.0);
            ASSERT_GE(hc.h_plus[i], 0.0);
            if (i > 0) {
                ASSERT_GE(hc.h_minus[i], hc.h_minus[i - 1]);
                ASSERT_LE(hc.h_plus[i], hc.h_plus[i - 1]);
            }
            if (i + 1 < grid.size()) {
                ASSERT_NEAR(gain_H(spec, grid[i], hc.h_minus[i]), 0.0, 1e-9);
                ASSERT_NEAR(gain_H(spec, grid[i], hc.h_plus[i]), 0.0, 1e-9);
            }
        }
    }
}

TEST(Density, Values) {
    EXPECT_NEAR(density_f({0.0, 1.0}, 1.0, 0.0), 0.3989422804014326779399460599, 1e-16);
    EXPECT_NEAR(density_f({2.0, 1.0}, 0.5, 1.0), 0.5641895835477562869480794515, 1e-15);
    EXPECT_THROW(density_f({0.0, 1.0}, 0.0, 0.0), DomainError);
    EXPECT_THROW(density_f({0.0, 1.0}, -1.0, 0.0), DomainError);
}

TEST(Density, IntegratesToOne) {
    for (double mu : {-2.0, 0.0, 2.0}) {
        for (double s : {0.01, 0.5, 3.0}) {
            const ProblemSpec spec{mu, 4.0};
            const double c = mu * s;
            const double w = 10.0 * std::sqrt(s);
            const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double b) { return density_f(spec, s, b); }, c - w, c + w, 15, 1e-14);
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(LastZeroLaw, ArcsineAtHalf) { EXPECT_NEAR(g_cdf({0.0, 1.0}, 0.5), 0.5, 1e-9); }

TEST(LastZeroLaw, ArcsineAcrossTimes) {
    for (double T : {0.5, 1.0, 4.0}) {
        for (double f : {0.01, 0.2, 0.7, 0.95}) {
            EXPECT_NEAR(g_cdf({0.0, T}, f * T), arcsine_cdf(f * T, T), 1e-9);
        }
    }
}

TEST(LastZeroLaw, ContinuityTowardHorizon) { EXPECT_GE(g_cdf({0.0, 1.0}, 1.0 - 1e-6), 1.0 - 1e-2); }

TEST(LastZeroLaw, DomainErrors) {
    EXPECT_THROW(g_cdf({0.0, 1.0}, 0.0), DomainError);
    EXPECT_THROW(g_cdf({0.0, 1.0}, 1.0), DomainError);
}

TEST(LastZeroLaw, NondecreasingWithDrift) {
    for (double mu : {-1.0, 1.0, 2.5}) {
        double prev = 0.0;
        for (int i = 1; i < 100; ++i) {
            const double p = g_cdf({mu, 1.0}, i / 100.0);
            ASSERT_GE(p, prev - 1e-12);
            ASSERT_LE(p, 1.0);
            prev = p;
        }
    }
}

TEST(LastZeroLaw, DriftCdfMatchesTwoPointSampling) {
    constexpr int n = 1000000;
    std::mt19937_64 rng(99);
    int no_zero = 0;
    for (int i = 0; i < n; ++i) no_zero += zero_after(rng, 1.0, 0.5, 1.0) ? 0 : 1;
    const double p = static_cast<double>(no_zero) / n;
    const double se = std::sqrt(p * (1.0 - p) / n);
    EXPECT_NEAR(g_cdf({1.0, 1.0}, 0.5), p, 3.0 * se);
}

TEST(MeanG, ArcsineMean) {
    EXPECT_NEAR(mean_g({0.0, 1.0}), 0.5, 1e-8);
    EXPECT_NEAR(mean_g({0.0, 4.0}), 2.0, 1e-8);
    EXPECT_NEAR(mean_g({0.0, 0.5}), 0.25, 1e-8);
}

TEST(MeanG, InsideHorizon) {
    for (double mu : {-3.0, -1.0, 0.5, 1.0, 3.0}) {
        const double m = mean_g({mu, 2.0});
        EXPECT_GT(m, 0.0);
        EXPECT_LT(m, 2.0);
    }
}

TEST(MeanG, DriftMatchesTwoPointSampling) {
    // E g = T P(g > U T) for U uniform on (0, 1).
    constexpr int n = 1000000;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = 1.0 - u01(rng);
        const double v = zero_after(rng, 1.0, t, 1.0) ? 1.0 : 0.0;
        sum += v;
        sum2 += v * v;
    }
    const double m = sum / n;
    const double se = std::sqrt((sum2 / n - m * m) / n);
    EXPECT_NEAR(mean_g({1.0, 1.0}), m, 3.0 * se);
}

TEST(ProblemSpec, Validation) {
    EXPECT_THROW((ProblemSpec{0.0, 0.0}).validate(), DomainError);
    EXPECT_THROW((ProblemSpec{0.0, -1.0}).validate(), DomainError);
    EXPECT_THROW((ProblemSpec{std::nan(""), 1.0}).validate(), DomainError);
    EXPECT_THROW((ProblemSpec{0.0, INFINITY}).validate(), DomainError);
    EXPECT_NO_THROW((ProblemSpec{-2.0, 3.0}).validate());
}
