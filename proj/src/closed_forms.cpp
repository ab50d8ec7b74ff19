#include "lastzero/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "lastzero/errors.hpp"

namespace lastzero {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Half-width of the x-range (in standard deviations) used for g_cdf.
constexpr double kGWidth = 12.0;
constexpr double kGTol = 1e-11;

void require_positive_time(double t, const char* what) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw DomainError(std::string(what) + ": time must be positive and finite, got " +
                          std::to_string(t));
    }
}

}  // namespace

void ProblemSpec::validate() const {
    if (!std::isfinite(mu)) {
        throw DomainError("ProblemSpec: drift mu must be finite");
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw DomainError("ProblemSpec: horizon T must be positive and finite");
    }
}

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double log_norm_cdf(double z) {
    if (z > 5.0) {
        return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
    }
    if (z > -30.0) {
        return std::log(norm_cdf(z));
    }
    // Mills-ratio asymptotic series; at z <= -30 the truncation error is
    // below 1e-13 relative.
    const double r = 1.0 / (z * z);
    const double series =
        1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
    return -0.5 * z * z - kLogSqrt2Pi - std::log(-z) + std::log(series);
}

double exp_times_norm_cdf(double e, double z) {
    if (std::abs(e) < 600.0 && z > -30.0) {
        return std::exp(e) * norm_cdf(z);
    }
    return std::exp(e + log_norm_cdf(z));
}

double max_cdf(double nu, double t, double x) {
    require_positive_time(t, "max_cdf");
    if (!(x >= 0.0)) {
        throw DomainError("max_cdf: level must be non-negative");
    }
    const double st = std::sqrt(t);
    const double f = norm_cdf((x - nu * t) / st) - exp_times_norm_cdf(2.0 * nu * x, (-x - nu * t) / st);
    return std::clamp(f, 0.0, 1.0);
}

double max_cdf_dx(double nu, double t, double x) {
    require_positive_time(t, "max_cdf_dx");
    if (!(x >= 0.0)) {
        throw DomainError("max_cdf_dx: level must be non-negative");
    }
    const double st = std::sqrt(t);
    return 2.0 / st * norm_pdf((x - nu * t) / st) -
           2.0 * nu * exp_times_norm_cdf(2.0 * nu * x, (-x - nu * t) / st);
}

double gain_remaining(double mu, double tau, double x) {
    if (!(tau > 0.0)) {
        throw DomainError("gain_H: requires t < T");
    }
    if (x > 0.0) {
        return 2.0 * max_cdf(-mu, tau, x) - 1.0;
    }
    if (x < 0.0) {
        return 2.0 * max_cdf(mu, tau, -x) - 1.0;
    }
    return -1.0;
}

double gain_H(const ProblemSpec& spec, double t, double x) {
    if (!(t >= 0.0) || !(t < spec.T)) {
        throw DomainError("gain_H: requires 0 <= t < T, got t=" + std::to_string(t));
    }
    return gain_remaining(spec.mu, spec.T - t, x);
}

double density_f(const ProblemSpec& spec, double s, double b) {
    require_positive_time(s, "density_f");
    const double ss = std::sqrt(s);
    return norm_pdf((b - spec.mu * s) / ss) / ss;
}

std::pair<double, double> h_pair_remaining(double mu, double tau) {
    if (tau == 0.0) {
        return {0.0, 0.0};
    }
    if (!(tau > 0.0)) {
        throw DomainError("h_curves: time outside [0, T]");
    }
    auto root = [&](double sign) {
        auto f = [&](double y) { return gain_remaining(mu, tau, sign * y); };
        double hi = std::sqrt(tau) + std::abs(mu) * tau;
        int expansions = 0;
        while (f(hi) <= 0.0) {
            hi *= 2.0;
            if (++expansions > 200) {
                throw std::runtime_error("h_curves: failed to bracket the zero of H");
            }
        }
        std::uintmax_t max_iter = 200;
        const auto [a, b] = boost::math::tools::toms748_solve(
            f, 0.0, hi, -1.0, f(hi), boost::math::tools::eps_tolerance<double>(52), max_iter);
        return sign * 0.5 * (a + b);
    };
    return {root(-1.0), root(1.0)};
}

HCurvePair h_curves(const ProblemSpec& spec, std::span<const double> grid) {
    spec.validate();
    HCurvePair out;
    out.grid.assign(grid.begin(), grid.end());
    out.h_minus.reserve(grid.size());
    out.h_plus.reserve(grid.size());
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : grid) {
        if (t < 0.0 || t > spec.T || t < prev) {
            throw DomainError("h_curves: grid must be ascending within [0, T]");
        }
        prev = t;
        const auto [lo, hi] = h_pair_remaining(spec.mu, spec.T - t);
        out.h_minus.push_back(lo);
        out.h_plus.push_back(hi);
    }
    return out;
}

double g_cdf(const ProblemSpec& spec, double t) {
    spec.validate();
    if (!(t > 0.0) || !(t < spec.T)) {
        throw DomainError("g_cdf: requires 0 < t < T");
    }
    const double mu = spec.mu;
    const double rem = spec.T - t;
    const double st = std::sqrt(t);
    auto integrand = [&](double x) {
        const double dens = norm_pdf((x - mu * t) / st) / st;
        if (x > 0.0) {
            return max_cdf(-mu, rem, x) * dens;
        }
        if (x < 0.0) {
            return max_cdf(mu, rem, -x) * dens;
        }
        return 0.0;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double lo = mu * t - kGWidth * st;
    const double hi = mu * t + kGWidth * st;
    double p = 0.0;
    if (lo < 0.0) {
        p += GK::integrate(integrand, lo, std::min(hi, 0.0), 15, kGTol);
    }
    if (hi > 0.0) {
        p += GK::integrate(integrand, std::max(lo, 0.0), hi, 15, kGTol);
    }
    return std::clamp(p, 0.0, 1.0);
}

double mean_g(const ProblemSpec& spec) {
    spec.validate();
    // t = T (1 - cos(pi u)) / 2 removes the square-root behaviour of the
    // integrand at both ends of [0, T].
    const double T = spec.T;
    auto integrand = [&](double u) {
        const double t = 0.5 * T * (1.0 - std::cos(std::numbers::pi * u));
        if (!(t > 0.0) || !(t < T)) {
            return 0.0;
        }
        return (1.0 - g_cdf(spec, t)) * 0.5 * std::numbers::pi * T * std::sin(std::numbers::pi * u);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    return GK::integrate(integrand, 0.0, 1.0, 12, 1e-11);
}

double arcsine_cdf(double t, double T) {
    if (t <= 0.0) return 0.0;
    if (t >= T) return 1.0;
    return 2.0 / std::numbers::pi * std::asin(std::sqrt(t / T));
}

}  // namespace lastzero
