#include "lastzero/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lastzero/errors.hpp"

namespace lastzero {

namespace {

constexpr double kTruncation = 8.5;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

double kernel_window(double mu, double tau, double s, double x, double z_minus, double z_plus,
                     const GaussLegendre& rule, int refine) {
    if (!(z_plus > z_minus)) {
        return 0.0;
    }
    const double sd = std::sqrt(s);
    const double m = x + mu * s;
    const double wlo = std::max((z_minus - m) / sd, -kTruncation);
    const double whi = std::min((z_plus - m) / sd, kTruncation);
    if (!(whi > wlo)) {
        return 0.0;
    }

    std::array<double, 16> pts{};
    std::size_t n = 0;
    pts[n++] = wlo;
    pts[n++] = whi;
    auto add = [&](double w) {
        if (w > wlo && w < whi) {
            pts[n++] = w;
        }
    };
    for (double w : {0.0, -2.5, 2.5, -5.0, 5.0}) {
        add(w);
    }
    const double st = std::sqrt(tau);
    for (double y : {0.0, -2.0 * st, 2.0 * st, -5.0 * st, 5.0 * st}) {
        add((y - m) / sd);
    }
    std::sort(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(n));

    const auto& nodes = rule.nodes();
    const auto& weights = rule.weights();
    const std::size_t pieces = std::size_t{1} << refine;
    const double min_len = 1e-13 * (whi - wlo);
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
        const double a = pts[p];
        const double b = pts[p + 1];
        if (b - a <= min_len) {
            continue;
        }
        const double h = (b - a) / static_cast<double>(pieces);
        for (std::size_t piece = 0; piece < pieces; ++piece) {
            const double lo = a + h * static_cast<double>(piece);
            const double half = 0.5 * h;
            const double mid = lo + half;
            double sub = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const double w = mid + half * nodes[i];
                sub += weights[i] * gain_remaining(mu, tau, m + sd * w) * std::exp(-0.5 * w * w);
            }
            acc += sub * half;
        }
    }
    return acc * kInvSqrt2Pi;
}

double kernel_K(const ProblemSpec& spec, const KernelQuery& q, const KernelOptions& opts) {
    spec.validate();
    if (!(q.s > 0.0)) {
        throw DomainError("kernel_K: lag s must be positive");
    }
    if (!(q.t >= 0.0)) {
        throw DomainError("kernel_K: t must be non-negative");
    }
    const double tau = (spec.T - q.t) - q.s;
    if (tau < -1e-14 * spec.T) {
        throw DomainError("kernel_K: t + s exceeds the horizon");
    }
    if (!(tau > 0.0)) {
        // H(T, .) is only defined as a limit; the integrand of the lag
        // integral vanishes at this single point anyway.
        throw DomainError("kernel_K: t + s must be strictly below the horizon");
    }
    if (q.z_minus > q.z_plus) {
        throw DomainError("kernel_K: window requires z_minus <= z_plus");
    }
    const auto& rule = gauss_legendre(opts.inner_order);
    double prev = kernel_window(spec.mu, tau, q.s, q.x, q.z_minus, q.z_plus, rule, 0);
    for (int refine = 1; refine <= 10; ++refine) {
        const double next = kernel_window(spec.mu, tau, q.s, q.x, q.z_minus, q.z_plus, rule, refine);
        if (std::abs(next - prev) <= opts.eps) {
            return next;
        }
        prev = next;
    }
    return prev;
}

double integrate_K_over_lag_remaining(double mu, double remaining, double x, const WindowFn& window,
                                      std::span<const double> s_grid, const LagQuadrature& quad) {
    if (!(remaining > 0.0)) {
        return 0.0;
    }
    const double L = remaining;
    std::vector<double> breaks;
    breaks.reserve(s_grid.size() + 2);
    breaks.push_back(0.0);
    for (double s : s_grid) {
        if (!(s > breaks.back())) {
            throw DomainError("integrate_K_over_lag: lag grid must be ascending in (0, T - t]");
        }
        if (s > L * (1.0 + 1e-12)) {
            throw DomainError("integrate_K_over_lag: lag grid exceeds T - t");
        }
        breaks.push_back(std::min(s, L));
    }
    if (breaks.back() < L * (1.0 - 1e-14)) {
        breaks.push_back(L);
    } else {
        breaks.back() = L;
    }

    const auto& inner = gauss_legendre(quad.inner_order);
    const auto& first = gauss_legendre(quad.first_order);
    const auto& panel = gauss_legendre(quad.panel_order);
    const std::size_t n_panels = breaks.size() - 1;

    auto eval = [&](double s, double rem, double weight) {
        const Window win = window(Lag{s, rem});
        return weight * kernel_window(mu, rem, s, x, win.lo, win.hi, inner, quad.inner_refine);
    };

    double acc = 0.0;
    if (n_panels == 1) {
        const double hp = 0.25 * std::numbers::pi;
        for (std::size_t i = 0; i < first.order(); ++i) {
            const double phi = hp + hp * first.nodes()[i];
            const double sn = std::sin(phi);
            const double cs = std::cos(phi);
            acc += hp * first.weights()[i] * eval(L * sn * sn, L * cs * cs, L * std::sin(2.0 * phi));
        }
        return acc;
    }

    {
        const double ub = std::sqrt(breaks[1]);
        const double half = 0.5 * ub;
        for (std::size_t i = 0; i < first.order(); ++i) {
            const double u = half + half * first.nodes()[i];
            acc += half * first.weights()[i] * eval(u * u, L - u * u, 2.0 * u);
        }
    }
    for (std::size_t p = 1; p < n_panels; ++p) {
        const double v_hi = std::sqrt(L - breaks[p]);
        const double v_lo = (p + 1 == n_panels) ? 0.0 : std::sqrt(L - breaks[p + 1]);
        const double half = 0.5 * (v_hi - v_lo);
        const double mid = 0.5 * (v_hi + v_lo);
        for (std::size_t i = 0; i < panel.order(); ++i) {
            const double v = mid + half * panel.nodes()[i];
            acc += half * panel.weights()[i] * eval(L - v * v, v * v, 2.0 * v);
        }
    }
    return acc;
}

double integrate_K_over_lag(const ProblemSpec& spec, double t, double x, const WindowFn& window,
                            std::span<const double> s_grid, const LagQuadrature& quad) {
    spec.validate();
    if (!(t >= 0.0) || t > spec.T) {
        throw DomainError("integrate_K_over_lag: t outside [0, T]");
    }
    return integrate_K_over_lag_remaining(spec.mu, spec.T - t, x, window, s_grid, quad);
}

}  // namespace lastzero
