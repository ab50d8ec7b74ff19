#include "lastzero/value.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lastzero/errors.hpp"

namespace lastzero {

std::string to_string(SurfaceSource s) {
    return s == SurfaceSource::bellman ? "bellman" : "integral_formula";
}

SurfaceSource surface_source_from_string(const std::string& s) {
    if (s == "bellman") return SurfaceSource::bellman;
    if (s == "integral_formula") return SurfaceSource::integral_formula;
    throw SchemaError("unknown surface source '" + s + "'");
}

bool should_stop(const BoundaryPair& bp, double t, double x) {
    const auto [lo, hi] = interpolate_boundary(bp, t);
    return x <= lo || x >= hi;
}

double value_at(const BoundaryPair& bp, double t, double x, const LagQuadrature& quad) {
    if (!(t >= 0.0) || t > bp.spec.T) {
        throw DomainError("value_at: t outside [0, T]");
    }
    if (t == bp.spec.T || should_stop(bp, t, x)) {
        return 0.0;
    }
    const auto lags = lag_grid(bp, t);
    return integrate_K_over_lag_remaining(bp.spec.mu, bp.spec.T - t, x, boundary_window(bp), lags, quad);
}

double optimal_value_Vstar(const BoundaryPair& bp, const LagQuadrature& quad) {
    return value_at(bp, 0.0, 0.0, quad) + mean_g(bp.spec);
}

ValueSurface value_surface(const BoundaryPair& bp, std::size_t n_t, std::size_t n_x,
                           const LagQuadrature& quad) {
    if (n_t < 2 || n_x < 2) {
        throw std::invalid_argument("value_surface: need at least 2 points per axis");
    }
    const double T = bp.spec.T;
    ValueSurface vs;
    vs.spec = bp.spec;
    vs.source = SurfaceSource::integral_formula;
    vs.t_grid.resize(n_t);
    for (std::size_t i = 0; i < n_t; ++i) {
        vs.t_grid[i] = T * static_cast<double>(i) / static_cast<double>(n_t - 1);
    }
    vs.t_grid.back() = T;
    const double lo = bp.b_minus.front() - 2.0 * std::sqrt(T);
    const double hi = bp.b_plus.front() + 2.0 * std::sqrt(T);
    vs.x_grid.resize(n_x);
    for (std::size_t j = 0; j < n_x; ++j) {
        vs.x_grid[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n_x - 1);
    }
    vs.values.assign(n_t * n_x, 0.0);
    const auto cells = static_cast<long long>(n_t * n_x);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long c = 0; c < cells; ++c) {
        const auto i = static_cast<std::size_t>(c) / n_x;
        const auto j = static_cast<std::size_t>(c) % n_x;
        vs.values[static_cast<std::size_t>(c)] = value_at(bp, vs.t_grid[i], vs.x_grid[j], quad);
    }
    return vs;
}

double SmoothFitReport::fraction_decreasing() const {
    if (samples.empty()) return 0.0;
    std::size_t ok = 0;
    for (const auto& s : samples) {
        bool dec = true;
        for (std::size_t i = 1; i < s.gap.size(); ++i) {
            dec = dec && s.gap[i] <= s.gap[i - 1];
        }
        ok += dec ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(samples.size());
}

double SmoothFitReport::max_final_gap() const {
    double g = 0.0;
    for (const auto& s : samples) {
        if (!s.gap.empty()) g = std::max(g, s.gap.back());
    }
    return g;
}

SmoothFitReport smooth_fit_diagnostic(const BoundaryPair& bp, const std::vector<double>& t_samples,
                                      const LagQuadrature& quad) {
    const double T = bp.spec.T;
    SmoothFitReport report;
    for (double t : t_samples) {
        if (!(t > 0.0) || !(t < T)) {
            throw DomainError("smooth_fit_diagnostic: sample times must be interior");
        }
        const auto [bm, bpl] = interpolate_boundary(bp, t);
        for (int side : {-1, +1}) {
            SmoothFitSample s;
            s.t = t;
            s.side = side;
            s.boundary = side > 0 ? bpl : bm;
            // Direction pointing into the continuation set.
            const double in = side > 0 ? -1.0 : 1.0;
            for (double e : {1e-2, 1e-3, 1e-4}) {
                const double eps = e * std::sqrt(T);
                auto slope_at = [&](double dir) {
                    // Central difference centred at boundary + dir * eps,
                    // oriented along +x.
                    const double xa = s.boundary + dir * 0.5 * eps;
                    const double xb = s.boundary + dir * 1.5 * eps;
                    const double va = value_at(bp, t, xa, quad);
                    const double vb = value_at(bp, t, xb, quad);
                    return (xb > xa ? (vb - va) : (va - vb)) / eps;
                };
                const double inner = slope_at(in);
                const double outer = slope_at(-in);
                s.eps.push_back(eps);
                s.inner_slope.push_back(inner);
                s.outer_slope.push_back(outer);
                s.gap.push_back(std::abs(inner - outer));
            }
            report.samples.push_back(std::move(s));
        }
    }
    return report;
}

}  // namespace lastzero
