#pragma once

// Value function V(t, x) from solved boundaries, the optimal prediction error
// V* = V(0, 0) + E(g), the stopping rule, and a smooth-fit diagnostic.

#include <cstddef>
#include <string>
#include <vector>

#include "lastzero/boundary.hpp"

namespace lastzero {

enum class SurfaceSource { integral_formula, bellman };

std::string to_string(SurfaceSource s);
SurfaceSource surface_source_from_string(const std::string& s);

struct ValueSurface {
    ProblemSpec spec;
    std::vector<double> t_grid;
    std::vector<double> x_grid;
    std::vector<double> values;  ///< row-major, values[i * x_grid.size() + j] = V(t_i, x_j)
    SurfaceSource source = SurfaceSource::integral_formula;

    double at(std::size_t i, std::size_t j) const { return values[i * x_grid.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * x_grid.size() + j]; }
};

/// x <= b-(t) or x >= b+(t). The stopping set is closed.
bool should_stop(const BoundaryPair& bp, double t, double x);

/// V(t, x); exactly 0 on the stopping set.
double value_at(const BoundaryPair& bp, double t, double x, const LagQuadrature& quad = {});

/// V(0, 0) + E(g).
double optimal_value_Vstar(const BoundaryPair& bp, const LagQuadrature& quad = {});

/// Surface on n_t uniform times in [0, T] and n_x uniform states spanning
/// [b-(0) - 2 sqrt(T), b+(0) + 2 sqrt(T)].
ValueSurface value_surface(const BoundaryPair& bp, std::size_t n_t, std::size_t n_x,
                           const LagQuadrature& quad = {});

struct SmoothFitSample {
    double t = 0.0;
    double boundary = 0.0;
    int side = 0;                      ///< -1 for b-, +1 for b+
    std::vector<double> eps;           ///< difference steps
    std::vector<double> inner_slope;   ///< V_x estimate just inside the continuation set
    std::vector<double> outer_slope;   ///< V_x estimate just inside the stopping set
    std::vector<double> gap;           ///< |inner - outer|
};

struct SmoothFitReport {
    std::vector<SmoothFitSample> samples;

    /// Fraction of samples whose gap shrinks at every refinement step.
    double fraction_decreasing() const;
    /// Largest gap at the finest step.
    double max_final_gap() const;
};

/// For each t and each boundary, central differences of V centred at
/// distance eps from the boundary on both sides, for
/// eps in {1e-2, 1e-3, 1e-4} * sqrt(T).
SmoothFitReport smooth_fit_diagnostic(const BoundaryPair& bp, const std::vector<double>& t_samples,
                                      const LagQuadrature& quad = {});

}  // namespace lastzero
