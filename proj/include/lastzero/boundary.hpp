#pragma once

// Optimal stopping boundaries b-(t) <= 0 <= b+(t) from the coupled pair of
// Volterra equations
//   int_0^{T-t} K(t, b-(t), s, b-(t+s), b+(t+s)) ds = 0,
//   int_0^{T-t} K(t, b+(t), s, b-(t+s), b+(t+s)) ds = 0,
// solved backward in time from b-(T) = b+(T) = 0.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lastzero/closed_forms.hpp"
#include "lastzero/kernel.hpp"

namespace lastzero {

struct SolverConfig {
    std::size_t n_steps = 400;
    std::size_t max_iter = 200;
    double tol_b = 1e-7;
    double tol_res = 1e-6;
    double damping = 0.8;
    LagQuadrature quadrature{};

    void validate() const;
};

/// Discretized boundaries on an ascending time grid t_0 = 0 < ... < t_n = T.
/// Values between nodes are linear in sqrt(T - t).
struct BoundaryPair {
    ProblemSpec spec;
    std::vector<double> grid;
    std::vector<double> b_minus;
    std::vector<double> b_plus;
    std::vector<double> h_minus;
    std::vector<double> h_plus;
    std::vector<double> residual_minus;
    std::vector<double> residual_plus;
    std::string source = "integral";
    std::optional<SolverConfig> config;
    double max_clamp = 0.0;  ///< largest monotonicity correction applied

    std::size_t size() const noexcept { return grid.size(); }

    /// Throws std::invalid_argument unless all columns have the grid's length,
    /// the grid is ascending from 0 to T, and b-(T) = b+(T) = 0.
    void check_shape() const;
};

/// Grid uniform in v = sqrt(T - t): t_k = T - T (1 - k/n)^2, k = 0..n.
std::vector<double> sqrt_time_grid(const ProblemSpec& spec, std::size_t n_steps);

/// (b-(t), b+(t)); exact at grid nodes, monotone in between.
std::pair<double, double> interpolate_boundary(const BoundaryPair& bp, double t);

/// Window (b-, b+) at the point with the given remaining time T - t >= 0.
Window interpolate_remaining(const BoundaryPair& bp, double remaining);

/// Window function for the lag integral started at grid-independent time t.
WindowFn boundary_window(const BoundaryPair& bp);

/// Lag breakpoints {t_j - t : t_j > t} for the lag integral started at t.
std::vector<double> lag_grid(const BoundaryPair& bp, double t);

/// Left-hand side of the boundary equation at grid node k, evaluated at
/// state x with the stored boundaries (including the node-k values).
double equation_residual(const BoundaryPair& bp, std::size_t k, double x, const LagQuadrature& quad);

BoundaryPair solve_boundaries(const ProblemSpec& spec, const SolverConfig& cfg = {});

/// Boundaries of the mirrored problem (-mu): b-' = -b+, b+' = -b-.
BoundaryPair mirror(const BoundaryPair& bp);

}  // namespace lastzero
