#pragma once

// Backward induction on a trinomial Markov chain approximating B^mu.
// Serves as an independent oracle for the boundaries and the value surface.

#include <cstddef>

#include "lastzero/boundary.hpp"
#include "lastzero/value.hpp"

namespace lastzero {

struct LatticeSpec {
    std::size_t n_t = 2000;  ///< time rows; row k sits at t = kT/n_t
    std::size_t n_x = 2001;  ///< space nodes, odd so that x = 0 is a node
    double x_span = 0.0;     ///< half-width of the x range; <= 0 selects 6 sqrt(T) + |mu| T

    void validate() const;
    double half_width(const ProblemSpec& spec) const;
};

struct BellmanResult {
    ValueSurface surface;  ///< (n_t + 1) x n_x, source = bellman
    BoundaryPair boundaries;
    std::size_t substeps = 1;  ///< chain steps per time row
    double dx = 0.0;
    double value_00 = 0.0;  ///< V(0, 0) at the centre node
};

/// Throws LatticeTooCoarse if the extracted boundaries are not monotone
/// up to one space cell.
BellmanResult bellman_solve(const ProblemSpec& spec, const LatticeSpec& lat = {});

struct OracleDistance {
    double sup_minus = 0.0;
    double sup_plus = 0.0;
    double sup = 0.0;
    double l2_minus = 0.0;
    double l2_plus = 0.0;
    double l2 = 0.0;
    double t_max = 0.0;
    std::size_t n_points = 0;
};

/// Distances between two boundary pairs on [0, 0.95 T] over a uniform
/// comparison grid. L2 norms are root-mean-square over time.
/// Throws SpecMismatch if the specs differ.
OracleDistance oracle_compare(const BoundaryPair& a, const BoundaryPair& b, std::size_t n_points = 1001);

}  // namespace lastzero
