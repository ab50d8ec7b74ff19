#pragma once

// The kernel K(t, x, s, z-, z+) = E[H(t+s, x+B^mu_s) 1{z- < x+B^mu_s < z+}]
// and its integral over the lag s, which is the building block of both the
// value formula and the boundary equations.

#include <cstddef>
#include <functional>
#include <span>

#include "lastzero/closed_forms.hpp"
#include "lastzero/gauss_legendre.hpp"

namespace lastzero {

struct KernelQuery {
    double t = 0.0;        ///< start time in [0, T)
    double x = 0.0;        ///< start state
    double s = 0.0;        ///< lag in (0, T - t]
    double z_minus = 0.0;  ///< window lower edge
    double z_plus = 0.0;   ///< window upper edge
};

struct KernelOptions {
    double eps = 1e-9;             ///< absolute tolerance of the adaptive inner integral
    std::size_t inner_order = 8;   ///< Gauss-Legendre nodes per panel
};

/// Adaptive evaluation: panels are halved until two successive refinements
/// agree to within opts.eps.
double kernel_K(const ProblemSpec& spec, const KernelQuery& q, const KernelOptions& opts = {});

/// Fixed-rule kernel parameterized by remaining time tau = T - t - s > 0.
/// The x-integral runs in the standardized variable w = (y - x - mu s) / sqrt(s),
/// truncated at |w| <= 8.5, and is split at y = 0 (kink of H), at the scale
/// points y = +-2 sqrt(tau), +-5 sqrt(tau) of H, and at w = 0, +-2.5, +-5.
/// Each panel is split into 2^refine equal pieces.
double kernel_window(double mu, double tau, double s, double x, double z_minus, double z_plus,
                     const GaussLegendre& rule, int refine = 0);

/// A point on the lag axis: s and the time left after it, T - t - s.
struct Lag {
    double s;
    double remaining;
};

struct Window {
    double lo;
    double hi;
};

using WindowFn = std::function<Window(const Lag&)>;

/// Outer (lag) quadrature layout. Panels are delimited by the caller's lag
/// grid; the first panel is integrated in u = sqrt(s), the others in
/// v = sqrt(T - t - s), and a single panel covering the whole range uses
/// s = (T - t) sin^2(phi).
struct LagQuadrature {
    std::size_t first_order = 12;
    std::size_t panel_order = 3;
    std::size_t inner_order = 8;
    int inner_refine = 0;

    /// Twice the nodes everywhere; used for independent re-quadrature.
    LagQuadrature refined() const {
        return {2 * first_order, 2 * panel_order, 2 * inner_order, inner_refine};
    }
};

/// V-type integral  int_0^{T-t} K(t, x, s, window(s)) ds.
/// s_grid holds the panel breakpoints, ascending in (0, T - t]; T - t is
/// appended when missing. Returns 0 when t == T.
double integrate_K_over_lag(const ProblemSpec& spec, double t, double x, const WindowFn& window,
                            std::span<const double> s_grid, const LagQuadrature& quad = {});

/// Same, with the remaining time T - t passed directly.
double integrate_K_over_lag_remaining(double mu, double remaining, double x, const WindowFn& window,
                                      std::span<const double> s_grid, const LagQuadrature& quad);

}  // namespace lastzero
