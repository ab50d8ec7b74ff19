#include "lastzero/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lastzero/errors.hpp"

namespace lastzero {

void SolverConfig::validate() const {
    if (n_steps < 2) throw std::invalid_argument("SolverConfig: n_steps must be >= 2");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be positive");
    if (!(tol_b > 0.0)) throw std::invalid_argument("SolverConfig: tol_b must be positive");
    if (!(tol_res > 0.0)) throw std::invalid_argument("SolverConfig: tol_res must be positive");
    if (!(damping > 0.0) || damping > 1.0) {
        throw std::invalid_argument("SolverConfig: damping must lie in (0, 1]");
    }
}

void BoundaryPair::check_shape() const {
    const std::size_t n = grid.size();
    if (n < 2) throw std::invalid_argument("BoundaryPair: grid needs at least two points");
    for (const auto* col : {&b_minus, &b_plus, &h_minus, &h_plus, &residual_minus, &residual_plus}) {
        if (col->size() != n) throw std::invalid_argument("BoundaryPair: column length mismatch");
    }
    if (grid.front() != 0.0 || grid.back() != spec.T) {
        throw std::invalid_argument("BoundaryPair: grid must run from 0 to T");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("BoundaryPair: grid not ascending");
    }
    if (b_minus.back() != 0.0 || b_plus.back() != 0.0) {
        throw std::invalid_argument("BoundaryPair: boundaries must vanish at T");
    }
}

std::vector<double> sqrt_time_grid(const ProblemSpec& spec, std::size_t n_steps) {
    std::vector<double> grid(n_steps + 1);
    const double n = static_cast<double>(n_steps);
    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double v = 1.0 - static_cast<double>(k) / n;
        grid[k] = spec.T - spec.T * v * v;
    }
    grid.front() = 0.0;
    grid.back() = spec.T;
    return grid;
}

namespace {

// Index j with rem_j >= remaining >= rem_{j+1}, rem_j = T - grid[j].
std::size_t locate_remaining(const BoundaryPair& bp, double remaining) {
    const double T = bp.spec.T;
    std::size_t lo = 0;
    std::size_t hi = bp.grid.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (T - bp.grid[mid] >= remaining) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace

Window interpolate_remaining(const BoundaryPair& bp, double remaining) {
    const double T = bp.spec.T;
    if (remaining <= 0.0) {
        return {bp.b_minus.back(), bp.b_plus.back()};
    }
    if (remaining >= T) {
        return {bp.b_minus.front(), bp.b_plus.front()};
    }
    const std::size_t j = locate_remaining(bp, remaining);
    const double v0 = std::sqrt(T - bp.grid[j]);
    const double v1 = std::sqrt(T - bp.grid[j + 1]);
    const double v = std::sqrt(remaining);
    const double w = std::clamp((v0 - v) / (v0 - v1), 0.0, 1.0);
    return {bp.b_minus[j] + w * (bp.b_minus[j + 1] - bp.b_minus[j]),
            bp.b_plus[j] + w * (bp.b_plus[j + 1] - bp.b_plus[j])};
}

std::pair<double, double> interpolate_boundary(const BoundaryPair& bp, double t) {
    if (!(t >= 0.0) || t > bp.spec.T) {
        throw DomainError("interpolate_boundary: t outside [0, T]");
    }
    // Exact at nodes, including t = T.
    const auto it = std::lower_bound(bp.grid.begin(), bp.grid.end(), t);
    if (it != bp.grid.end() && *it == t) {
        const auto j = static_cast<std::size_t>(it - bp.grid.begin());
        return {bp.b_minus[j], bp.b_plus[j]};
    }
    const Window w = interpolate_remaining(bp, bp.spec.T - t);
    return {w.lo, w.hi};
}

WindowFn boundary_window(const BoundaryPair& bp) {
    return [&bp](const Lag& lag) { return interpolate_remaining(bp, lag.remaining); };
}

std::vector<double> lag_grid(const BoundaryPair& bp, double t) {
    const double T = bp.spec.T;
    const double rem = T - t;
    std::vector<double> out;
    for (std::size_t j = 0; j < bp.grid.size(); ++j) {
        if (bp.grid[j] > t) {
            const double s = rem - (T - bp.grid[j]);
            if (s > 0.0 && (out.empty() || s > out.back())) {
                out.push_back(s);
            }
        }
    }
    if (!out.empty()) {
        out.back() = rem;
    }
    return out;
}

double equation_residual(const BoundaryPair& bp, std::size_t k, double x, const LagQuadrature& quad) {
    if (k + 1 >= bp.grid.size()) {
        return 0.0;
    }
    const double rem = bp.spec.T - bp.grid[k];
    const auto lags = lag_grid(bp, bp.grid[k]);
    return integrate_K_over_lag_remaining(bp.spec.mu, rem, x, boundary_window(bp), lags, quad);
}

namespace {

// Root of an increasing function phi on [lo, hi] with phi(lo) < 0 < phi(hi):
// damped Newton steps whose slope comes from one-sided differences, with
// bisection when a step leaves the bracket or fails to reduce |phi|.
struct ScalarRoot {
    double x;
    double fx;
    std::size_t evals;
};

template <typename Phi>
ScalarRoot damped_root(Phi&& phi, double lo, double flo, double hi, double fhi, double x0,
                       const SolverConfig& cfg, std::size_t step) {
    double a = lo, fa = flo, b = hi, fb = fhi;
    double x = (x0 > a && x0 < b) ? x0 : a - fa * (b - a) / (fb - fa);
    double fx = phi(x);
    std::size_t evals = 1;

    // Initial slope: one-sided difference at x.
    const double dh = std::max(10.0 * cfg.tol_b, 1e-6 * (b - a));
    const double xh = (x + dh < b) ? x + dh : x - dh;
    const double fxh = phi(xh);
    ++evals;
    double slope = (fxh - fx) / (xh - x);

    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        if (fx < 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        double next;
        if (slope > 0.0 && std::isfinite(slope)) {
            next = x - cfg.damping * fx / slope;
        } else {
            next = 0.5 * (a + b);
        }
        if (!(next > a && next < b)) {
            next = 0.5 * (a + b);
        }
        const double fnext = phi(next);
        ++evals;
        const double step_size = std::abs(next - x);
        if (std::abs(fnext) > std::abs(fx) && step_size > cfg.tol_b) {
            // No progress: bisect the bracket instead.
            if (fnext < 0.0) {
                a = next;
                fa = fnext;
            } else {
                b = next;
                fb = fnext;
            }
            const double mid = 0.5 * (a + b);
            const double fmid = phi(mid);
            ++evals;
            x = mid;
            fx = fmid;
            slope = (fb - fa) / (b - a);
            continue;
        }
        slope = (fnext - fx) / (next - x);
        x = next;
        fx = fnext;
        if ((step_size <= cfg.tol_b && std::abs(fx) <= cfg.tol_res) || (b - a) <= cfg.tol_b) {
            return {x, fx, evals};
        }
    }
    std::ostringstream msg;
    msg << "boundary solver: no convergence at step " << step << " (residual " << fx << ")";
    throw NonConvergence(step, fx, msg.str());
}

// Solve one side at node k. `sign` = +1 for b+, -1 for b-. The search runs
// in d = sign * x, where the residual (times sign for b-) increases with d.
double solve_side(BoundaryPair& work, std::size_t k, int sign, const SolverConfig& cfg,
                  double& clamp_out, double& residual_out) {
    auto& b = sign > 0 ? work.b_plus : work.b_minus;
    const double rem = work.spec.T - work.grid[k];
    const auto lags = lag_grid(work, work.grid[k]);
    const WindowFn window = boundary_window(work);
    const double mu = work.spec.mu;
    const double sgn = static_cast<double>(sign);

    auto phi = [&](double d) {
        b[k] = sgn * d;
        return integrate_K_over_lag_remaining(mu, rem, sgn * d, window, lags, cfg.quadrature);
    };

    const double h = sgn * (sign > 0 ? work.h_plus[k] : work.h_minus[k]);
    const double next = sgn * b[k + 1];
    double lo = std::max(h, next);
    const double warm = sgn * b[k];

    double flo = phi(lo);
    clamp_out = 0.0;
    if (flo >= 0.0) {
        // The root lies at or below the lower bound of the admissible range.
        if (lo > h) {
            const double fh = phi(h);
            double root = h;
            if (fh < 0.0) {
                const ScalarRoot r = damped_root(phi, h, fh, lo, flo, 0.5 * (h + lo), cfg, k);
                root = r.x;
            }
            clamp_out = lo - root;
        }
        if (flo > cfg.tol_res && lo == h) {
            throw InvariantViolation("boundary solver: no root outside {H < 0} at step " +
                                     std::to_string(k));
        }
        b[k] = sgn * lo;
        residual_out = phi(lo);
        return sgn * lo;
    }

    double width = std::max(1e-3 * std::sqrt(rem), 4.0 * std::abs(warm - lo));
    if (k + 2 < work.grid.size()) {
        width = std::max(width, 4.0 * std::abs(b[k + 1] - b[k + 2]));
    }
    double hi = lo + width;
    double fhi = phi(hi);
    int expansions = 0;
    while (fhi < 0.0) {
        lo = hi;
        flo = fhi;
        width *= 2.0;
        hi = lo + width;
        fhi = phi(hi);
        if (++expansions > 60) {
            throw NonConvergence(k, fhi, "boundary solver: failed to bracket the boundary");
        }
    }
    const ScalarRoot r = damped_root(phi, lo, flo, hi, fhi, warm, cfg, k);
    b[k] = sgn * r.x;
    residual_out = r.fx;
    return sgn * r.x;
}

}  // namespace

BoundaryPair solve_boundaries(const ProblemSpec& spec, const SolverConfig& cfg) {
    spec.validate();
    cfg.validate();
    const std::size_t n = cfg.n_steps;

    BoundaryPair bp;
    bp.spec = spec;
    bp.grid = sqrt_time_grid(spec, n);
    const HCurvePair hc = h_curves(spec, bp.grid);
    bp.h_minus = hc.h_minus;
    bp.h_plus = hc.h_plus;
    bp.b_minus.assign(n + 1, 0.0);
    bp.b_plus.assign(n + 1, 0.0);
    bp.residual_minus.assign(n + 1, 0.0);
    bp.residual_plus.assign(n + 1, 0.0);
    bp.config = cfg;

    for (std::size_t kk = n; kk-- > 0;) {
        const std::size_t k = kk;
        // Warm start from the next node, clipped outward to the H-zero curves.
        bp.b_plus[k] = std::max(bp.b_plus[k + 1], bp.h_plus[k]);
        bp.b_minus[k] = std::min(bp.b_minus[k + 1], bp.h_minus[k]);

        double clamp_p = 0.0, clamp_m = 0.0, res_p = 0.0, res_m = 0.0;
        bool converged = false;
        for (std::size_t round = 0; round < cfg.max_iter; ++round) {
            solve_side(bp, k, +1, cfg, clamp_p, res_p);
            solve_side(bp, k, -1, cfg, clamp_m, res_m);
            // The two equations couple only through the node-k window edge.
            // Stop once re-solving b- leaves the b+ equation satisfied.
            const double res_p_now = equation_residual(bp, k, bp.b_plus[k], cfg.quadrature);
            const bool settled = std::abs(res_p_now - res_p) <= 1e-3 * cfg.tol_res;
            res_p = res_p_now;
            if (settled && (clamp_p > 0.0 || std::abs(res_p) <= cfg.tol_res)) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw NonConvergence(k, std::max(std::abs(res_p), std::abs(res_m)),
                                 "boundary solver: coupled iteration did not settle at step " +
                                     std::to_string(k));
        }
        bp.residual_plus[k] = res_p;
        bp.residual_minus[k] = res_m;

        const double clamp = std::max(clamp_p, clamp_m);
        bp.max_clamp = std::max(bp.max_clamp, clamp);
        if (clamp > 10.0 * cfg.tol_b) {
            throw InvariantViolation("boundary solver: monotonicity correction of " +
                                     std::to_string(clamp) + " at step " + std::to_string(k) +
                                     " exceeds 10 tol_b; refine the grid");
        }
    }
    return bp;
}

BoundaryPair mirror(const BoundaryPair& bp) {
    BoundaryPair out = bp;
    out.spec = bp.spec.mirrored();
    const std::size_t n = bp.size();
    for (std::size_t i = 0; i < n; ++i) {
        out.b_minus[i] = -bp.b_plus[i];
        out.b_plus[i] = -bp.b_minus[i];
        out.h_minus[i] = -bp.h_plus[i];
        out.h_plus[i] = -bp.h_minus[i];
        out.residual_minus[i] = bp.residual_plus[i];
        out.residual_plus[i] = bp.residual_minus[i];
    }
    return out;
}

}  // namespace lastzero
