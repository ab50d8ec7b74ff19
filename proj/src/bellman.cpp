#include "lastzero/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lastzero/errors.hpp"

namespace lastzero {

void LatticeSpec::validate() const {
    if (n_t < 2) throw std::invalid_argument("LatticeSpec: n_t must be at least 2");
    if (n_x < 3 || n_x % 2 == 0) throw std::invalid_argument("LatticeSpec: n_x must be odd and at least 3");
    if (!std::isfinite(x_span)) throw std::invalid_argument("LatticeSpec: x_span must be finite");
}

double LatticeSpec::half_width(const ProblemSpec& spec) const {
    return x_span > 0.0 ? x_span : 6.0 * std::sqrt(spec.T) + std::abs(spec.mu) * spec.T;
}

namespace {

// Zero crossing of the continuation value c, scanning outward from the
// centre node. Returns the boundary location; the lattice edge if no
// crossing is found.
double extract_side(const std::vector<double>& c, const std::vector<double>& x, std::size_t centre, int dir) {
    const auto n = static_cast<long>(c.size());
    long i = static_cast<long>(centre);
    if (c[static_cast<std::size_t>(i)] >= 0.0) return 0.0;
    for (long j = i + dir; j >= 0 && j < n; j += dir) {
        const double cj = c[static_cast<std::size_t>(j)];
        if (cj >= 0.0) {
            const double cp = c[static_cast<std::size_t>(j - dir)];
            const double w = cp / (cp - cj);
            const double xp = x[static_cast<std::size_t>(j - dir)];
            return xp + w * (x[static_cast<std::size_t>(j)] - xp);
        }
    }
    return dir > 0 ? x.back() : x.front();
}

}  // namespace

BellmanResult bellman_solve(const ProblemSpec& spec, const LatticeSpec& lat) {
    spec.validate();
    lat.validate();
    const double mu = spec.mu;
    const double T = spec.T;
    const double X = lat.half_width(spec);
    const std::size_t nx = lat.n_x;
    const std::size_t nt = lat.n_t;
    const std::size_t centre = nx / 2;
    const double dx = 2.0 * X / static_cast<double>(nx - 1);
    const double dt_row = T / static_cast<double>(nt);
    // Sub-step each row so that the chain step dt satisfies dt <= dx^2 / 3,
    // keeping all trinomial weights well inside [0, 1].
    const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(3.0 * dt_row / (dx * dx))));
    const double dt = dt_row / static_cast<double>(m);
    if (!(dx >= std::sqrt(dt))) {
        throw LatticeTooCoarse("bellman_solve: space step below sqrt of chain time step");
    }
    const double q = (dt + mu * mu * dt * dt) / (2.0 * dx * dx);
    const double drift = mu * dt / (2.0 * dx);
    const double pu = q + drift;
    const double pd = q - drift;
    const double pm = 1.0 - pu - pd;
    if (pu < 0.0 || pd < 0.0 || pm < 0.0) {
        throw LatticeTooCoarse("bellman_solve: trinomial weights outside [0, 1]");
    }

    BellmanResult res;
    res.substeps = m;
    res.dx = dx;
    ValueSurface& vs = res.surface;
    vs.spec = spec;
    vs.source = SurfaceSource::bellman;
    vs.t_grid.resize(nt + 1);
    for (std::size_t k = 0; k <= nt; ++k) vs.t_grid[k] = T * static_cast<double>(k) / static_cast<double>(nt);
    vs.t_grid.back() = T;
    vs.x_grid.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) vs.x_grid[i] = -X + dx * static_cast<double>(i);
    vs.x_grid[centre] = 0.0;
    vs.values.assign((nt + 1) * nx, 0.0);

    BoundaryPair& bp = res.boundaries;
    bp.spec = spec;
    bp.source = "bellman";
    bp.grid = vs.t_grid;
    bp.b_minus.assign(nt + 1, 0.0);
    bp.b_plus.assign(nt + 1, 0.0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    bp.residual_minus.assign(nt + 1, nan);
    bp.residual_plus.assign(nt + 1, nan);

    std::vector<double> v(nx, 0.0);
    std::vector<double> cont(nx, 0.0);
    std::vector<double> h(nx, 0.0);
    for (std::size_t k = nt; k-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            const double t_left = vs.t_grid[k] + dt * static_cast<double>(j);
            const double tau = T - t_left;
#pragma omp parallel for schedule(static)
            for (std::size_t i = 0; i < nx; ++i) {
                h[i] = gain_remaining(mu, tau, vs.x_grid[i]);
            }
            cont[0] = 0.0;
            cont[nx - 1] = 0.0;
            for (std::size_t i = 1; i + 1 < nx; ++i) {
                cont[i] = dt * h[i] + pu * v[i + 1] + pm * v[i] + pd * v[i - 1];
            }
            v[0] = 0.0;
            v[nx - 1] = 0.0;
            for (std::size_t i = 1; i + 1 < nx; ++i) v[i] = std::min(0.0, cont[i]);
        }
        std::copy(v.begin(), v.end(), vs.values.begin() + static_cast<std::ptrdiff_t>(k * nx));
        bp.b_minus[k] = extract_side(cont, vs.x_grid, centre, -1);
        bp.b_plus[k] = extract_side(cont, vs.x_grid, centre, +1);
    }

    // Monotone up to one cell, then clamp.
    for (std::size_t k = nt; k-- > 0;) {
        const double up = bp.b_plus[k + 1] - bp.b_plus[k];
        const double down = bp.b_minus[k] - bp.b_minus[k + 1];
        const double worst = std::max(up, down);
        if (worst > dx) {
            throw LatticeTooCoarse("bellman_solve: extracted boundary not monotone at row " + std::to_string(k));
        }
        bp.max_clamp = std::max(bp.max_clamp, worst);
        bp.b_plus[k] = std::max(bp.b_plus[k], bp.b_plus[k + 1]);
        bp.b_minus[k] = std::min(bp.b_minus[k], bp.b_minus[k + 1]);
    }
    const HCurvePair hc = h_curves(spec, bp.grid);
    bp.h_minus = hc.h_minus;
    bp.h_plus = hc.h_plus;
    res.value_00 = vs.at(0, centre);
    return res;
}

OracleDistance oracle_compare(const BoundaryPair& a, const BoundaryPair& b, std::size_t n_points) {
    if (!(a.spec == b.spec)) {
        throw SpecMismatch("oracle_compare: boundary pairs belong to different problems");
    }
    if (n_points < 2) throw std::invalid_argument("oracle_compare: need at least two points");
    OracleDistance d;
    d.t_max = 0.95 * a.spec.T;
    d.n_points = n_points;
    double s2m = 0.0;
    double s2p = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double t = d.t_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
        const auto [am, ap] = interpolate_boundary(a, t);
        const auto [bm, bpl] = interpolate_boundary(b, t);
        const double em = std::abs(am - bm);
        const double ep = std::abs(ap - bpl);
        d.sup_minus = std::max(d.sup_minus, em);
        d.sup_plus = std::max(d.sup_plus, ep);
        s2m += em * em;
        s2p += ep * ep;
    }
    const double n = static_cast<double>(n_points);
    d.sup = std::max(d.sup_minus, d.sup_plus);
    d.l2_minus = std::sqrt(s2m / n);
    d.l2_plus = std::sqrt(s2p / n);
    d.l2 = std::sqrt((s2m + s2p) / (2.0 * n));
    return d;
}

}  // namespace lastzero
