#include "lastzero/montecarlo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "lastzero/closed_forms.hpp"
#include "lastzero/errors.hpp"
#include "lastzero/philox.hpp"

namespace lastzero {

namespace {

constexpr std::size_t kChunk = 1024;
constexpr std::uint32_t kNormalStream = 0;
constexpr std::uint32_t kBridgeStream = 1;
// Smallest value uniform_open01 can return is 2^-53; a crossing probability
// below this can never fire, so its uniform is not drawn.
constexpr double kNeverFires = 0x1p-53;

std::vector<double> uniform_grid(double T, std::size_t n) {
    std::vector<double> grid(n + 1);
    for (std::size_t j = 0; j <= n; ++j) grid[j] = T * static_cast<double>(j) / static_cast<double>(n);
    grid.back() = T;
    return grid;
}

// Shortest text that reads back to the same double.
std::string format_param(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void SimConfig::validate() const {
    if (n_paths < 1) throw std::invalid_argument("SimConfig: n_paths must be at least 1");
    if (n_steps < 2) throw std::invalid_argument("SimConfig: n_steps must be at least 2");
    if (n_steps > std::numeric_limits<std::uint32_t>::max() / 2) {
        throw std::invalid_argument("SimConfig: n_steps too large");
    }
}

std::span<const double> PathEnsemble::path(std::size_t p) const {
    const std::size_t w = cfg.n_steps + 1;
    if (!stored() || p >= g.size()) throw std::out_of_range("PathEnsemble: path not stored");
    return {paths.data() + p * w, w};
}

void generate_path(const ProblemSpec& spec, const SimConfig& cfg, std::uint64_t path_id, std::span<double> out) {
    const std::size_t n = cfg.n_steps;
    if (out.size() != n + 1) throw std::invalid_argument("generate_path: buffer size must be n_steps + 1");
    const double dt = spec.T / static_cast<double>(n);
    const double sd = std::sqrt(dt);
    const double step = spec.mu * dt;
    const double sign = cfg.mirror_noise ? -1.0 : 1.0;
    const PhiloxStream rng(cfg.seed, kNormalStream, path_id);
    out[0] = 0.0;
    for (std::size_t j = 0; j < n; j += 2) {
        const auto z = rng.normals(static_cast<std::uint32_t>(j / 2));
        out[j + 1] = out[j] + step + sd * sign * z[0];
        if (j + 1 < n) out[j + 2] = out[j + 1] + step + sd * sign * z[1];
    }
}

double last_zero_of_path(std::span<const double> path, double T, const SimConfig& cfg, std::uint64_t path_id) {
    if (path.size() < 2) throw std::invalid_argument("last_zero_of_path: path needs at least two points");
    const std::size_t n = path.size() - 1;
    const double dt = T / static_cast<double>(n);
    if (path[n] == 0.0) return T;
    const PhiloxStream bridge(cfg.seed, kBridgeStream, path_id);
    for (std::size_t j = n; j-- > 0;) {
        const double a = path[j];
        const double b = path[j + 1];
        const double t0 = T * static_cast<double>(j) / static_cast<double>(n);
        if (a * b < 0.0) {
            return t0 + dt * a / (a - b);
        }
        if (cfg.bridge_correction && a != 0.0) {
            const double p = std::exp(-2.0 * a * b / dt);
            if (p >= kNeverFires) {
                const auto u = bridge.uniforms(static_cast<std::uint32_t>(j));
                if (u[0] < p) return t0 + dt * u[1];
            }
        }
        if (a == 0.0) {
            if (j == 0 && cfg.bridge_correction) {
                // Last zero of the bridge from 0 to b over [0, h]:
                // P(g <= s) = 2 Phi(|b| sqrt(s / (h (h - s)))) - 1, inverted.
                const double u = bridge.uniforms(0)[1];
                const double z = std::numbers::sqrt2 * boost::math::erf_inv(u);
                return dt * dt * z * z / (b * b + dt * z * z);
            }
            return t0;
        }
    }
    return 0.0;
}

PathEnsemble simulate_paths(const ProblemSpec& spec, const SimConfig& cfg) {
    spec.validate();
    cfg.validate();
    PathEnsemble ens;
    ens.spec = spec;
    ens.cfg = cfg;
    ens.grid = uniform_grid(spec.T, cfg.n_steps);
    const std::size_t w = cfg.n_steps + 1;
    ens.g.resize(cfg.n_paths);
    ens.terminal.resize(cfg.n_paths);
    const bool store = cfg.n_paths <= kMaxStoredPaths;
    if (store) ens.paths.resize(cfg.n_paths * w);
    const auto n_paths = static_cast<long long>(cfg.n_paths);
#pragma omp parallel
    {
        std::vector<double> buf(w);
#pragma omp for schedule(static)
        for (long long p = 0; p < n_paths; ++p) {
            const auto id = static_cast<std::size_t>(p);
            std::span<double> out = store ? std::span<double>(ens.paths.data() + id * w, w) : std::span<double>(buf);
            generate_path(spec, cfg, id, out);
            ens.g[id] = last_zero_of_path(out, spec.T, cfg, id);
            ens.terminal[id] = out[cfg.n_steps];
        }
    }
    return ens;
}

Policy Policy::optimal(std::shared_ptr<const BoundaryPair> bp) {
    if (!bp) throw std::invalid_argument("optimal policy needs boundaries");
    return {PolicyKind::optimal, 1.0, std::move(bp)};
}

Policy Policy::fixed_time(double c) {
    if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("fixed_time: time must be finite and >= 0");
    return {PolicyKind::fixed_time, c, nullptr};
}

Policy Policy::sqrt_rule(double z) {
    if (!std::isfinite(z) || z < 0.0) throw std::invalid_argument("sqrt_rule: z must be finite and >= 0");
    return {PolicyKind::sqrt_rule, z, nullptr};
}

Policy Policy::scaled_optimal(std::shared_ptr<const BoundaryPair> bp, double factor) {
    if (!bp) throw std::invalid_argument("scaled_optimal policy needs boundaries");
    if (!std::isfinite(factor) || factor < 0.0) throw std::invalid_argument("scaled_optimal: factor must be >= 0");
    return {PolicyKind::scaled_optimal, factor, std::move(bp)};
}

std::string Policy::name() const {
    switch (kind) {
        case PolicyKind::optimal:
            return "optimal";
        case PolicyKind::fixed_time:
            return "fixed_time:" + format_param(param);
        case PolicyKind::sqrt_rule:
            return "sqrt_rule:" + format_param(param);
        case PolicyKind::scaled_optimal:
            return "scaled_optimal:" + format_param(param);
    }
    return "unknown";
}

std::pair<double, double> Policy::window(const ProblemSpec& spec, double t) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind) {
        case PolicyKind::fixed_time:
            return t >= param ? std::pair{0.0, 0.0} : std::pair{-inf, inf};
        case PolicyKind::sqrt_rule: {
            const double w = param * std::sqrt(std::max(0.0, spec.T - t));
            return {-w, w};
        }
        case PolicyKind::optimal:
        case PolicyKind::scaled_optimal: {
            const auto [lo, hi] = interpolate_boundary(*boundaries, t);
            return {param * lo, param * hi};
        }
    }
    return {0.0, 0.0};
}

Policy parse_policy(const std::string& text, std::shared_ptr<const BoundaryPair> bp) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const bool has_arg = colon != std::string::npos;
    auto arg = [&]() {
        if (!has_arg) throw std::invalid_argument("policy '" + head + "' needs a parameter");
        const std::string s = text.substr(colon + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw std::invalid_argument("bad policy parameter '" + s + "'");
        return v;
    };
    if (head == "optimal") {
        if (has_arg) throw std::invalid_argument("policy 'optimal' takes no parameter");
        return Policy::optimal(std::move(bp));
    }
    if (head == "fixed_time") return Policy::fixed_time(arg());
    if (head == "sqrt_rule") return Policy::sqrt_rule(arg());
    if (head == "scaled_optimal") {
        const double f = arg();
        return Policy::scaled_optimal(std::move(bp), f);
    }
    throw std::invalid_argument("unknown policy '" + head + "'");
}

std::pair<double, double> PolicyEvaluation::paired_difference(std::size_t a, std::size_t b) const {
    const auto& la = loss.at(a);
    const auto& lb = loss.at(b);
    const std::size_t n = la.size();
    if (n < 2) return {n == 1 ? la[0] - lb[0] : 0.0, 0.0};
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = la[i] - lb[i];
        s += d;
        s2 += d * d;
    }
    const double nn = static_cast<double>(n);
    const double mean = s / nn;
    const double var = std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0));
    return {mean, std::sqrt(var / nn)};
}

PolicyEvaluation evaluate_policies(const ProblemSpec& spec, const std::vector<Policy>& policies,
                                   const SimConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (policies.empty()) throw std::invalid_argument("evaluate_policies: no policies given");
    for (const auto& pol : policies) {
        if (pol.boundaries && !(pol.boundaries->spec == spec)) {
            throw SpecMismatch("evaluate_policies: boundaries belong to a different problem");
        }
    }
    const std::size_t n = cfg.n_steps;
    const std::size_t np = policies.size();
    const auto grid = uniform_grid(spec.T, n);
    // Stopping windows on the simulation grid, one row per policy.
    std::vector<double> lo(np * (n + 1));
    std::vector<double> hi(np * (n + 1));
    for (std::size_t q = 0; q < np; ++q) {
        for (std::size_t j = 0; j <= n; ++j) {
            const auto [a, b] = policies[q].window(spec, grid[j]);
            lo[q * (n + 1) + j] = a;
            hi[q * (n + 1) + j] = b;
        }
    }

    PolicyEvaluation ev;
    ev.g.resize(cfg.n_paths);
    ev.tau.assign(np, std::vector<double>(cfg.n_paths));
    ev.loss.assign(np, std::vector<double>(cfg.n_paths));

    const std::size_t n_chunks = (cfg.n_paths + kChunk - 1) / kChunk;
    std::vector<double> sums(n_chunks * np, 0.0);
    std::vector<double> sq(n_chunks * np, 0.0);
    const auto nc = static_cast<long long>(n_chunks);
#pragma omp parallel
    {
        std::vector<double> buf(n + 1);
#pragma omp for schedule(dynamic, 1)
        for (long long c = 0; c < nc; ++c) {
            const auto chunk = static_cast<std::size_t>(c);
            const std::size_t begin = chunk * kChunk;
            const std::size_t end = std::min(cfg.n_paths, begin + kChunk);
            for (std::size_t p = begin; p < end; ++p) {
                generate_path(spec, cfg, p, buf);
                const double g = last_zero_of_path(buf, spec.T, cfg, p);
                ev.g[p] = g;
                for (std::size_t q = 0; q < np; ++q) {
                    const double* l = lo.data() + q * (n + 1);
                    const double* h = hi.data() + q * (n + 1);
                    std::size_t j = 0;
                    while (j < n && buf[j] > l[j] && buf[j] < h[j]) ++j;
                    const double tau = grid[j];
                    const double loss = std::abs(g - tau);
                    ev.tau[q][p] = tau;
                    ev.loss[q][p] = loss;
                    sums[chunk * np + q] += loss;
                    sq[chunk * np + q] += loss * loss;
                }
            }
        }
    }

    const double nn = static_cast<double>(cfg.n_paths);
    for (std::size_t q = 0; q < np; ++q) {
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            s += sums[c * np + q];
            s2 += sq[c * np + q];
        }
        PolicyReport r;
        r.policy_name = policies[q].name();
        r.estimate = s / nn;
        const double var = cfg.n_paths > 1 ? std::max(0.0, (s2 - nn * r.estimate * r.estimate) / (nn - 1.0)) : 0.0;
        r.std_error = std::sqrt(var / nn);
        r.n_paths = cfg.n_paths;
        r.n_steps = cfg.n_steps;
        r.seed = cfg.seed;
        r.spec = spec;
        ev.reports.push_back(r);
    }
    return ev;
}

PolicyReport evaluate_policy(const ProblemSpec& spec, const Policy& policy, const SimConfig& cfg) {
    return evaluate_policies(spec, {policy}, cfg).reports.front();
}

double ks_distance_arcsine(std::vector<double> sample, double T) {
    if (sample.empty()) throw std::invalid_argument("ks_distance_arcsine: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = arcsine_cdf(std::clamp(sample[i], 0.0, T), T);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace lastzero
