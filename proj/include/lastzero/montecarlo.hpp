#pragma once

// Monte Carlo evaluation of E|g - tau| for stopping rules on exactly
// simulated Gaussian paths.
//
// Randomness: Philox4x32-10 keyed by the seed. Normals for path p come
// from stream 0, bridge uniforms from stream 1, both addressed by p, so
// results do not depend on thread count or scheduling.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lastzero/boundary.hpp"

namespace lastzero {

struct SimConfig {
    std::size_t n_paths = 100000;
    std::size_t n_steps = 4000;
    std::uint64_t seed = 20240601;
    bool bridge_correction = true;
    bool mirror_noise = false;  ///< negate every normal draw (paths of the mirrored problem)

    void validate() const;
};

/// Paths are stored only when n_paths <= kMaxStoredPaths.
inline constexpr std::size_t kMaxStoredPaths = 10000;

struct PathEnsemble {
    ProblemSpec spec;
    SimConfig cfg;
    std::vector<double> grid;      ///< n_steps + 1 times
    std::vector<double> g;         ///< last zero per path
    std::vector<double> terminal;  ///< B^mu_T per path
    std::vector<double> paths;     ///< row-major n_paths x (n_steps + 1), empty if not stored

    bool stored() const noexcept { return !paths.empty(); }
    std::span<const double> path(std::size_t p) const;
};

PathEnsemble simulate_paths(const ProblemSpec& spec, const SimConfig& cfg);

/// Fill one path: x_0 = 0, x_{j+1} = x_j + mu dt + sqrt(dt) Z_j.
void generate_path(const ProblemSpec& spec, const SimConfig& cfg, std::uint64_t path_id, std::span<double> out);

/// Last zero on the uniform grid of `path` over [0, T]. Bridge uniforms
/// are drawn from (cfg.seed, stream 1, path_id) when enabled.
double last_zero_of_path(std::span<const double> path, double T, const SimConfig& cfg, std::uint64_t path_id);

enum class PolicyKind { optimal, fixed_time, sqrt_rule, scaled_optimal };

struct Policy {
    PolicyKind kind = PolicyKind::fixed_time;
    double param = 0.0;  ///< c, z or scale factor
    std::shared_ptr<const BoundaryPair> boundaries;

    static Policy optimal(std::shared_ptr<const BoundaryPair> bp);
    static Policy fixed_time(double c);
    static Policy sqrt_rule(double z);
    static Policy scaled_optimal(std::shared_ptr<const BoundaryPair> bp, double factor);

    std::string name() const;
    /// Stopping window (lo, hi) at time t: stop iff x <= lo or x >= hi.
    std::pair<double, double> window(const ProblemSpec& spec, double t) const;
};

/// Parses "optimal", "fixed_time:C", "sqrt_rule:Z", "scaled_optimal:F".
/// Throws std::invalid_argument for unknown names or missing boundaries.
Policy parse_policy(const std::string& text, std::shared_ptr<const BoundaryPair> bp);

struct PolicyReport {
    std::string policy_name;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    ProblemSpec spec;
};

struct PolicyEvaluation {
    std::vector<PolicyReport> reports;
    std::vector<double> g;                     ///< per path
    std::vector<std::vector<double>> tau;      ///< [policy][path]
    std::vector<std::vector<double>> loss;     ///< [policy][path] |g - tau|

    /// Mean and standard error of loss[a] - loss[b] over paths.
    std::pair<double, double> paired_difference(std::size_t a, std::size_t b) const;
};

/// All policies on the same paths (common random numbers).
PolicyEvaluation evaluate_policies(const ProblemSpec& spec, const std::vector<Policy>& policies, const SimConfig& cfg);

PolicyReport evaluate_policy(const ProblemSpec& spec, const Policy& policy, const SimConfig& cfg);

/// Kolmogorov-Smirnov distance between the empirical law of `sample` and
/// the arcsine law on [0, T].
double ks_distance_arcsine(std::vector<double> sample, double T);

}  // namespace lastzero
