#pragma once

// Scalar building blocks for the last-zero prediction problem of Brownian
// motion with drift: normal distribution, running-maximum law, the gain
// function H and its zero curves, and the law of the last zero g.

#include <span>
#include <utility>
#include <vector>

namespace lastzero {

/// One instance of the problem: drift mu and horizon T.
struct ProblemSpec {
    double mu = 0.0;
    double T = 1.0;

    /// Throws DomainError unless T is positive and finite and mu is finite.
    void validate() const;

    /// The problem with the drift reversed; its solution is the mirror image.
    ProblemSpec mirrored() const { return {-mu, T}; }

    friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------

double norm_pdf(double z);

/// Phi(z) evaluated through erfc on both sides so that neither tail loses
/// digits to cancellation.
double norm_cdf(double z);

/// log Phi(z), accurate deep into the left tail where Phi underflows.
double log_norm_cdf(double z);

/// exp(e) * Phi(z) without overflow/underflow of the individual factors.
double exp_times_norm_cdf(double e, double z);

// ---------------------------------------------------------------------------
// Running maximum of B^nu
// ---------------------------------------------------------------------------

/// P(max_{0<=r<=t} (nu r + B_r) <= x) for t > 0, x >= 0.
double max_cdf(double nu, double t, double x);

/// d/dx of max_cdf.
double max_cdf_dx(double nu, double t, double x);

// ---------------------------------------------------------------------------
// Gain function
// ---------------------------------------------------------------------------

/// H(t, x) = 2 P(no zero of B^mu on [t, T] | B^mu_t = x) - 1, with H(t, 0) = -1.
/// Requires 0 <= t < T.
double gain_H(const ProblemSpec& spec, double t, double x);

/// Same function parameterized by the remaining time tau = T - t > 0.
/// This is the form used inside integrals, where tau is known more
/// accurately than T - t.
double gain_remaining(double mu, double tau, double x);

/// Gaussian density of B^mu_s at b (mean mu s, variance s).
double density_f(const ProblemSpec& spec, double s, double b);

struct HCurvePair {
    std::vector<double> grid;
    std::vector<double> h_minus;
    std::vector<double> h_plus;
};

/// Zero curves of H: {H < 0} = {h_minus(t) < x < h_plus(t)}.
HCurvePair h_curves(const ProblemSpec& spec, std::span<const double> grid);

/// (h_minus, h_plus) at a single remaining time tau >= 0.
std::pair<double, double> h_pair_remaining(double mu, double tau);

// ---------------------------------------------------------------------------
// Law of the last zero g
// ---------------------------------------------------------------------------

/// P(g <= t) for 0 < t < T.
double g_cdf(const ProblemSpec& spec, double t);

/// E(g).
double mean_g(const ProblemSpec& spec);

/// Arcsine law P(g <= t) for zero drift; reference for tests and plots.
double arcsine_cdf(double t, double T);

}  // namespace lastzero
