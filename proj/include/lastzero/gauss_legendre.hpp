#pragma once

#include <cstddef>
#include <vector>

namespace lastzero {

/// Gauss-Legendre rule on [-1, 1]. Immutable after construction.
class GaussLegendre {
public:
    explicit GaussLegendre(std::size_t order);

    std::size_t order() const noexcept { return nodes_.size(); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// Integral of f over [a, b].
    template <typename F>
    double integrate(F&& f, double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            acc += weights_[i] * f(mid + half * nodes_[i]);
        }
        return acc * half;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Shared rule of the given order (built once per order, thread-safe).
const GaussLegendre& gauss_legendre(std::size_t order);

}  // namespace lastzero
