#include "lastzero/gauss_legendre.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace lastzero {

GaussLegendre::GaussLegendre(std::size_t order) : nodes_(order), weights_(order) {
    if (order == 0) {
        throw std::invalid_argument("GaussLegendre: order must be positive");
    }
    const std::size_t n = order;
    // Newton iteration on P_n from the Chebyshev-like initial guesses.
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                const double jj = static_cast<double>(j);
                p0 = ((2.0 * jj - 1.0) * z * p1 - (jj - 1.0) * p2) / jj;
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes_[i] = -z;
        nodes_[n - 1 - i] = z;
        weights_[i] = w;
        weights_[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        nodes_[n / 2] = 0.0;
    }
}

const GaussLegendre& gauss_legendre(std::size_t order) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<GaussLegendre>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) {
        slot = std::make_unique<GaussLegendre>(order);
    }
    return *slot;
}

}  // namespace lastzero
