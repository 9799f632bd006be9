#pragma once

#include <random>
#include <stdexcept>

#include "mft/rng.hpp"

namespace mft {

// Life-time distribution of a renewal process, described by its mean and
// standard deviation. Gamma is the only built-in family; keeping the
// (mean, sd) parameterization makes model specifications independent of a
// family's native parameters.
struct LifetimeLaw {
    double mean = 1.0;
    double sd = 1.0;

    static LifetimeLaw gamma(double mean, double sd) {
        if (!(mean > 0.0) || !(sd > 0.0))
            throw std::invalid_argument("LifetimeLaw: mean and sd must be > 0");
        return LifetimeLaw{mean, sd};
    }

    static LifetimeLaw gamma_from_variance(double mean, double variance) {
        if (!(variance > 0.0))
            throw std::invalid_argument("LifetimeLaw: variance must be > 0");
        return gamma(mean, std::sqrt(variance));
    }

    double variance() const { return sd * sd; }
    double shape() const { return mean * mean / (sd * sd); }
    double scale() const { return sd * sd / mean; }

    // Var((xi - mean)^2); for gamma(shape k, scale theta) this equals
    // 2 k (k + 3) theta^4.
    double nu2() const {
        const double k = shape();
        const double th = scale();
        const double th2 = th * th;
        return 2.0 * k * (k + 3.0) * th2 * th2;
    }

    double sample(Rng& rng) const {
        std::gamma_distribution<double> d(shape(), scale());
        return d(rng);
    }

    bool operator==(const LifetimeLaw&) const = default;
};

}  // namespace mft
