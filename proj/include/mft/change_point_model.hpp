#pragma once

#include <stdexcept>
#include <vector>

#include "mft/lifetime_law.hpp"

namespace mft {

// Piecewise renewal model: independent processes glued at change points,
// segment j covering (c_{j-1}, c_j] with c_0 = 0 and c_{k+1} = T.
struct ChangePointModel {
    double horizon = 0.0;
    std::vector<double> change_points;       // sorted, strictly inside (0, T)
    std::vector<LifetimeLaw> segment_laws;   // change_points.size() + 1 entries

    ChangePointModel() = default;
    ChangePointModel(double horizon, std::vector<double> cps, std::vector<LifetimeLaw> laws)
        : horizon(horizon), change_points(std::move(cps)), segment_laws(std::move(laws)) {
        validate();
    }

    static ChangePointModel single(const LifetimeLaw& law, double horizon) {
        return ChangePointModel(horizon, {}, {law});
    }

    void validate() const {
        if (!(horizon > 0.0)) throw std::invalid_argument("ChangePointModel: horizon must be > 0");
        if (segment_laws.size() != change_points.size() + 1)
            throw std::invalid_argument("ChangePointModel: need one law per segment");
        double prev = 0.0;
        for (double c : change_points) {
            if (!(c > prev) || !(c < horizon))
                throw std::invalid_argument("ChangePointModel: change points must satisfy 0 < c_1 < ... < c_k < T");
            prev = c;
        }
        for (const auto& law : segment_laws)
            if (!(law.mean > 0.0) || !(law.sd > 0.0))
                throw std::invalid_argument("ChangePointModel: invalid segment law");
    }

    // Segment index of time t under the (c_{j-1}, c_j] convention.
    std::size_t segment_of(double t) const {
        std::size_t j = 0;
        while (j < change_points.size() && change_points[j] < t) ++j;
        return j;
    }
};

enum class ChangeKind { rate, variance, both };

struct LabeledChangePoint {
    double time = 0.0;
    ChangeKind kind = ChangeKind::rate;
};

enum class RandomDesignType { rate_only, variance_only, mixed };

// Random change-point designs: gaps between change points are uniform, the
// process alternates between a base law and a randomly drawn variant (away
// from base at odd change points, back at even ones).
struct RandomDesign {
    RandomDesignType type = RandomDesignType::rate_only;
    LifetimeLaw base;
    double gap_max = 800.0;                  // gaps ~ U[0, gap_max]
    std::vector<double> mean_multipliers;     // candidate mean factors (variants)
    std::vector<double> variance_multipliers; // candidate variance factors (variants)
    // Gap sequences are redrawn until the last change point is below
    // T - tail_guard, so that every change point is detectable in principle.
    double tail_guard = 0.0;

    static RandomDesign rate_only(const LifetimeLaw& base) {
        return RandomDesign{RandomDesignType::rate_only, base, 800.0, {0.8, 1.2, 1.6}, {}, 0.0};
    }
    static RandomDesign variance_only(const LifetimeLaw& base) {
        return RandomDesign{RandomDesignType::variance_only, base, 1200.0, {}, {1.4, 1.6, 2.0}, 0.0};
    }
    static RandomDesign mixed(const LifetimeLaw& base) {
        return RandomDesign{RandomDesignType::mixed, base, 800.0, {0.8, 1.2, 1.6}, {1.4, 1.6, 2.0}, 0.0};
    }
};

// Five-segment demonstration model on (0, 2000]: rate changes at 430 and
// 1060, variance changes at 630 and 1490.
inline ChangePointModel showcase_model() {
    return ChangePointModel(
        2000.0, {430.0, 630.0, 1060.0, 1490.0},
        {LifetimeLaw::gamma_from_variance(0.25, 0.03),
         LifetimeLaw::gamma_from_variance(0.35, 0.03),
         LifetimeLaw::gamma_from_variance(0.35, 0.0216),
         LifetimeLaw::gamma_from_variance(0.45, 0.0216),
         LifetimeLaw::gamma_from_variance(0.45, 0.0357)});
}

inline std::vector<LabeledChangePoint> showcase_truth() {
    return {{430.0, ChangeKind::rate},
            {630.0, ChangeKind::variance},
            {1060.0, ChangeKind::rate},
            {1490.0, ChangeKind::variance}};
}

}  // namespace mft
