#pragma once

#include <optional>
#include <vector>

#include "mft/event_series.hpp"
#include "mft/filtered_derivative.hpp"
#include "mft/grid.hpp"
#include "mft/limit_law.hpp"

namespace mft {

enum class StatKind { rate, variance, moment };

struct WindowMaximum {
    double h = 0.0;
    double max_abs = 0.0;
    double argmax_time = 0.0;  // smallest t attaining the maximum
};

struct TestResult {
    double statistic = 0.0;  // M = max_h max_t |G_{h,t}|
    double threshold = 0.0;
    double alpha = 0.0;
    bool reject = false;
    std::vector<WindowMaximum> per_window;
};

// The hypothesis test: reject when the global maximum of |G| over all
// windows exceeds the calibrated threshold.
TestResult mft_test(const std::vector<DerivativeProcess>& processes, const Threshold& threshold);

struct Candidate {
    double time = 0.0;
    double value = 0.0;  // |G| at detection
};

// Successive argmax extraction for one window: pick the largest remaining
// |G| above q, record it, exclude the open interval (t-h, t+h), repeat.
// Candidates are returned in detection order. Flat maxima resolve to the
// smallest t.
std::vector<Candidate> detect_single_window(const DerivativeProcess& proc, double q);

struct ChangePoint {
    double time = 0.0;
    double window = 0.0;  // detecting h
    double value = 0.0;   // |G| at detection
    StatKind kind = StatKind::rate;
    int moment_order = 0;  // set for StatKind::moment
};

// Combines per-window candidate lists (windows ascending): a candidate from
// window h is accepted iff no already accepted change point lies within its
// open h-neighborhood. Result sorted by time.
std::vector<ChangePoint> merge_windows(const std::vector<std::vector<Candidate>>& candidates,
                                       const std::vector<double>& windows, StatKind kind);

// detect_single_window + merge_windows over a window family.
std::vector<ChangePoint> run_mfa(const std::vector<DerivativeProcess>& processes, double q,
                                 StatKind kind);

enum class ProfileKind { rate, variance };

// Piecewise-constant parameter estimate over the segments cut by the change
// points. Segments with fewer than two usable life times carry no value.
struct StepProfile {
    std::vector<double> breakpoints;            // interior, sorted
    std::vector<std::optional<double>> values;  // breakpoints.size() + 1 entries

    std::optional<double> at(double t) const;
};

StepProfile estimate_profile(const EventSeries& e, std::vector<double> change_points,
                             ProfileKind kind);

// |v1 - v2| normalized by the mean of the two values; empty when both are 0.
std::optional<double> change_strength(double var1, double var2);

struct StageResult {
    TestResult test;
    std::vector<ChangePoint> change_points;
    StepProfile profile;
};

struct PipelineResult {
    StageResult rate;
    StageResult variance;
    SegmentMeans means_used;       // what the variance stage centered with
    bool rate_correction = true;   // false under the ablation flag
};

// Two-step detection: rate test + MFA first, then the variance test with the
// estimated rate segments folded into the centering. The variance stage runs
// even when stage one accepts (then the global mean is used). Passing
// rate_correction = false skips the fold-in entirely (ablation).
PipelineResult sequential_pipeline(const EventSeries& e, const Grid& grid,
                                   const WindowSet& rate_windows, const WindowSet& var_windows,
                                   const Threshold& q_rate, const Threshold& q_var,
                                   bool rate_correction = true);

}  // namespace mft
