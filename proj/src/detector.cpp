#include "mft/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mft {

TestResult mft_test(const std::vector<DerivativeProcess>& processes, const Threshold& threshold) {
    if (processes.empty()) throw std::invalid_argument("mft_test: no processes");
    const Grid& grid = processes.front().grid;
    for (const auto& p : processes)
        if (!(p.grid == grid)) throw std::invalid_argument("mft_test: processes on different grids");

    TestResult result;
    result.threshold = threshold.q;
    result.alpha = threshold.alpha;
    result.per_window.reserve(processes.size());
    for (const auto& p : processes) {
        WindowMaximum wm;
        wm.h = p.h;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double v = std::abs(p.g[j]);
            if (v > wm.max_abs) {
                wm.max_abs = v;
                wm.argmax_time = p.time_at(j);
            }
        }
        result.statistic = std::max(result.statistic, wm.max_abs);
        result.per_window.push_back(wm);
    }
    result.reject = result.statistic > threshold.q;
    return result;
}

std::vector<Candidate> detect_single_window(const DerivativeProcess& proc, double q) {
    std::vector<Candidate> found;
    std::vector<char> excluded(proc.size(), 0);
    const std::int64_t k = proc.h_steps;
    for (;;) {
        double best = q;
        std::int64_t best_j = -1;
        for (std::size_t j = 0; j < proc.size(); ++j) {
            if (excluded[j]) continue;
            const double v = std::abs(proc.g[j]);
            if (v > best) {  // strict: ties resolve to the smallest t
                best = v;
                best_j = static_cast<std::int64_t>(j);
            }
        }
        if (best_j < 0) break;
        found.push_back(Candidate{proc.time_at(static_cast<std::size_t>(best_j)), best});
        // exclude the open interval (t-h, t+h): |j - best_j| < h_steps
        const std::int64_t lo = std::max<std::int64_t>(0, best_j - k + 1);
        const std::int64_t hi =
            std::min<std::int64_t>(static_cast<std::int64_t>(proc.size()) - 1, best_j + k - 1);
        for (std::int64_t j = lo; j <= hi; ++j) excluded[static_cast<std::size_t>(j)] = 1;
    }
    return found;
}

std::vector<ChangePoint> merge_windows(const std::vector<std::vector<Candidate>>& candidates,
                                       const std::vector<double>& windows, StatKind kind) {
    if (candidates.size() != windows.size())
        throw std::invalid_argument("merge_windows: candidates and windows differ in length");
    std::vector<std::size_t> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&windows](std::size_t a, std::size_t b) { return windows[a] < windows[b]; });

    std::vector<ChangePoint> accepted;
    for (std::size_t oi : order) {
        const double h = windows[oi];
        for (const Candidate& cand : candidates[oi]) {
            bool blocked = false;
            for (const ChangePoint& cp : accepted) {
                if (std::abs(cand.time - cp.time) < h) {
                    blocked = true;
                    break;
                }
            }
            if (!blocked) accepted.push_back(ChangePoint{cand.time, h, cand.value, kind, 0});
        }
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const ChangePoint& a, const ChangePoint& b) { return a.time < b.time; });
    return accepted;
}

std::vector<ChangePoint> run_mfa(const std::vector<DerivativeProcess>& processes, double q,
                                 StatKind kind) {
    std::vector<std::vector<Candidate>> candidates;
    std::vector<double> windows;
    candidates.reserve(processes.size());
    windows.reserve(processes.size());
    for (const auto& p : processes) {
        candidates.push_back(detect_single_window(p, q));
        windows.push_back(p.h);
    }
    return merge_windows(candidates, windows, kind);
}

std::optional<double> StepProfile::at(double t) const {
    std::size_t j = 0;
    while (j < breakpoints.size() && breakpoints[j] < t) ++j;
    return values[j];
}

StepProfile estimate_profile(const EventSeries& e, std::vector<double> change_points,
                             ProfileKind kind) {
    std::sort(change_points.begin(), change_points.end());
    for (double c : change_points)
        if (!(c > 0.0) || !(c < e.horizon()))
            throw std::invalid_argument("estimate_profile: change points must lie in (0, T)");

    StepProfile profile;
    profile.breakpoints = change_points;
    const std::size_t segments = change_points.size() + 1;
    profile.values.assign(segments, std::nullopt);
    for (std::size_t j = 0; j < segments; ++j) {
        const double a = j == 0 ? 0.0 : change_points[j - 1];
        const double b = j == change_points.size() ? e.horizon() : change_points[j];
        // fully contained life times, straddlers excluded
        std::vector<double> xs;
        for (std::size_t i = 1; i <= e.count(); ++i) {
            if (e.life_start(i) >= a && e.life_end(i) <= b)
                xs.push_back(e.life_end(i) - e.life_start(i));
        }
        if (xs.size() < 2) continue;  // unreliable; carried as absent
        double sum = 0.0;
        for (double x : xs) sum += x;
        if (kind == ProfileKind::rate) {
            profile.values[j] = static_cast<double>(xs.size()) / sum;
        } else {
            const double mean = sum / static_cast<double>(xs.size());
            double acc = 0.0;
            for (double x : xs) acc += (x - mean) * (x - mean);
            profile.values[j] = acc / static_cast<double>(xs.size());
        }
    }
    return profile;
}

std::optional<double> change_strength(double var1, double var2) {
    if (var1 < 0.0 || var2 < 0.0)
        throw std::invalid_argument("change_strength: variances must be >= 0");
    const double mean = 0.5 * (var1 + var2);
    if (!(mean > 0.0)) return std::nullopt;
    return std::abs(var1 - var2) / mean;
}

PipelineResult sequential_pipeline(const EventSeries& e, const Grid& grid,
                                   const WindowSet& rate_windows, const WindowSet& var_windows,
                                   const Threshold& q_rate, const Threshold& q_var,
                                   bool rate_correction) {
    PipelineResult result;
    result.rate_correction = rate_correction;

    std::vector<DerivativeProcess> rate_procs;
    rate_procs.reserve(rate_windows.size());
    for (const auto& w : rate_windows.windows()) rate_procs.push_back(rate_g(e, grid, w.h));
    result.rate.test = mft_test(rate_procs, q_rate);
    if (result.rate.test.reject)
        result.rate.change_points = run_mfa(rate_procs, q_rate.q, StatKind::rate);

    std::vector<double> rate_times;
    for (const auto& cp : result.rate.change_points) rate_times.push_back(cp.time);

    result.means_used = rate_correction && !rate_times.empty()
                            ? SegmentMeans::estimate(e, rate_times)
                            : SegmentMeans::global(e);

    std::vector<DerivativeProcess> var_procs;
    var_procs.reserve(var_windows.size());
    for (const auto& w : var_windows.windows())
        var_procs.push_back(variance_g(e, grid, w.h, result.means_used));
    result.variance.test = mft_test(var_procs, q_var);
    if (result.variance.test.reject)
        result.variance.change_points = run_mfa(var_procs, q_var.q, StatKind::variance);

    result.rate.profile = estimate_profile(e, rate_times, ProfileKind::rate);

    std::vector<double> all_times = rate_times;
    for (const auto& cp : result.variance.change_points) all_times.push_back(cp.time);
    result.variance.profile = estimate_profile(e, std::move(all_times), ProfileKind::variance);
    return result;
}

}  // namespace mft
