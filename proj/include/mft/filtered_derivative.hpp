#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mft/event_series.hpp"
#include "mft/grid.hpp"

namespace mft {

// Rate change points with the per-segment mean life times used to center the
// squared deviations. With no change points this is the global mean.
struct SegmentMeans {
    std::vector<double> change_points;  // sorted
    std::vector<double> means;          // change_points.size() + 1 entries, all > 0

    static SegmentMeans global(const EventSeries& e);
    // Per-segment means over (c_{j-1}, c_j] of the fully contained life
    // times; segments without enough data fall back to the global mean.
    static SegmentMeans estimate(const EventSeries& e, std::vector<double> rate_cps);

    std::size_t segment_of(double t) const;
    double mean_at(double t) const { return means[segment_of(t)]; }
};

// Life-time index sets (1-based) for the windows (t-h, t] and (t, t+h]:
// life times whose full interval [S_{i-1}, S_i] lies inside the window and
// does not straddle any of the supplied rate change points.
struct WindowIndexSets {
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
};

WindowIndexSets window_index_sets(const EventSeries& e, double t, double h,
                                  const std::vector<double>& rate_cps = {});

// Mean of (V_i - mean(V))^2 where V_i = (xi_i - mean_i)^2; the variance
// scaling constant of the life-time variance estimator. Zero for fewer than
// one life time.
double nu_hat(std::span<const double> life_times, std::span<const double> means);
double nu_hat(std::span<const double> life_times, double mean);

// One window process G_{h,t} on tau_h = [h, T-h] over the shared grid, with
// per-point diagnostics. g is 0 wherever a window index set is empty or the
// scale estimate vanishes; values are always finite.
struct DerivativeProcess {
    Grid grid{1.0, 2};
    double h = 0.0;
    std::int64_t h_steps = 0;
    std::vector<double> g;
    std::vector<std::int64_t> n_left, n_right;
    std::vector<double> s_hat;

    std::size_t size() const { return g.size(); }
    double time_at(std::size_t j) const { return grid.time(h_steps + static_cast<std::int64_t>(j)); }
};

// Variance statistic: difference of windowed variance estimators of the life
// times, centered with the supplied segment means and studentized by
// s^2 = nu2_ri mu_ri / h + nu2_le mu_le / h.
DerivativeProcess variance_g(const EventSeries& e, const Grid& grid, double h,
                             const SegmentMeans& means);

// Rate statistic: difference of event counts in the two windows, studentized
// by sqrt(h sigma^2_le / mu_le^3 + h sigma^2_ri / mu_ri^3) with windowed
// life-time moments (Var N_t ~ t sigma^2 / mu^3 for a renewal process).
DerivativeProcess rate_g(const EventSeries& e, const Grid& grid, double h);

// k-th raw moment statistic; k = 1 targets the mean, k = 2 the second moment.
DerivativeProcess moment_g(const EventSeries& e, const Grid& grid, double h, int k);

void write_processes_csv(const std::vector<DerivativeProcess>& processes, const std::string& path);

}  // namespace mft
