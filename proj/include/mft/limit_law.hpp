#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mft/grid.hpp"
#include "mft/lifetime_law.hpp"
#include "mft/rng.hpp"

namespace mft {

// Standard Brownian motion sampled at the grid points; w[0] = 0.
using BrownianPath = std::vector<double>;

BrownianPath simulate_brownian(const Grid& grid, Rng rng);

// L_{h,t} = ((W_{t+h} - W_t) - (W_t - W_{t-h})) / sqrt(2h) for t on the grid
// restricted to tau_h = [h, T-h]; result[j] belongs to grid index h_steps + j.
std::vector<double> l_process(const BrownianPath& w, const Grid& grid, double h);

// Parameters of the modified limit process around one rate change point at c:
// segment means mu1 != mu2 and the variances nu_i^2 = Var((xi - mu_i)^2).
struct LTildeParams {
    double c = 0.0;
    double mu1 = 0.0, mu2 = 0.0;
    double nu2_1 = 0.0, nu2_2 = 0.0;
    double h = 0.0;

    static LTildeParams from_laws(double c, const LifetimeLaw& before, const LifetimeLaw& after,
                                  double h) {
        return LTildeParams{c, before.mean, after.mean, before.nu2(), after.nu2(), h};
    }

    void validate(const Grid& grid) const;

    // Limit of the empirical mean of the life times in the right window
    // (t, t+h] / left window (t-h, t]; harmonic interpolation across c.
    double window_mean_right(double t) const;
    double window_mean_left(double t) const;

    // Interpolated squared scaling s_t^2: 2 nu_i^2 mu_i / h away from c,
    // linear interpolation through the h-neighborhood of c.
    double s2(double t) const;
};

// Modification of L around the rate change point. Built from the same
// Brownian path as l_process; outside the h-neighborhood of c the values are
// bit-identical to l_process on that path.
std::vector<double> l_tilde_process(const BrownianPath& w, const Grid& grid, const LTildeParams& p);

double max_abs(const std::vector<double>& values);
double max_statistic(const std::vector<std::vector<double>>& processes);

// Order statistic at index ceil((1-alpha) * n) of the sorted sample
// (clamped to the sample minimum), a conservative upper quantile.
double upper_quantile(std::vector<double> sample, double alpha);

struct Threshold {
    double q = 0.0;
    double alpha = 0.0;
    int n_sims = 0;
    std::uint64_t seed = 0;
    std::string fingerprint;
};

std::string threshold_fingerprint(const Grid& grid, const WindowSet& windows, double alpha,
                                  int n_sims, std::uint64_t seed);

// Sorted sample of M* = max_{h in H} max_t |L_{h,t}| over n_sims independent
// Brownian paths. Path i uses substream i of the seed, so the sample does not
// depend on the worker count.
std::vector<double> simulate_max_abs_sample(const Grid& grid, const WindowSet& windows,
                                            int n_sims, std::uint64_t seed, unsigned workers = 0);

// Monte-Carlo estimate of the (1-alpha) quantile of M*. Requires
// n_sims >= 1000; below that the quantile estimate is too coarse to be a
// useful rejection threshold.
Threshold estimate_q(const Grid& grid, const WindowSet& windows, double alpha, int n_sims,
                     std::uint64_t seed, unsigned workers = 0);

// Key-value calibration store (JSON text file), keyed by the threshold
// fingerprint. A corrupt file is treated as empty with a warning.
class CalibrationCache {
public:
    explicit CalibrationCache(std::string path) : path_(std::move(path)) {}

    std::optional<Threshold> lookup(const std::string& fingerprint) const;
    void store(const Threshold& threshold) const;
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// estimate_q with a read-through cache; `hit` (optional) reports whether the
// value came from the cache.
Threshold estimate_q_cached(const CalibrationCache& cache, const Grid& grid,
                            const WindowSet& windows, double alpha, int n_sims,
                            std::uint64_t seed, unsigned workers = 0, bool* hit = nullptr);

// Maps a Brownian path to process values on tau_h (e.g. l_process or
// l_tilde_process bound to their parameters).
using ProcessSampler = std::function<std::vector<double>(const BrownianPath&)>;

struct CovariancePoint {
    double offset = 0.0;
    double covariance = 0.0;
};

// Empirical Cov(X_u, X_{u+v}) for each offset v, over n_sims paths.
std::vector<CovariancePoint> covariance_curve(const ProcessSampler& sampler, const Grid& grid,
                                              double h, double anchor,
                                              const std::vector<double>& offsets, int n_sims,
                                              std::uint64_t seed, unsigned workers = 0);

}  // namespace mft
