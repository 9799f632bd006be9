#include "mft/limit_law.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mft/parallel.hpp"

namespace mft {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Window width in whole grid steps; rejects windows that do not sit on the
// grid, since the threshold calibration and the data statistic must share
// the discretization exactly.
std::int64_t window_steps(const Grid& grid, double h) {
    const auto k = std::llround(h / grid.dt());
    if (k < 1 || 2 * k > grid.steps() || std::abs(grid.time(k) - h) > 1e-9 * std::max(1.0, h))
        throw std::invalid_argument("window is not on the grid");
    return k;
}

}  // namespace

BrownianPath simulate_brownian(const Grid& grid, Rng rng) {
    const auto n = static_cast<std::size_t>(grid.steps());
    BrownianPath w(n + 1);
    w[0] = 0.0;
    std::normal_distribution<double> incr(0.0, std::sqrt(grid.dt()));
    for (std::size_t i = 1; i <= n; ++i) w[i] = w[i - 1] + incr(rng);
    return w;
}

std::vector<double> l_process(const BrownianPath& w, const Grid& grid, double h) {
    if (w.size() != static_cast<std::size_t>(grid.steps()) + 1)
        throw std::invalid_argument("l_process: path does not match the grid");
    const std::int64_t k = window_steps(grid, h);
    const std::int64_t n = grid.steps();
    const double scale = 1.0 / std::sqrt(2.0 * grid.time(k));
    std::vector<double> values(static_cast<std::size_t>(n - 2 * k + 1));
    for (std::int64_t i = k; i <= n - k; ++i)
        values[static_cast<std::size_t>(i - k)] = (w[i + k] - 2.0 * w[i] + w[i - k]) * scale;
    return values;
}

void LTildeParams::validate(const Grid& grid) const {
    if (!(mu1 > 0.0) || !(mu2 > 0.0) || !(nu2_1 > 0.0) || !(nu2_2 > 0.0))
        throw std::invalid_argument("LTildeParams: means and nu^2 must be > 0");
    if (!(h > 0.0)) throw std::invalid_argument("LTildeParams: h must be > 0");
    if (!(c > h) || !(c < grid.horizon() - h))
        throw std::invalid_argument("LTildeParams: c must lie strictly inside (h, T-h)");
}

double LTildeParams::window_mean_right(double t) const {
    if (t <= c - h) return mu1;
    if (t > c) return mu2;
    return h / ((c - t) / mu1 + (t + h - c) / mu2);
}

double LTildeParams::window_mean_left(double t) const {
    if (t <= c) return mu1;
    if (t >= c + h) return mu2;
    return h / ((c - (t - h)) / mu1 + (t - c) / mu2);
}

double LTildeParams::s2(double t) const {
    if (t < c - h) return 2.0 * nu2_1 * mu1 / h;
    if (t > c + h) return 2.0 * nu2_2 * mu2 / h;
    const double h2 = h * h;
    if (t <= c) {
        const double mr = window_mean_right(t);
        return mu1 * nu2_1 / h + (c - t) * mr * mr * nu2_1 / (h2 * mu1) +
               (t + h - c) * mr * mr * nu2_2 / (h2 * mu2);
    }
    const double ml = window_mean_left(t);
    return (c - (t - h)) * ml * ml * nu2_1 / (h2 * mu1) + (t - c) * ml * ml * nu2_2 / (h2 * mu2) +
           mu2 * nu2_2 / h;
}

std::vector<double> l_tilde_process(const BrownianPath& w, const Grid& grid,
                                    const LTildeParams& p) {
    if (w.size() != static_cast<std::size_t>(grid.steps()) + 1)
        throw std::invalid_argument("l_tilde_process: path does not match the grid");
    p.validate(grid);
    const std::int64_t k = window_steps(grid, p.h);
    const std::int64_t n = grid.steps();
    const std::int64_t ic = std::llround(p.c / grid.dt());

    // Work with the change point snapped to the grid so branch selection is
    // integer-exact and W_c is a sampled value.
    LTildeParams q = p;
    q.c = grid.time(ic);
    const double h = q.h;
    const double wc = w[ic];

    const double coef_le_far = std::sqrt(q.mu1 * q.nu2_1) / h;  // left of c, both windows
    const double coef_ri_far = std::sqrt(q.mu2 * q.nu2_2) / h;

    std::vector<double> values(static_cast<std::size_t>(n - 2 * k + 1));
    const double l_scale = 1.0 / std::sqrt(2.0 * grid.time(k));
    for (std::int64_t i = k; i <= n - k; ++i) {
        const std::size_t j = static_cast<std::size_t>(i - k);
        if (i < ic - k || i > ic + k) {
            values[j] = (w[i + k] - 2.0 * w[i] + w[i - k]) * l_scale;  // equals L exactly
            continue;
        }
        const double t = grid.time(i);
        const double s = std::sqrt(q.s2(t));
        if (i <= ic) {
            const double mr = q.window_mean_right(t);
            const double num = mr * std::sqrt(q.nu2_2 / q.mu2) / h * (w[i + k] - wc) +
                               mr * std::sqrt(q.nu2_1 / q.mu1) / h * (wc - w[i]) -
                               coef_le_far * (w[i] - w[i - k]);
            values[j] = num / s;
        } else {
            const double ml = q.window_mean_left(t);
            const double num = coef_ri_far * (w[i + k] - w[i]) -
                               ml * std::sqrt(q.nu2_2 / q.mu2) / h * (w[i] - wc) -
                               ml * std::sqrt(q.nu2_1 / q.mu1) / h * (wc - w[i - k]);
            values[j] = num / s;
        }
    }
    return values;
}

double max_abs(const std::vector<double>& values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double max_statistic(const std::vector<std::vector<double>>& processes) {
    double m = 0.0;
    for (const auto& p : processes) m = std::max(m, max_abs(p));
    return m;
}

double upper_quantile(std::vector<double> sample, double alpha) {
    if (sample.empty()) throw std::invalid_argument("upper_quantile: empty sample");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("upper_quantile: alpha must lie in (0, 1]");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    auto idx = static_cast<std::int64_t>(std::ceil((1.0 - alpha) * n - 1e-9));
    idx = std::clamp<std::int64_t>(idx, 1, static_cast<std::int64_t>(sample.size()));
    return sample[static_cast<std::size_t>(idx - 1)];
}

std::string threshold_fingerprint(const Grid& grid, const WindowSet& windows, double alpha,
                                  int n_sims, std::uint64_t seed) {
    std::ostringstream s;
    s << "T=" << format_double(grid.horizon()) << ";steps=" << grid.steps() << ";win=";
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (i) s << ",";
        s << windows.windows()[i].steps;
    }
    s << ";alpha=" << format_double(alpha) << ";nsims=" << n_sims << ";seed=" << seed;
    return s.str();
}

std::vector<double> simulate_max_abs_sample(const Grid& grid, const WindowSet& windows,
                                            int n_sims, std::uint64_t seed, unsigned workers) {
    if (n_sims < 1) throw std::invalid_argument("simulate_max_abs_sample: n_sims must be >= 1");
    const std::int64_t n = grid.steps();
    std::vector<double> maxima(static_cast<std::size_t>(n_sims));
    const Rng base(seed);
    parallel_for(maxima.size(), workers, [&](std::size_t path) {
        const BrownianPath w = simulate_brownian(grid, base.substream(path));
        double m = 0.0;
        for (const auto& win : windows.windows()) {
            const std::int64_t k = win.steps;
            double raw = 0.0;
            for (std::int64_t i = k; i <= n - k; ++i)
                raw = std::max(raw, std::abs(w[i + k] - 2.0 * w[i] + w[i - k]));
            m = std::max(m, raw / std::sqrt(2.0 * win.h));
        }
        maxima[path] = m;
    });
    std::sort(maxima.begin(), maxima.end());
    return maxima;
}

Threshold estimate_q(const Grid& grid, const WindowSet& windows, double alpha, int n_sims,
                     std::uint64_t seed, unsigned workers) {
    if (n_sims < 1000)
        throw std::invalid_argument(
            "estimate_q: n_sims must be >= 1000; the tail order statistic is too unstable below "
            "that (default is 10000)");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("estimate_q: alpha must lie in (0, 1]");
    auto sample = simulate_max_abs_sample(grid, windows, n_sims, seed, workers);
    Threshold t;
    t.q = upper_quantile(std::move(sample), alpha);
    t.alpha = alpha;
    t.n_sims = n_sims;
    t.seed = seed;
    t.fingerprint = threshold_fingerprint(grid, windows, alpha, n_sims, seed);
    return t;
}

std::optional<Threshold> CalibrationCache::lookup(const std::string& fingerprint) const {
    std::ifstream in(path_);
    if (!in) return std::nullopt;
    nlohmann::json doc;
    try {
        in >> doc;
        const auto& entries = doc.at("entries");
        if (!entries.contains(fingerprint)) return std::nullopt;
        const auto& e = entries.at(fingerprint);
        Threshold t;
        t.q = e.at("q").get<double>();
        t.alpha = e.at("alpha").get<double>();
        t.n_sims = e.at("n_sims").get<int>();
        t.seed = e.at("seed").get<std::uint64_t>();
        t.fingerprint = fingerprint;
        return t;
    } catch (const std::exception& ex) {
        std::cerr << "warning: calibration cache " << path_ << " unusable (" << ex.what()
                  << "); recomputing\n";
        return std::nullopt;
    }
}

void CalibrationCache::store(const Threshold& threshold) const {
    nlohmann::json doc;
    {
        std::ifstream in(path_);
        if (in) {
            try {
                in >> doc;
            } catch (const std::exception&) {
                doc = nlohmann::json();  // corrupt cache: start over
            }
        }
    }
    if (!doc.is_object()) doc = nlohmann::json::object();
    if (!doc.contains("entries") || !doc["entries"].is_object())
        doc["entries"] = nlohmann::json::object();
    doc["entries"][threshold.fingerprint] = {{"q", threshold.q},
                                             {"alpha", threshold.alpha},
                                             {"n_sims", threshold.n_sims},
                                             {"seed", threshold.seed}};
    std::ofstream out(path_);
    if (!out) throw std::runtime_error("cannot write calibration cache: " + path_);
    out << doc.dump(2) << "\n";
}

Threshold estimate_q_cached(const CalibrationCache& cache, const Grid& grid,
                            const WindowSet& windows, double alpha, int n_sims,
                            std::uint64_t seed, unsigned workers, bool* hit) {
    const std::string fp = threshold_fingerprint(grid, windows, alpha, n_sims, seed);
    if (auto cached = cache.lookup(fp)) {
        if (hit) *hit = true;
        return *cached;
    }
    if (hit) *hit = false;
    Threshold t = estimate_q(grid, windows, alpha, n_sims, seed, workers);
    cache.store(t);
    return t;
}

std::vector<CovariancePoint> covariance_curve(const ProcessSampler& sampler, const Grid& grid,
                                              double h, double anchor,
                                              const std::vector<double>& offsets, int n_sims,
                                              std::uint64_t seed, unsigned workers) {
    if (n_sims < 2) throw std::invalid_argument("covariance_curve: n_sims must be >= 2");
    const std::int64_t k = window_steps(grid, h);
    const std::int64_t n = grid.steps();
    const std::int64_t ia = std::llround(anchor / grid.dt());
    if (ia < k || ia > n - k)
        throw std::invalid_argument("covariance_curve: anchor outside tau_h");
    std::vector<std::int64_t> idx;
    idx.reserve(offsets.size());
    for (double v : offsets) {
        const std::int64_t ib = ia + std::llround(v / grid.dt());
        if (ib < k || ib > n - k)
            throw std::invalid_argument("covariance_curve: anchor + offset outside tau_h");
        idx.push_back(ib - k);
    }

    const std::size_t m = offsets.size();
    std::vector<double> at_anchor(static_cast<std::size_t>(n_sims));
    std::vector<double> at_offset(static_cast<std::size_t>(n_sims) * m);
    const Rng base(seed);
    parallel_for(at_anchor.size(), workers, [&](std::size_t path) {
        const BrownianPath w = simulate_brownian(grid, base.substream(path));
        const std::vector<double> vals = sampler(w);
        at_anchor[path] = vals.at(static_cast<std::size_t>(ia - k));
        for (std::size_t j = 0; j < m; ++j)
            at_offset[path * m + j] = vals.at(static_cast<std::size_t>(idx[j]));
    });

    // Sequential reduction keeps results independent of the worker count.
    const double inv_n = 1.0 / static_cast<double>(n_sims);
    double mean_x = 0.0;
    for (double x : at_anchor) mean_x += x;
    mean_x *= inv_n;
    std::vector<CovariancePoint> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        double mean_y = 0.0, mean_xy = 0.0;
        for (std::size_t p = 0; p < at_anchor.size(); ++p) {
            mean_y += at_offset[p * m + j];
            mean_xy += at_anchor[p] * at_offset[p * m + j];
        }
        mean_y *= inv_n;
        mean_xy *= inv_n;
        out[j] = CovariancePoint{offsets[j], mean_xy - mean_x * mean_y};
    }
    return out;
}

}  // namespace mft
