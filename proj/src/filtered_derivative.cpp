#include "mft/filtered_derivative.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mft {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// 1-based inclusive index range of the life times fully contained in the
// window [a, b]: S_{i-1} >= a and S_i <= b (the life time reaching into the
// window from the left is excluded). Empty when lo > hi.
struct LifeRange {
    std::size_t lo = 1, hi = 0;
    bool empty() const { return lo > hi; }
};

LifeRange life_range(const EventSeries& e, double a, double b) {
    LifeRange r;
    r.lo = a <= 0.0 ? 1 : e.count_less(a) + 2;
    r.hi = e.count_le(b);
    return r;
}

// Prefix sums over the life times with change-point straddlers masked out.
// a/b carry statistic-specific per-life-time values.
struct PrefixStats {
    std::vector<std::int64_t> n;
    std::vector<double> xi, a, b;

    struct Sums {
        std::int64_t n = 0;
        double xi = 0.0, a = 0.0, b = 0.0;
    };

    Sums query(const LifeRange& r) const {
        if (r.empty()) return {};
        return Sums{n[r.hi] - n[r.lo - 1], xi[r.hi] - xi[r.lo - 1], a[r.hi] - a[r.lo - 1],
                    b[r.hi] - b[r.lo - 1]};
    }
};

bool straddles(const std::vector<double>& cps, double start, double end) {
    // any change point in (start, end]
    const auto lo = std::upper_bound(cps.begin(), cps.end(), start);
    const auto hi = std::upper_bound(cps.begin(), cps.end(), end);
    return lo != hi;
}

template <typename ValueFn>
PrefixStats build_prefix(const EventSeries& e, const std::vector<double>& cps, ValueFn&& value) {
    const std::size_t n = e.count();
    PrefixStats p;
    p.n.assign(n + 1, 0);
    p.xi.assign(n + 1, 0.0);
    p.a.assign(n + 1, 0.0);
    p.b.assign(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double start = e.life_start(i);
        const double end = e.life_end(i);
        const double xi = end - start;
        const bool excluded = !cps.empty() && straddles(cps, start, end);
        double va = 0.0, vb = 0.0;
        if (!excluded) value(i, xi, end, va, vb);
        p.n[i] = p.n[i - 1] + (excluded ? 0 : 1);
        p.xi[i] = p.xi[i - 1] + (excluded ? 0.0 : xi);
        p.a[i] = p.a[i - 1] + va;
        p.b[i] = p.b[i - 1] + vb;
    }
    return p;
}

struct WindowMoments {
    std::int64_t n = 0;
    double mean_xi = 0.0;
    double mean_a = 0.0;
    double var_a = 0.0;  // mean(b) - mean(a)^2, clamped at 0
};

WindowMoments window_moments(const PrefixStats& p, const LifeRange& r) {
    WindowMoments m;
    const auto s = p.query(r);
    m.n = s.n;
    if (s.n == 0) return m;
    const double inv = 1.0 / static_cast<double>(s.n);
    m.mean_xi = s.xi * inv;
    m.mean_a = s.a * inv;
    m.var_a = std::max(0.0, s.b * inv - m.mean_a * m.mean_a);
    return m;
}

DerivativeProcess make_process(const Grid& grid, double h) {
    const auto k = std::llround(h / grid.dt());
    if (k < 1 || 2 * k > grid.steps() || std::abs(grid.time(k) - h) > 1e-9 * std::max(1.0, h))
        throw std::invalid_argument("window is not on the grid");
    DerivativeProcess proc;
    proc.grid = grid;
    proc.h = grid.time(k);
    proc.h_steps = k;
    const auto size = static_cast<std::size_t>(grid.steps() - 2 * k + 1);
    proc.g.assign(size, 0.0);
    proc.n_left.assign(size, 0);
    proc.n_right.assign(size, 0);
    proc.s_hat.assign(size, 0.0);
    return proc;
}

}  // namespace

SegmentMeans SegmentMeans::global(const EventSeries& e) {
    if (e.count() == 0) throw std::invalid_argument("SegmentMeans: empty series");
    double sum = 0.0;
    for (std::size_t i = 1; i <= e.count(); ++i) sum += e.life_end(i) - e.life_start(i);
    return SegmentMeans{{}, {sum / static_cast<double>(e.count())}};
}

SegmentMeans SegmentMeans::estimate(const EventSeries& e, std::vector<double> rate_cps) {
    std::sort(rate_cps.begin(), rate_cps.end());
    for (double c : rate_cps)
        if (!(c > 0.0) || !(c < e.horizon()))
            throw std::invalid_argument("SegmentMeans: change points must lie in (0, T)");
    const SegmentMeans fallback = global(e);
    SegmentMeans out;
    out.change_points = std::move(rate_cps);
    out.means.reserve(out.change_points.size() + 1);
    for (std::size_t j = 0; j <= out.change_points.size(); ++j) {
        const double a = j == 0 ? 0.0 : out.change_points[j - 1];
        const double b = j == out.change_points.size() ? e.horizon() : out.change_points[j];
        const LifeRange r = life_range(e, a, b);
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = r.lo; i <= r.hi && !r.empty(); ++i) {
            sum += e.life_end(i) - e.life_start(i);
            ++n;
        }
        out.means.push_back(n > 0 ? sum / static_cast<double>(n) : fallback.means[0]);
    }
    return out;
}

std::size_t SegmentMeans::segment_of(double t) const {
    return static_cast<std::size_t>(
        std::lower_bound(change_points.begin(), change_points.end(), t) - change_points.begin());
}

WindowIndexSets window_index_sets(const EventSeries& e, double t, double h,
                                  const std::vector<double>& rate_cps) {
    WindowIndexSets sets;
    for (int side = 0; side < 2; ++side) {
        const double a = side == 0 ? t - h : t;
        const double b = side == 0 ? t : t + h;
        const LifeRange r = life_range(e, a, b);
        auto& out = side == 0 ? sets.left : sets.right;
        for (std::size_t i = r.lo; i <= r.hi && !r.empty(); ++i)
            if (rate_cps.empty() || !straddles(rate_cps, e.life_start(i), e.life_end(i)))
                out.push_back(i);
    }
    return sets;
}

double nu_hat(std::span<const double> life_times, std::span<const double> means) {
    if (life_times.size() != means.size())
        throw std::invalid_argument("nu_hat: life_times and means differ in length");
    if (life_times.empty()) return 0.0;
    double sigma2 = 0.0;
    for (std::size_t i = 0; i < life_times.size(); ++i) {
        const double d = life_times[i] - means[i];
        sigma2 += d * d;
    }
    sigma2 /= static_cast<double>(life_times.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < life_times.size(); ++i) {
        const double d = life_times[i] - means[i];
        const double dev = d * d - sigma2;
        acc += dev * dev;
    }
    return acc / static_cast<double>(life_times.size());
}

double nu_hat(std::span<const double> life_times, double mean) {
    const std::vector<double> means(life_times.size(), mean);
    return nu_hat(life_times, means);
}

DerivativeProcess variance_g(const EventSeries& e, const Grid& grid, double h,
                             const SegmentMeans& means) {
    DerivativeProcess proc = make_process(grid, h);
    const PrefixStats p = build_prefix(
        e, means.change_points, [&](std::size_t, double xi, double end, double& va, double& vb) {
            const double d = xi - means.mean_at(end);
            va = d * d;
            vb = va * va;
        });
    const std::int64_t k = proc.h_steps;
    const double hw = proc.h;
    for (std::int64_t i = k; i <= grid.steps() - k; ++i) {
        const std::size_t j = static_cast<std::size_t>(i - k);
        const WindowMoments le = window_moments(p, life_range(e, grid.time(i - k), grid.time(i)));
        const WindowMoments ri = window_moments(p, life_range(e, grid.time(i), grid.time(i + k)));
        proc.n_left[j] = le.n;
        proc.n_right[j] = ri.n;
        if (le.n == 0 || ri.n == 0) continue;
        // mean_a = windowed sigma^2, var_a = windowed nu^2
        const double s2 = (ri.var_a * ri.mean_xi + le.var_a * le.mean_xi) / hw;
        if (!(s2 > 0.0)) continue;
        proc.s_hat[j] = std::sqrt(s2);
        proc.g[j] = (ri.mean_a - le.mean_a) / proc.s_hat[j];
    }
    return proc;
}

DerivativeProcess rate_g(const EventSeries& e, const Grid& grid, double h) {
    DerivativeProcess proc = make_process(grid, h);
    const PrefixStats p =
        build_prefix(e, {}, [](std::size_t, double xi, double, double& va, double& vb) {
            va = xi;
            vb = xi * xi;
        });
    const std::int64_t k = proc.h_steps;
    const double hw = proc.h;
    for (std::int64_t i = k; i <= grid.steps() - k; ++i) {
        const std::size_t j = static_cast<std::size_t>(i - k);
        const double a = grid.time(i - k), m = grid.time(i), b = grid.time(i + k);
        const WindowMoments le = window_moments(p, life_range(e, a, m));
        const WindowMoments ri = window_moments(p, life_range(e, m, b));
        proc.n_left[j] = le.n;
        proc.n_right[j] = ri.n;
        if (le.n == 0 || ri.n == 0) continue;
        const double mu_le = le.mean_xi, mu_ri = ri.mean_xi;
        const double s2 = hw * le.var_a / (mu_le * mu_le * mu_le) +
                          hw * ri.var_a / (mu_ri * mu_ri * mu_ri);
        if (!(s2 > 0.0)) continue;
        const auto count_le_w = static_cast<double>(e.count_le(m) - e.count_le(a));
        const auto count_ri_w = static_cast<double>(e.count_le(b) - e.count_le(m));
        proc.s_hat[j] = std::sqrt(s2);
        proc.g[j] = (count_ri_w - count_le_w) / proc.s_hat[j];
    }
    return proc;
}

DerivativeProcess moment_g(const EventSeries& e, const Grid& grid, double h, int k_order) {
    if (k_order < 1) throw std::invalid_argument("moment_g: k must be >= 1");
    DerivativeProcess proc = make_process(grid, h);
    const PrefixStats p =
        build_prefix(e, {}, [k_order](std::size_t, double xi, double, double& va, double& vb) {
            va = std::pow(xi, k_order);
            vb = va * va;
        });
    const std::int64_t k = proc.h_steps;
    const double hw = proc.h;
    for (std::int64_t i = k; i <= grid.steps() - k; ++i) {
        const std::size_t j = static_cast<std::size_t>(i - k);
        const WindowMoments le = window_moments(p, life_range(e, grid.time(i - k), grid.time(i)));
        const WindowMoments ri = window_moments(p, life_range(e, grid.time(i), grid.time(i + k)));
        proc.n_left[j] = le.n;
        proc.n_right[j] = ri.n;
        if (le.n == 0 || ri.n == 0) continue;
        const double s2 = (ri.var_a * ri.mean_xi + le.var_a * le.mean_xi) / hw;
        if (!(s2 > 0.0)) continue;
        proc.s_hat[j] = std::sqrt(s2);
        proc.g[j] = (ri.mean_a - le.mean_a) / proc.s_hat[j];
    }
    return proc;
}

void write_processes_csv(const std::vector<DerivativeProcess>& processes, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV: " + path);
    out << "h,t,G,n_le,n_ri,s_hat\n";
    for (const auto& proc : processes) {
        for (std::size_t j = 0; j < proc.size(); ++j) {
            out << format_double(proc.h) << "," << format_double(proc.time_at(j)) << ","
                << format_double(proc.g[j]) << "," << proc.n_left[j] << "," << proc.n_right[j]
                << "," << format_double(proc.s_hat[j]) << "\n";
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mft
