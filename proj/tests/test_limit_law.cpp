#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "mft/limit_law.hpp"
#include "mft/parallel.hpp"
#include "support/stats.hpp"

using namespace mft;
namespace fs = std::filesystem;

TEST_CASE("brownian path basics") {
    const Grid grid(1.0, 4);
    const BrownianPath a = simulate_brownian(grid, Rng(12));
    const BrownianPath b = simulate_brownian(grid, Rng(12));
    CHECK(a == b);
    CHECK(a[0] == 0.0);

    std::vector<double> endpoints(10000);
    for (std::size_t i = 0; i < endpoints.size(); ++i)
        endpoints[i] = simulate_brownian(grid, Rng(1).substream(i)).back();
    CHECK(std::abs(test_stats::mean(endpoints)) < 0.03);
    CHECK(test_stats::variance(endpoints) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("l_process of the zero path is zero") {
    const Grid grid(10.0, 100);
    const BrownianPath w(101, 0.0);
    for (double v : l_process(w, grid, 2.0)) CHECK(v == 0.0);
}

TEST_CASE("l_process rejects off-grid windows and bad paths") {
    const Grid grid(10.0, 100);
    const BrownianPath w(101, 0.0);
    CHECK_THROWS_AS(l_process(w, grid, 2.03), std::invalid_argument);
    CHECK_THROWS_AS(l_process(BrownianPath(50, 0.0), grid, 2.0), std::invalid_argument);
}

TEST_CASE("l marginals: zero mean, unit variance, 2h-independence") {
    const Grid grid(100.0, 1000);
    const double h = 10.0;
    const int sims = 10000;
    std::vector<double> at_t(sims), at_t2h(sims), at_t3h(sims);
    parallel_for(sims, 2, [&](std::size_t i) {
        const BrownianPath w = simulate_brownian(grid, Rng(7).substream(i));
        const auto l = l_process(w, grid, h);
        // tau_h index offset: grid index = 100 + j
        at_t[i] = l[300];   // t = 40
        at_t2h[i] = l[500]; // t = 60 = 40 + 2h
        at_t3h[i] = l[600]; // t = 70 = 40 + 3h
    });
    CHECK(std::abs(test_stats::mean(at_t)) < 0.03);
    CHECK(test_stats::variance(at_t) == doctest::Approx(1.0).epsilon(0.05));
    double cov2 = 0.0, cov3 = 0.0;
    const double m1 = test_stats::mean(at_t), m2 = test_stats::mean(at_t2h),
                 m3 = test_stats::mean(at_t3h);
    for (int i = 0; i < sims; ++i) {
        cov2 += (at_t[i] - m1) * (at_t2h[i] - m2);
        cov3 += (at_t[i] - m1) * (at_t3h[i] - m3);
    }
    CHECK(std::abs(cov2 / sims) < 0.03);
    CHECK(std::abs(cov3 / sims) < 0.03);
}

namespace {

LTildeParams demo_params(double c, double h) {
    // mu1=0.1, mu2=0.5, sigma=0.5 (the larger-change parameter set)
    return LTildeParams::from_laws(c, LifetimeLaw::gamma(0.1, 0.5), LifetimeLaw::gamma(0.5, 0.5),
                                   h);
}

}  // namespace

TEST_CASE("l_tilde collapses to l when the parameters agree") {
    const Grid grid(200.0, 2000);
    const BrownianPath w = simulate_brownian(grid, Rng(5));
    LTildeParams p;
    p.c = 100.0;
    p.mu1 = p.mu2 = 0.3;
    p.nu2_1 = p.nu2_2 = 0.7;
    p.h = 20.0;
    const auto l = l_process(w, grid, p.h);
    const auto lt = l_tilde_process(w, grid, p);
    REQUIRE(l.size() == lt.size());
    for (std::size_t j = 0; j < l.size(); ++j)
        CHECK(lt[j] == doctest::Approx(l[j]).epsilon(1e-12));
}

TEST_CASE("l_tilde equals l exactly outside the h-neighborhood of c") {
    const Grid grid(200.0, 2000);
    const double h = 20.0, c = 100.0;
    const LTildeParams p = demo_params(c, h);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const BrownianPath w = simulate_brownian(grid, Rng(33).substream(seed));
        const auto l = l_process(w, grid, h);
        const auto lt = l_tilde_process(w, grid, p);
        const std::int64_t k = 200, ic = 1000;
        for (std::size_t j = 0; j < l.size(); ++j) {
            const std::int64_t gi = k + static_cast<std::int64_t>(j);
            if (gi < ic - k || gi > ic + k) CHECK(lt[j] == l[j]);  // bit-exact coupling
        }
    }
}

TEST_CASE("l_tilde keeps unit variance at the change point") {
    const Grid grid(200.0, 2000);
    const LTildeParams p = demo_params(100.0, 20.0);
    const int sims = 10000;
    std::vector<double> at_c(sims);
    parallel_for(sims, 2, [&](std::size_t i) {
        const BrownianPath w = simulate_brownian(grid, Rng(21).substream(i));
        at_c[i] = l_tilde_process(w, grid, p)[800];  // grid index 1000 = c
    });
    CHECK(std::abs(test_stats::mean(at_c)) < 0.03);
    CHECK(test_stats::variance(at_c) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("interpolated scaling hits the segment values at c +- h and is continuous") {
    const double h = 100.0, c = 1000.0;
    const LTildeParams p = LTildeParams::from_laws(
        c, LifetimeLaw::gamma(0.1, 0.1), LifetimeLaw::gamma(0.15, 0.1), h);
    const double left = 2.0 * p.nu2_1 * p.mu1 / h;
    const double right = 2.0 * p.nu2_2 * p.mu2 / h;
    CHECK(p.s2(c - h) == doctest::Approx(left).epsilon(1e-12));
    CHECK(p.s2(c + h) == doctest::Approx(right).epsilon(1e-12));
    // one-sided values at c agree (linear interpolation is continuous)
    const double at_c = p.s2(c);
    const double just_right = p.s2(std::nextafter(c, c + 1.0));
    CHECK(at_c == doctest::Approx(just_right).epsilon(1e-9));
    const double expected_c = (p.mu1 * p.nu2_1 + p.mu2 * p.nu2_2) / h;
    CHECK(at_c == doctest::Approx(expected_c).epsilon(1e-12));
}

TEST_CASE("l_tilde validates its parameters") {
    const Grid grid(200.0, 2000);
    const BrownianPath w(2001, 0.0);
    LTildeParams p = demo_params(100.0, 20.0);
    p.c = 10.0;  // inside [0, h]
    CHECK_THROWS_AS(l_tilde_process(w, grid, p), std::invalid_argument);
    p = demo_params(100.0, 20.0);
    p.mu1 = 0.0;
    CHECK_THROWS_AS(l_tilde_process(w, grid, p), std::invalid_argument);
}

TEST_CASE("max_statistic basics") {
    CHECK(max_statistic({{0.0, 0.0}, {0.0}}) == 0.0);
    CHECK(max_statistic({{-3.5, 1.0}, {2.0}}) == 3.5);
    // monotone in the window family: max over a superset dominates
    const Grid grid(100.0, 1000);
    const BrownianPath w = simulate_brownian(grid, Rng(8));
    const auto l1 = l_process(w, grid, 10.0);
    const auto l2 = l_process(w, grid, 20.0);
    CHECK(max_statistic({l1, l2}) >= max_statistic({l1}));
    CHECK(max_statistic({l1, l2}) >= max_statistic({l2}));
}

TEST_CASE("upper_quantile order statistic") {
    std::vector<double> sample;
    for (int i = 1; i <= 100; ++i) sample.push_back(static_cast<double>(i));
    CHECK(upper_quantile(sample, 0.05) == 95.0);  // ceil(0.95*100) = 95
    CHECK(upper_quantile(sample, 0.01) == 99.0);
    CHECK(upper_quantile(sample, 1.0) == 1.0);    // boundary: the sample minimum
    CHECK(upper_quantile(sample, 0.05) < upper_quantile(sample, 0.01));
    CHECK_THROWS_AS(upper_quantile({}, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(upper_quantile(sample, 0.0), std::invalid_argument);
}

TEST_CASE("estimate_q guards and determinism") {
    const auto disc = make_discretization(100.0, {10.0, 20.0}, 50);
    CHECK_THROWS_AS(estimate_q(disc.grid, disc.windows, 0.05, 999, 1), std::invalid_argument);

    const Threshold q1 = estimate_q(disc.grid, disc.windows, 0.05, 2000, 9, 1);
    const Threshold q3 = estimate_q(disc.grid, disc.windows, 0.05, 2000, 9, 3);
    const Threshold q7 = estimate_q(disc.grid, disc.windows, 0.05, 2000, 9, 7);
    CHECK(q1.q == q3.q);  // bit-identical across worker counts
    CHECK(q1.q == q7.q);
    CHECK(q1.fingerprint == q7.fingerprint);

    const Threshold strict = estimate_q(disc.grid, disc.windows, 0.01, 2000, 9, 2);
    CHECK(strict.q > q1.q);
}

TEST_CASE("q is stable across seeds and grid refinement") {
    const auto disc = make_discretization(100.0, {10.0, 20.0}, 100);
    const Threshold a = estimate_q(disc.grid, disc.windows, 0.05, 10000, 1, 2);
    const Threshold b = estimate_q(disc.grid, disc.windows, 0.05, 10000, 2, 2);
    CHECK(std::abs(a.q - b.q) < 0.05);

    const auto fine = make_discretization(100.0, {10.0, 20.0}, 200);
    const Threshold c = estimate_q(fine.grid, fine.windows, 0.05, 10000, 1, 2);
    CHECK(std::abs(a.q - c.q) < 0.03);
}

TEST_CASE("calibration cache round trip and corruption recovery") {
    const auto path = (fs::temp_directory_path() / "mft_cal_cache.json").string();
    fs::remove(path);
    const CalibrationCache cache(path);
    const auto disc = make_discretization(100.0, {10.0}, 50);

    bool hit = true;
    const Threshold a =
        estimate_q_cached(cache, disc.grid, disc.windows, 0.05, 1000, 4, 2, &hit);
    CHECK_FALSE(hit);
    const Threshold b =
        estimate_q_cached(cache, disc.grid, disc.windows, 0.05, 1000, 4, 2, &hit);
    CHECK(hit);
    CHECK(a.q == b.q);
    CHECK(a.fingerprint == b.fingerprint);

    {  // corrupt it; lookup must fall back to recomputation
        std::ofstream out(path);
        out << "{ not json";
    }
    const Threshold c =
        estimate_q_cached(cache, disc.grid, disc.windows, 0.05, 1000, 4, 2, &hit);
    CHECK_FALSE(hit);
    CHECK(c.q == a.q);
    fs::remove(path);
}

TEST_CASE("covariance_curve: unit variance at lag 0, vanishing beyond 2h") {
    const Grid grid(100.0, 1000);
    const double h = 10.0;
    const auto curve = covariance_curve(
        [&](const BrownianPath& w) { return l_process(w, grid, h); }, grid, h, 50.0,
        {0.0, 20.0, 25.0}, 10000, 3, 2);
    REQUIRE(curve.size() == 3);
    CHECK(curve[0].covariance == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(curve[1].covariance) < 0.03);
    CHECK(std::abs(curve[2].covariance) < 0.03);
}
