#include <doctest.h>

#include <cmath>
#include <vector>

#include "mft/renewal_sim.hpp"
#include "support/stats.hpp"

using namespace mft;

TEST_CASE("gamma shape/scale mapping") {
    const LifetimeLaw law = LifetimeLaw::gamma(0.1, 0.1);
    CHECK(law.shape() == doctest::Approx(1.0));
    CHECK(law.scale() == doctest::Approx(0.1));
    CHECK_THROWS(LifetimeLaw::gamma(-1.0, 0.1));
    CHECK_THROWS(LifetimeLaw::gamma(0.1, 0.0));
}

TEST_CASE("nu2 closed form: 2 k (k+3) theta^4") {
    // exponential mean 1: k=1, theta=1 -> 8
    CHECK(LifetimeLaw::gamma(1.0, 1.0).nu2() == doctest::Approx(8.0));
    CHECK(LifetimeLaw::gamma(1.0, 0.5).nu2() == doctest::Approx(2.0 * 4.0 * 7.0 * 0.0625 * 0.0625));
}

TEST_CASE("sample_renewal is deterministic in the seed") {
    const LifetimeLaw law = LifetimeLaw::gamma(1.0, 1.0);
    const EventSeries a = sample_renewal(law, 10.0, Rng(77));
    const EventSeries b = sample_renewal(law, 10.0, Rng(77));
    REQUIRE(a.count() == b.count());
    for (std::size_t i = 0; i < a.count(); ++i) CHECK(a.events()[i] == b.events()[i]);
    const EventSeries c = sample_renewal(law, 10.0, Rng(78));
    CHECK(a.events() != c.events());
}

TEST_CASE("events are strictly increasing inside (0, T]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const EventSeries e =
            sample_renewal(LifetimeLaw::gamma(0.3, 0.4), 50.0, Rng(seed));
        double prev = 0.0;
        for (double s : e.events()) {
            CHECK(s > prev);
            prev = s;
        }
        CHECK(prev <= 50.0);
    }
}

TEST_CASE("renewal count approaches T/mu") {
    // elementary renewal theorem; gamma(mu=0.25, var=0.03), T=2000 -> ~8000
    const LifetimeLaw law = LifetimeLaw::gamma_from_variance(0.25, 0.03);
    double total = 0.0;
    const int runs = 20;
    for (int r = 0; r < runs; ++r)
        total += static_cast<double>(sample_renewal(law, 2000.0, Rng(100 + r)).count());
    const double avg = total / runs;
    // sd of a single count ~ sqrt(sigma^2 T / mu^3) ~ 62; 3 se over 20 runs ~ 42
    CHECK(std::abs(avg - 8000.0) < 50.0);
}

TEST_CASE("life-time moments converge to the law's") {
    const LifetimeLaw law = LifetimeLaw::gamma(0.25, 0.125);
    const double horizon = 1e5 * law.mean;
    const EventSeries e = sample_renewal(law, horizon, Rng(5));
    const auto xi = e.life_times();
    const double n = static_cast<double>(xi.size());
    const double se_mean = law.sd / std::sqrt(n);
    CHECK(std::abs(test_stats::mean(xi) - law.mean) < 3.0 * se_mean);
    const double se_var = std::sqrt(law.nu2() / n);
    CHECK(std::abs(test_stats::variance(xi) - law.variance()) < 3.0 * se_var);
}

TEST_CASE("composite with no change points reduces to a renewal draw") {
    const ChangePointModel model = ChangePointModel::single(LifetimeLaw::gamma(0.5, 0.25), 100.0);
    const EventSeries a = sample_composite(model, Rng(3));
    const EventSeries b = sample_composite(model, Rng(3));
    CHECK(a.events() == b.events());
    CHECK(a.count() > 100);
}

TEST_CASE("composite segments carry their own laws") {
    // (mu=1 | mu=2), c=500, T=1000: segment means within 3 standard errors
    const ChangePointModel model(1000.0, {500.0},
                                 {LifetimeLaw::gamma(1.0, 0.5), LifetimeLaw::gamma(2.0, 0.5)});
    std::vector<double> seg1, seg2;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const EventSeries e = sample_composite(model, Rng(400 + seed));
        for (std::size_t i = 1; i <= e.count(); ++i) {
            if (e.life_start(i) >= 0.0 && e.life_end(i) <= 500.0)
                seg1.push_back(e.life_end(i) - e.life_start(i));
            else if (e.life_start(i) >= 500.0)
                seg2.push_back(e.life_end(i) - e.life_start(i));
        }
    }
    CHECK(std::abs(test_stats::mean(seg1) - 1.0) < 3.0 * 0.5 / std::sqrt(seg1.size()));
    CHECK(std::abs(test_stats::mean(seg2) - 2.0) < 3.0 * 0.5 / std::sqrt(seg2.size()));
}

TEST_CASE("composite restriction: same-law segments match a plain renewal in law") {
    // two-sample KS on life times, alpha = 0.01, expect >= 98/100 non-rejections
    const LifetimeLaw law = LifetimeLaw::gamma(0.5, 0.25);
    int ok = 0;
    for (std::uint64_t run = 0; run < 100; ++run) {
        const ChangePointModel model(400.0, {120.0, 260.0}, {law, law, law});
        const EventSeries comp = sample_composite(model, Rng(2000 + run));
        const EventSeries ref = sample_renewal(law, 400.0, Rng(5000 + run));
        if (test_stats::ks_two_sample(comp.life_times(), ref.life_times()) > 0.01) ++ok;
    }
    CHECK(ok >= 98);
}

TEST_CASE("showcase model matches its published segment structure") {
    const ChangePointModel model = showcase_model();
    CHECK(model.change_points == std::vector<double>{430.0, 630.0, 1060.0, 1490.0});
    CHECK(model.segment_laws[2].variance() == doctest::Approx(0.0216));
    const EventSeries e = sample_composite(model, Rng(1));
    // expected events: sum of segment lengths over segment means ~ 5609
    CHECK(std::abs(static_cast<double>(e.count()) - 5609.0) < 0.05 * 5609.0);
}

TEST_CASE("rate-only design: ~5 change points on average, all rate kind") {
    RandomDesign design = RandomDesign::rate_only(LifetimeLaw::gamma(0.25, 0.125));
    double cps = 0.0;
    const int runs = 300;
    for (int r = 0; r < runs; ++r) {
        const auto draw = sample_random_design(design, 2000.0, Rng(900 + r));
        cps += static_cast<double>(draw.truth.size());
        for (const auto& t : draw.truth) CHECK(t.kind == ChangeKind::rate);
        CHECK(draw.model.change_points.size() == draw.truth.size());
        for (std::size_t j = 1; j < draw.model.segment_laws.size(); j += 2)
            CHECK(draw.model.segment_laws[j].mean != design.base.mean);
    }
    // T / E[gap] = 2000/400 = 5 renewal-style crossings; boundary effects pull
    // the truncated count slightly below that
    CHECK(cps / runs > 3.9);
    CHECK(cps / runs < 5.5);
}

TEST_CASE("variance-only design keeps the mean and labels variance") {
    RandomDesign design = RandomDesign::variance_only(LifetimeLaw::gamma(0.25, 0.125));
    const auto draw = sample_random_design(design, 2000.0, Rng(17));
    for (const auto& t : draw.truth) CHECK(t.kind == ChangeKind::variance);
    for (const auto& law : draw.model.segment_laws) CHECK(law.mean == 0.25);
}

TEST_CASE("mixed design kinds are uniform over rate/variance/both") {
    // kind frequencies only need the design draw; a large mean keeps the
    // event simulation cheap
    RandomDesign design = RandomDesign::mixed(LifetimeLaw::gamma(50.0, 25.0));
    int k_rate = 0, k_var = 0, k_both = 0, total = 0;
    for (int r = 0; r < 10000; ++r) {
        const auto draw = sample_random_design(design, 2000.0, Rng(7000 + r));
        for (const auto& t : draw.truth) {
            ++total;
            if (t.kind == ChangeKind::rate) ++k_rate;
            if (t.kind == ChangeKind::variance) ++k_var;
            if (t.kind == ChangeKind::both) ++k_both;
        }
    }
    CHECK(std::abs(static_cast<double>(k_both) / total - 1.0 / 3.0) < 0.02);
    CHECK(std::abs(static_cast<double>(k_rate) / total - 1.0 / 3.0) < 0.02);
    CHECK(std::abs(static_cast<double>(k_var) / total - 1.0 / 3.0) < 0.02);
}

TEST_CASE("tail guard keeps the last change point away from the horizon") {
    RandomDesign design = RandomDesign::rate_only(LifetimeLaw::gamma(0.25, 0.125));
    design.tail_guard = 400.0;
    for (int r = 0; r < 50; ++r) {
        const auto draw = sample_random_design(design, 2000.0, Rng(300 + r));
        if (!draw.truth.empty()) CHECK(draw.truth.back().time < 1600.0);
    }
}

TEST_CASE("random design draws are reproducible") {
    RandomDesign design = RandomDesign::mixed(LifetimeLaw::gamma(0.3, 0.2));
    const auto a = sample_random_design(design, 500.0, Rng(11));
    const auto b = sample_random_design(design, 500.0, Rng(11));
    CHECK(a.series.events() == b.series.events());
    CHECK(a.model.change_points == b.model.change_points);
}
