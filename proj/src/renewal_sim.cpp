#include "mft/renewal_sim.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace mft {

namespace {

// Events of `law` on (0, horizon], appended to `out`. Life times below the
// resolution of double addition are nudged up one ulp so event times stay
// strictly increasing (relevant for very irregular laws, shape < 1).
void append_renewal_events(const LifetimeLaw& law, double horizon, Rng& rng,
                           std::vector<double>& out) {
    std::gamma_distribution<double> draw(law.shape(), law.scale());
    double t = 0.0;
    for (;;) {
        const double next = t + draw(rng);
        t = next > t ? next : std::nextafter(t, horizon + 1.0);
        if (t > horizon) break;
        out.push_back(t);
    }
}

}  // namespace

EventSeries sample_renewal(const LifetimeLaw& law, double horizon, Rng rng) {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_renewal: horizon must be > 0");
    if (!(law.mean > 0.0) || !(law.sd > 0.0))
        throw std::invalid_argument("sample_renewal: invalid life-time law");
    std::vector<double> events;
    events.reserve(static_cast<std::size_t>(horizon / law.mean * 1.25) + 16);
    append_renewal_events(law, horizon, rng, events);
    return EventSeries(horizon, std::move(events));
}

EventSeries sample_composite(const ChangePointModel& model, Rng rng) {
    model.validate();
    const std::size_t k = model.change_points.size();
    std::vector<double> events;
    for (std::size_t j = 0; j <= k; ++j) {
        const double seg_begin = j == 0 ? 0.0 : model.change_points[j - 1];
        const double seg_end = j == k ? model.horizon : model.change_points[j];
        Rng seg_rng = rng.substream(j);
        std::vector<double> seg_events;
        append_renewal_events(model.segment_laws[j], seg_end, seg_rng, seg_events);
        for (double s : seg_events)
            if (s > seg_begin) events.push_back(s);
    }
    return EventSeries(model.horizon, std::move(events));
}

RandomDesignDraw sample_random_design(const RandomDesign& design, double horizon, Rng rng) {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_random_design: horizon must be > 0");
    if (!(design.gap_max > 0.0)) throw std::invalid_argument("sample_random_design: gap_max must be > 0");

    Rng design_rng = rng.substream(0);
    std::uniform_real_distribution<double> gap(0.0, design.gap_max);

    std::vector<double> cps;
    for (int attempt = 0; ; ++attempt) {
        if (attempt >= 100000)
            throw std::runtime_error("sample_random_design: cannot satisfy tail guard");
        cps.clear();
        double cum = gap(design_rng);
        while (cum < horizon) {
            if (cum > 0.0 && (cps.empty() || cum > cps.back())) cps.push_back(cum);
            cum += gap(design_rng);
        }
        if (cps.empty() || cps.back() < horizon - design.tail_guard) break;
    }

    const LifetimeLaw base = design.base;
    std::vector<LifetimeLaw> laws{base};
    std::vector<LabeledChangePoint> truth;
    truth.reserve(cps.size());

    auto pick = [&design_rng](const std::vector<double>& table) {
        std::uniform_int_distribution<std::size_t> d(0, table.size() - 1);
        return table[d(design_rng)];
    };

    ChangeKind pending = ChangeKind::rate;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const bool departing = i % 2 == 0;  // odd-valued change point (1-based)
        if (departing) {
            switch (design.type) {
                case RandomDesignType::rate_only:
                    pending = ChangeKind::rate;
                    laws.push_back(LifetimeLaw::gamma(base.mean * pick(design.mean_multipliers), base.sd));
                    break;
                case RandomDesignType::variance_only:
                    pending = ChangeKind::variance;
                    laws.push_back(LifetimeLaw::gamma_from_variance(
                        base.mean, base.variance() * pick(design.variance_multipliers)));
                    break;
                case RandomDesignType::mixed: {
                    std::uniform_int_distribution<int> kind_draw(0, 2);
                    pending = static_cast<ChangeKind>(kind_draw(design_rng));
                    double mean = base.mean;
                    double var = base.variance();
                    if (pending == ChangeKind::rate || pending == ChangeKind::both)
                        mean *= pick(design.mean_multipliers);
                    if (pending == ChangeKind::variance || pending == ChangeKind::both)
                        var *= pick(design.variance_multipliers);
                    laws.push_back(LifetimeLaw::gamma_from_variance(mean, var));
                    break;
                }
            }
        } else {
            laws.push_back(base);  // jump back; the same parameters revert
        }
        truth.push_back({cps[i], pending});
    }

    ChangePointModel model(horizon, std::move(cps), std::move(laws));
    EventSeries series = sample_composite(model, rng.substream(1));
    return RandomDesignDraw{std::move(series), std::move(model), std::move(truth)};
}

}  // namespace mft
