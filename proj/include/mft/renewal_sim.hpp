#pragma once

#include "mft/change_point_model.hpp"
#include "mft/event_series.hpp"
#include "mft/rng.hpp"

namespace mft {

// Events of a renewal process with the given life-time law, truncated at the
// horizon. Pure in (law, horizon, rng state).
EventSeries sample_renewal(const LifetimeLaw& law, double horizon, Rng rng);

// Composite process: every segment law is simulated independently from time 0
// (substream per segment index) and restricted to its segment, so segments
// are exactly independent. The life time straddling a change point is the gap
// between the last retained event before it and the first one after.
EventSeries sample_composite(const ChangePointModel& model, Rng rng);

struct RandomDesignDraw {
    EventSeries series;
    ChangePointModel model;                 // realized segment laws
    std::vector<LabeledChangePoint> truth;  // change points with kinds
};

RandomDesignDraw sample_random_design(const RandomDesign& design, double horizon, Rng rng);

}  // namespace mft
