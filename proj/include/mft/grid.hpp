#pragma once

#include <cstdint>
#include <vector>

namespace mft {

// Uniform time grid on [0, T] with T/dt integral. Windowed statistics and
// the simulated limit processes are both evaluated at grid points, so the
// calibrated threshold and the data statistic share one discretization.
class Grid {
public:
    Grid(double horizon, std::int64_t steps);

    // Grid whose step is at most min_window / points_per_window, i.e. the
    // smallest analysis window spans at least points_per_window steps.
    static Grid with_min_window(double horizon, double min_window, int points_per_window = 100);

    double horizon() const { return horizon_; }
    std::int64_t steps() const { return steps_; }
    double dt() const { return horizon_ / static_cast<double>(steps_); }
    double time(std::int64_t i) const {
        return static_cast<double>(i) * horizon_ / static_cast<double>(steps_);
    }

    bool operator==(const Grid&) const = default;

private:
    double horizon_;
    std::int64_t steps_;
};

// Analysis windows snapped to whole grid steps, ascending. Snapping error is
// below dt/2 (under 0.5% of the window when the grid was built with
// points_per_window >= 100).
class WindowSet {
public:
    struct Window {
        double h;             // snapped width, = steps * grid.dt()
        std::int64_t steps;
    };

    WindowSet(const Grid& grid, std::vector<double> windows);

    const std::vector<Window>& windows() const { return windows_; }
    std::size_t size() const { return windows_.size(); }
    double min_window() const { return windows_.front().h; }
    double max_window() const { return windows_.back().h; }
    std::vector<double> values() const;

private:
    std::vector<Window> windows_;
};

// Grid and snapped windows with the step tied to the smallest window.
struct Discretization {
    Grid grid;
    WindowSet windows;
};
Discretization make_discretization(double horizon, const std::vector<double>& windows,
                                   int points_per_window = 100);

}  // namespace mft
