#include "mft/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mft {

Grid::Grid(double horizon, std::int64_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("Grid: horizon must be > 0");
    if (steps < 2) throw std::invalid_argument("Grid: need at least 2 steps");
}

Grid Grid::with_min_window(double horizon, double min_window, int points_per_window) {
    if (!(min_window > 0.0) || min_window > horizon / 2.0)
        throw std::invalid_argument("Grid: min_window must lie in (0, T/2]");
    if (points_per_window < 1) throw std::invalid_argument("Grid: points_per_window must be >= 1");
    const double target = min_window / static_cast<double>(points_per_window);
    const auto steps = static_cast<std::int64_t>(std::ceil(horizon / target - 1e-9));
    return Grid(horizon, steps);
}

WindowSet::WindowSet(const Grid& grid, std::vector<double> windows) {
    if (windows.empty()) throw std::invalid_argument("WindowSet: need at least one window");
    std::sort(windows.begin(), windows.end());
    windows_.reserve(windows.size());
    for (double h : windows) {
        if (!(h > 0.0) || h > grid.horizon() / 2.0)
            throw std::invalid_argument("WindowSet: windows must lie in (0, T/2]");
        const auto steps = std::llround(h / grid.dt());
        if (steps < 1 || 2 * steps > grid.steps())
            throw std::invalid_argument("WindowSet: window does not fit the grid");
        if (!windows_.empty() && windows_.back().steps == steps)
            throw std::invalid_argument("WindowSet: windows collide after snapping to the grid");
        windows_.push_back(Window{grid.time(steps), steps});
    }
}

std::vector<double> WindowSet::values() const {
    std::vector<double> v;
    v.reserve(windows_.size());
    for (const auto& w : windows_) v.push_back(w.h);
    return v;
}

Discretization make_discretization(double horizon, const std::vector<double>& windows,
                                   int points_per_window) {
    if (windows.empty()) throw std::invalid_argument("make_discretization: empty window set");
    const double hmin = *std::min_element(windows.begin(), windows.end());
    Grid grid = Grid::with_min_window(horizon, hmin, points_per_window);
    return Discretization{grid, WindowSet(grid, windows)};
}

}  // namespace mft
