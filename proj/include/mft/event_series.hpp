#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mft {

// Sorted event times on (0, T]. Life times are the waiting times between
// consecutive events; the first one is measured from 0.
class EventSeries {
public:
    EventSeries() = default;
    EventSeries(double horizon, std::vector<double> events);

    double horizon() const { return horizon_; }
    const std::vector<double>& events() const { return events_; }
    std::size_t count() const { return events_.size(); }

    // xi_1 = S_1, xi_i = S_i - S_{i-1}
    std::vector<double> life_times() const;

    // Left endpoint of life time i (1-based): S_{i-1}, with S_0 = 0.
    double life_start(std::size_t i) const { return i <= 1 ? 0.0 : events_[i - 2]; }
    double life_end(std::size_t i) const { return events_[i - 1]; }

    std::size_t count_le(double t) const;    // #{ S_i <= t }
    std::size_t count_less(double t) const;  // #{ S_i <  t }

    // Text format: one decimal event time per line; optional "# T=<horizon>"
    // header. Without the header the horizon is the last event time.
    static EventSeries read(const std::string& path);
    void write(const std::string& path) const;

private:
    double horizon_ = 0.0;
    std::vector<double> events_;
};

}  // namespace mft
