#include "mft/event_series.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mft {

EventSeries::EventSeries(double horizon, std::vector<double> events)
    : horizon_(horizon), events_(std::move(events)) {
    if (!(horizon_ > 0.0)) throw std::invalid_argument("EventSeries: horizon must be > 0");
    double prev = 0.0;
    for (double s : events_) {
        if (!(s > prev)) throw std::invalid_argument("EventSeries: events must be strictly increasing and > 0");
        prev = s;
    }
    if (!events_.empty() && events_.back() > horizon_)
        throw std::invalid_argument("EventSeries: events must lie in (0, T]");
}

std::vector<double> EventSeries::life_times() const {
    std::vector<double> xi(events_.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < events_.size(); ++i) {
        xi[i] = events_[i] - prev;
        prev = events_[i];
    }
    return xi;
}

std::size_t EventSeries::count_le(double t) const {
    return static_cast<std::size_t>(std::upper_bound(events_.begin(), events_.end(), t) - events_.begin());
}

std::size_t EventSeries::count_less(double t) const {
    return static_cast<std::size_t>(std::lower_bound(events_.begin(), events_.end(), t) - events_.begin());
}

EventSeries EventSeries::read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open event file: " + path);
    std::vector<double> events;
    double horizon = -1.0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        if (line[b] == '#') {
            const auto pos = line.find("T=");
            if (pos != std::string::npos) horizon = std::stod(line.substr(pos + 2));
            continue;
        }
        double v = 0.0;
        std::size_t e = line.find_last_not_of(" \t\r") + 1;
        const auto res = std::from_chars(line.data() + b, line.data() + e, v);
        if (res.ec != std::errc() || res.ptr != line.data() + e) {
            std::ostringstream msg;
            msg << path << ":" << lineno << ": not a number: '" << line << "'";
            throw std::runtime_error(msg.str());
        }
        events.push_back(v);
    }
    if (events.empty()) throw std::runtime_error("event file has no events: " + path);
    if (horizon < 0.0) horizon = events.back();
    return EventSeries(horizon, std::move(events));
}

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void EventSeries::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write event file: " + path);
    out << "# T=" << format_double(horizon_) << "\n";
    for (double s : events_) out << format_double(s) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mft
