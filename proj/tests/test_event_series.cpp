#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "mft/event_series.hpp"

using namespace mft;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("validation rejects malformed series") {
    CHECK_THROWS_AS(EventSeries(10.0, {1.0, 1.0}), std::invalid_argument);   // not strict
    CHECK_THROWS_AS(EventSeries(10.0, {0.0, 1.0}), std::invalid_argument);   // not > 0
    CHECK_THROWS_AS(EventSeries(10.0, {2.0, 11.0}), std::invalid_argument);  // > T
    CHECK_THROWS_AS(EventSeries(0.0, {}), std::invalid_argument);
    CHECK_NOTHROW(EventSeries(10.0, {}));
    CHECK_NOTHROW(EventSeries(10.0, {0.5, 10.0}));  // T itself is allowed
}

TEST_CASE("life times start from zero") {
    const EventSeries e(10.0, {1.0, 2.5, 7.0});
    const auto xi = e.life_times();
    REQUIRE(xi.size() == 3);
    CHECK(xi[0] == 1.0);
    CHECK(xi[1] == 1.5);
    CHECK(xi[2] == 4.5);
    CHECK(e.life_start(1) == 0.0);
    CHECK(e.life_end(3) == 7.0);
}

TEST_CASE("counting functions") {
    const EventSeries e(10.0, {1.0, 2.0, 3.0});
    CHECK(e.count_le(2.0) == 2);
    CHECK(e.count_less(2.0) == 1);
    CHECK(e.count_le(0.5) == 0);
    CHECK(e.count_le(10.0) == 3);
}

TEST_CASE("write/read round trip preserves values and horizon") {
    const EventSeries e(12.5, {0.1234567890123456, 1.0 / 3.0, 11.999999999999998});
    const auto path = tmp_file("mft_series_roundtrip.txt");
    e.write(path.string());
    const EventSeries r = EventSeries::read(path.string());
    CHECK(r.horizon() == e.horizon());
    REQUIRE(r.count() == e.count());
    for (std::size_t i = 0; i < e.count(); ++i) CHECK(r.events()[i] == e.events()[i]);
    fs::remove(path);
}

TEST_CASE("read without header takes the last event as horizon") {
    const auto path = tmp_file("mft_series_noheader.txt");
    {
        std::ofstream out(path);
        out << "0.5\n1.5\n2.25\n";
    }
    const EventSeries r = EventSeries::read(path.string());
    CHECK(r.horizon() == 2.25);
    CHECK(r.count() == 3);
    fs::remove(path);
}

TEST_CASE("read errors") {
    CHECK_THROWS(EventSeries::read("/nonexistent/events.txt"));
    const auto empty = tmp_file("mft_series_empty.txt");
    { std::ofstream out(empty); }
    CHECK_THROWS(EventSeries::read(empty.string()));
    const auto bad = tmp_file("mft_series_bad.txt");
    {
        std::ofstream out(bad);
        out << "1.0\nnot-a-number\n";
    }
    CHECK_THROWS(EventSeries::read(bad.string()));
    fs::remove(empty);
    fs::remove(bad);
}
