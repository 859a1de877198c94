#include <doctest.h>

#include <cmath>
#include <sstream>

#include "printleak/errors.hpp"
#include "printleak/ingest.hpp"
#include "test_support.hpp"

using namespace printleak;
using namespace printleak::ingest;

TEST_SUITE_BEGIN("ingest");

namespace {

void check_traces_close(const SensorTrace& a, const SensorTrace& b, double tol = 1e-6) {
    CHECK(a.acoustic_rate == doctest::Approx(b.acoustic_rate));
    CHECK(a.magnetic_rate == doctest::Approx(b.magnetic_rate));
    CHECK(std::fabs(a.start_time - b.start_time) < tol);
    REQUIRE(a.acoustic.size() == b.acoustic.size());
    REQUIRE(a.magnetic.size() == b.magnetic.size());
    for (std::size_t i = 0; i < a.acoustic.size(); ++i) {
        CHECK(std::fabs(a.acoustic[i] - b.acoustic[i]) < tol);
    }
    for (std::size_t i = 0; i < a.magnetic.size(); ++i) {
        CHECK(std::fabs(a.magnetic[i].x - b.magnetic[i].x) < tol);
        CHECK(std::fabs(a.magnetic[i].y - b.magnetic[i].y) < tol);
        CHECK(std::fabs(a.magnetic[i].z - b.magnetic[i].z) < tol);
    }
}

} // namespace

TEST_CASE("write/read round trip on generated traces") {
    Rng rng(42);
    for (int rep = 0; rep < 25; ++rep) {
        const auto trace = testgen::random_trace(rng);
        std::stringstream buf;
        write_sensor_csv(trace, buf);
        const auto back = read_sensor_csv(buf);
        check_traces_close(trace, back);
    }
}

TEST_CASE("minimal two-row file") {
    std::istringstream in(
        "time_s,ax,bx_uT,by_uT,bz_uT\n"
        "0.000000000,0.5,1.000000,2.000000,3.000000\n"
        "0.000125000,-0.25,1.000000,2.000000,3.000000\n");
    const auto trace = read_sensor_csv(in);
    REQUIRE(trace.acoustic.size() == 2);
    CHECK(trace.acoustic[0] == doctest::Approx(0.5));
    CHECK(trace.acoustic[1] == doctest::Approx(-0.25));
    CHECK(trace.acoustic_rate == doctest::Approx(8000.0));
    REQUIRE(trace.magnetic.size() == 1);
    CHECK(trace.magnetic[0].z == doctest::Approx(3.0));
}

TEST_CASE("non-monotone timestamps name the row") {
    std::istringstream in(
        "time_s,ax,bx_uT,by_uT,bz_uT\n"
        "0.0,0.1,0,0,0\n"
        "0.1,0.1,0,0,0\n"
        "0.05,0.1,0,0,0\n");
    CHECK_THROWS_WITH_AS(read_sensor_csv(in), doctest::Contains("row 3"), DataError);
}

TEST_CASE("schema violations are parse errors") {
    std::istringstream bad_header("time,ax\n");
    CHECK_THROWS_AS(read_sensor_csv(bad_header), ParseError);
    std::istringstream missing_col(
        "time_s,ax,bx_uT,by_uT,bz_uT\n"
        "0.0,0.1,0,0\n");
    CHECK_THROWS_AS(read_sensor_csv(missing_col), ParseError);
    std::istringstream bad_value(
        "time_s,ax,bx_uT,by_uT,bz_uT\n"
        "0.0,zap,0,0,0\n");
    CHECK_THROWS_AS(read_sensor_csv(bad_value), ParseError);
}

TEST_CASE("empty trace writes header only") {
    SensorTrace trace;
    std::stringstream buf;
    write_sensor_csv(trace, buf);
    CHECK(buf.str() == "time_s,ax,bx_uT,by_uT,bz_uT\n");
    const auto back = read_sensor_csv(buf);
    CHECK(back.acoustic.empty());
    CHECK(back.magnetic.empty());
}

TEST_CASE("align_channels: exact frame arithmetic") {
    // 1.0 s at 8 kHz / 100 Hz with 100 ms frames: 10 frames of 800 + 10.
    SensorTrace trace;
    trace.acoustic.assign(8000, 0.25);
    trace.magnetic.assign(100, Vec3{1, 2, 3});
    const auto frames = align_channels(trace, 100.0);
    REQUIRE(frames.size() == 10);
    for (const auto& f : frames) {
        CHECK(f.acoustic.size() == 800);
        CHECK(f.magnetic.size() == 10);
    }
}

TEST_CASE("align_channels: trailing partial frame is dropped") {
    SensorTrace trace;
    trace.acoustic.assign(8400, 0.0); // 1.05 s
    trace.magnetic.assign(105, Vec3{});
    CHECK(align_channels(trace, 100.0).size() == 10);
}

TEST_CASE("align_channels: no frame mixes samples across its boundary") {
    Rng rng(3);
    auto trace = testgen::random_trace(rng);
    const auto frames = align_channels(trace, 100.0);
    const std::size_t ac_per = 800, mg_per = 10;
    REQUIRE(frames.size() == trace.acoustic.size() / ac_per);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        CHECK(frames[f].acoustic.front() == trace.acoustic[f * ac_per]);
        CHECK(frames[f].acoustic.back() == trace.acoustic[(f + 1) * ac_per - 1]);
        CHECK(frames[f].magnetic.front() == trace.magnetic[f * mg_per]);
        CHECK(frames[f].magnetic.back() == trace.magnetic[(f + 1) * mg_per - 1]);
    }
}

TEST_CASE("align_channels: too few magnetic samples per frame") {
    SensorTrace trace;
    trace.acoustic.assign(8000, 0.0);
    trace.magnetic.assign(10, Vec3{});
    trace.magnetic_rate = 10.0; // 1 magnetic sample per 100 ms frame
    CHECK_THROWS_WITH_AS(align_channels(trace, 100.0), doctest::Contains("magnetic"), DataError);
}

TEST_CASE("acoustic_db is the derived gain view") {
    SensorTrace trace;
    trace.acoustic = {1.0, -1.0, 0.0};
    const auto db = trace.acoustic_db();
    CHECK(db[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(db[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(db[2] == doctest::Approx(-240.0));
}

TEST_SUITE_END();
