#include <doctest.h>

#include <sstream>

#include "printleak/errors.hpp"
#include "printleak/gcode.hpp"
#include "test_support.hpp"

using namespace printleak;
using namespace printleak::gcode;

TEST_SUITE_BEGIN("gcode");

TEST_CASE("parse: direct field mapping") {
    const auto cmds = parse_gcode(std::string("G1 X10.0 F1800"));
    REQUIRE(cmds.size() == 1);
    CHECK(cmds[0].opcode == Opcode::G1);
    CHECK(cmds[0].x == 10.0);
    CHECK(cmds[0].f == 1800.0);
    CHECK(!cmds[0].y);
    CHECK(!cmds[0].e);
    CHECK(cmds[0].line == 1);
}

TEST_CASE("parse: comment-only lines emit no motion command") {
    const auto cmds = parse_gcode(std::string("; comment only\n(another note)\n"));
    REQUIRE(cmds.size() == 2);
    for (const auto& c : cmds) CHECK(c.opcode == Opcode::MOther);
    CHECK(cmds[0].raw == "; comment only");
}

TEST_CASE("parse: blank lines are skipped entirely") {
    CHECK(parse_gcode(std::string("\n\n   \n")).empty());
}

TEST_CASE("parse: malformed numeral names the line") {
    CHECK_THROWS_WITH_AS(parse_gcode(std::string("G1 Xabc")),
                         doctest::Contains("line 1"), ParseError);
    CHECK_THROWS_AS(parse_gcode(std::string("G1 X1\nG1 Y2 F18z0")), ParseError);
}

TEST_CASE("parse: unknown G-word is an error, not a skip") {
    CHECK_THROWS_WITH_AS(parse_gcode(std::string("G2 X5 Y5")), doctest::Contains("G2"),
                         ParseError);
    CHECK_THROWS_AS(parse_gcode(std::string("G92 E0")), ParseError);
}

TEST_CASE("parse: M-codes pass through") {
    const auto cmds = parse_gcode(std::string("M104 S200\nG1 X1 F600"));
    REQUIRE(cmds.size() == 2);
    CHECK(cmds[0].opcode == Opcode::MOther);
    CHECK(cmds[0].raw == "M104 S200");
    CHECK(cmds[1].opcode == Opcode::G1);
}

TEST_CASE("parse: G0/G1 with no parameters is rejected") {
    CHECK_THROWS_AS(parse_gcode(std::string("G1")), ParseError);
    CHECK_THROWS_AS(parse_gcode(std::string("G1 F-100")), ParseError);
    CHECK_THROWS_AS(parse_gcode(std::string("G1 X1e999 F600")), ParseError); // non-finite
}

TEST_CASE("parse: CRLF and inline comments") {
    const auto cmds = parse_gcode(std::string("G1 X5 F600 ; move\r\nG28 (home)\r\n"));
    REQUIRE(cmds.size() == 2);
    CHECK(cmds[0].x == 5.0);
    CHECK(cmds[1].opcode == Opcode::G28);
}

TEST_CASE("to_toolpath: single move from origin") {
    const auto path = to_toolpath(parse_gcode(std::string("G1 X10 F1800")));
    REQUIRE(path.segments.size() == 1);
    const auto& seg = path.segments[0];
    CHECK(seg.start == Vec3{0, 0, 0});
    CHECK(seg.end == Vec3{10, 0, 0});
    CHECK(seg.label.plane == Plane::XY);
    CHECK(seg.label.direction == Direction::XRight);
    CHECK(!seg.extruding);
}

TEST_CASE("to_toolpath: Z move") {
    const auto path = to_toolpath(parse_gcode(std::string("G1 Z0.2 F600")));
    REQUIRE(path.segments.size() == 1);
    CHECK(path.segments[0].label.plane == Plane::Z);
    CHECK(path.segments[0].layer == 1);
}

TEST_CASE("to_toolpath: benchmark square is 12 XY + 2 Z segments") {
    // Hand enumeration: three 4-sided loops plus two layer lifts.
    const auto path = to_toolpath(parse_gcode(testgen::square_gcode_text()));
    REQUIRE(path.segments.size() == 14);
    int xy = 0, z = 0;
    for (const auto& seg : path.segments) {
        if (seg.label.plane == Plane::Z) {
            ++z;
            CHECK(!seg.extruding);
        } else {
            ++xy;
            CHECK(seg.extruding);
            CHECK(seg.length() == doctest::Approx(10.0));
            CHECK(seg.label.speed_class == SpeedClass::Slow);
        }
    }
    CHECK(xy == 12);
    CHECK(z == 2);
    // Direction sequence of the first loop.
    CHECK(path.segments[0].label.direction == Direction::XRight);
    CHECK(path.segments[1].label.direction == Direction::YUp);
    CHECK(path.segments[2].label.direction == Direction::XLeft);
    CHECK(path.segments[3].label.direction == Direction::YDown);
    // Layer indices: 0 for the first loop, bumped by each lift.
    CHECK(path.segments[3].layer == 0);
    CHECK(path.segments[4].layer == 1);  // first lift
    CHECK(path.segments[13].layer == 2);
}

TEST_CASE("to_toolpath: first motion without feed is an error") {
    CHECK_THROWS_WITH_AS(to_toolpath(parse_gcode(std::string("G1 X5"))),
                         doctest::Contains("no feed rate"), DataError);
}

TEST_CASE("to_toolpath: modal state carries position and feed") {
    const auto path = to_toolpath(parse_gcode(std::string("G1 X10 F600\nG1 Y5\nG1 X10 E1")));
    REQUIRE(path.segments.size() == 2); // third command has zero displacement
    CHECK(path.segments[1].start == Vec3{10, 0, 0});
    CHECK(path.segments[1].end == Vec3{10, 5, 0});
    CHECK(path.segments[1].feed_mm_min == 600.0);
}

TEST_CASE("to_toolpath: extrusion only counts increases") {
    const auto path =
        to_toolpath(parse_gcode(std::string("G1 X5 E1 F600\nG1 X10 E0.5\nG1 X15 E2")));
    REQUIRE(path.segments.size() == 3);
    CHECK(path.segments[0].extruding);
    CHECK(!path.segments[1].extruding); // retraction
    CHECK(path.segments[2].extruding);
}

TEST_CASE("to_toolpath: G28 homes and keeps the path contiguous") {
    const auto path = to_toolpath(parse_gcode(std::string("G1 X10 F600\nG28\nG1 Y5")));
    REQUIRE(path.segments.size() == 3);
    CHECK(path.segments[1].end == Vec3{0, 0, 0});
    CHECK(path.segments[1].label.header == Header::Positioning);
    CHECK(path.segments[2].start == Vec3{0, 0, 0});
}

TEST_CASE("classify: sign rules") {
    MotionSegment seg;
    seg.start = {5, 5, 0};
    seg.end = {0, 5, 0};
    seg.extruding = true;
    seg.feed_mm_min = 600;
    auto label = classify_segment(seg);
    CHECK(label.plane == Plane::XY);
    CHECK(label.axis == Axis::X);
    CHECK(label.direction == Direction::XLeft);
    CHECK(label.header == Header::Printing);
    CHECK(label.speed_class == SpeedClass::Slow);
}

TEST_CASE("classify: Z dominance") {
    MotionSegment seg;
    seg.start = {0, 0, 0};
    seg.end = {0, 0, 0.2};
    seg.feed_mm_min = 600;
    CHECK(classify_segment(seg).plane == Plane::Z);
}

TEST_CASE("classify: dominant axis with argmax and fast threshold") {
    MotionSegment seg;
    seg.start = {0, 0, 0};
    seg.end = {3, -4, 0};
    seg.feed_mm_min = 3000;
    const auto label = classify_segment(seg);
    CHECK(label.axis == Axis::Y);
    CHECK(label.direction == Direction::YDown);
    CHECK(label.header == Header::Positioning);
    CHECK(label.speed_class == SpeedClass::Fast);
}

TEST_CASE("classify: exact ties break toward X; boundary feed is Slow") {
    MotionSegment seg;
    seg.start = {0, 0, 0};
    seg.end = {2, 2, 0};
    seg.feed_mm_min = 2400; // boundary: not strictly above
    const auto label = classify_segment(seg);
    CHECK(label.axis == Axis::X);
    CHECK(label.speed_class == SpeedClass::Slow);
}

TEST_CASE("classify: zero displacement is an error") {
    MotionSegment seg;
    seg.feed_mm_min = 600;
    CHECK_THROWS_AS(classify_segment(seg), DataError);
}

TEST_CASE("classify: invariant under uniform displacement scaling") {
    Rng rng(101);
    for (int i = 0; i < 200; ++i) {
        MotionSegment seg;
        seg.start = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        Vec3 d{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        if (d.norm() == 0.0) continue;
        seg.end = seg.start + d;
        seg.feed_mm_min = 600 + 600 * rng.below(5);
        seg.extruding = rng.uniform01() < 0.5;
        const auto base = classify_segment(seg);
        const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
        MotionSegment scaled = seg;
        scaled.end = seg.start + d * scale;
        CHECK(classify_segment(scaled) == base);
    }
}

TEST_CASE("emit: empty toolpath is header and footer only") {
    const auto text = emit_gcode(Toolpath{});
    CHECK(text.find("G1 ") == std::string::npos);
    CHECK(text.find("; toolpath export") == 0);
}

TEST_CASE("emit: single segment format") {
    Toolpath path;
    MotionSegment seg;
    seg.start = {0, 0, 0};
    seg.end = {10, 0, 0};
    seg.feed_mm_min = 1800;
    seg.label = classify_segment(seg);
    path.segments.push_back(seg);
    const auto text = emit_gcode(path);
    CHECK(text.find("G1 X10.000 Y0.000 Z0.000 F1800\n") != std::string::npos);
}

TEST_CASE("emit/parse round trip preserves geometry and labels") {
    Rng rng(7);
    for (int rep = 0; rep < 60; ++rep) {
        const auto path = testgen::random_toolpath(rng);
        const auto rebuilt = to_toolpath(parse_gcode(emit_gcode(path)), path.origin);
        REQUIRE(rebuilt.segments.size() == path.segments.size());
        for (std::size_t i = 0; i < path.segments.size(); ++i) {
            const auto& a = path.segments[i];
            const auto& b = rebuilt.segments[i];
            CHECK(distance(a.start, b.start) < 1e-3);
            CHECK(distance(a.end, b.end) < 1e-3);
            CHECK(a.label == b.label);
        }
    }
}

TEST_CASE("layer index is non-decreasing along generated toolpaths") {
    Rng rng(9);
    for (int rep = 0; rep < 40; ++rep) {
        const auto path = testgen::random_toolpath(rng, 20);
        const auto rebuilt = to_toolpath(parse_gcode(emit_gcode(path)), path.origin);
        int prev = 0;
        for (const auto& seg : rebuilt.segments) {
            CHECK(seg.layer >= prev);
            prev = seg.layer;
        }
    }
}

TEST_CASE("label strings round trip") {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const auto path = testgen::random_toolpath(rng);
        for (const auto& seg : path.segments) {
            CHECK(label_from_string(to_string(seg.label)) == seg.label);
        }
    }
    CHECK_THROWS_AS(label_from_string("XY:X:-:Printing:Slow"), ParseError);
    CHECK_THROWS_AS(label_from_string("bogus"), ParseError);
}

TEST_SUITE_END();
