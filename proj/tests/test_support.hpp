#pragma once

// Shared generators for property-style tests.

#include <string>
#include <vector>

#include "printleak/gcode.hpp"
#include "printleak/ingest.hpp"
#include "printleak/rng.hpp"

namespace testgen {

using printleak::Rng;
using printleak::Vec3;

// Axis-aligned random toolpath with integer feeds, valid for emit round trips.
inline printleak::gcode::Toolpath random_toolpath(Rng& rng, int max_segments = 12) {
    using namespace printleak::gcode;
    Toolpath path;
    path.origin = Vec3{rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0), 0.0};
    const double feeds[] = {600.0, 1200.0, 1800.0, 3000.0, 4800.0};
    Vec3 pos = path.origin;
    int layer = 0;
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_segments)));
    for (int i = 0; i < n; ++i) {
        MotionSegment seg;
        seg.start = pos;
        const int kind = static_cast<int>(rng.below(5));
        const double len = 0.05 + rng.uniform(0.0, 30.0);
        Vec3 d{};
        switch (kind) {
            case 0: d.x = len; break;
            case 1: d.x = -len; break;
            case 2: d.y = len; break;
            case 3: d.y = -len; break;
            case 4: d.z = 0.05 + rng.uniform(0.0, 2.0); break;
        }
        seg.end = pos + d;
        seg.feed_mm_min = feeds[rng.below(5)];
        seg.extruding = kind != 4 && rng.uniform01() < 0.5;
        seg.label = classify_segment(seg);
        if (seg.label.plane == Plane::Z && d.z > 0.0) ++layer;
        seg.layer = layer;
        path.segments.push_back(seg);
        pos = seg.end;
    }
    return path;
}

// Random well-formed sensor trace; duration a whole number of 100 ms frames.
inline printleak::ingest::SensorTrace random_trace(Rng& rng, double acoustic_rate = 8000.0,
                                                   double magnetic_rate = 100.0) {
    printleak::ingest::SensorTrace trace;
    trace.acoustic_rate = acoustic_rate;
    trace.magnetic_rate = magnetic_rate;
    trace.start_time = 0.0;
    const int frames = 2 + static_cast<int>(rng.below(8));
    const std::size_t n_ac = static_cast<std::size_t>(frames) *
                             static_cast<std::size_t>(acoustic_rate / 10.0);
    const std::size_t n_mag = static_cast<std::size_t>(frames) *
                              static_cast<std::size_t>(magnetic_rate / 10.0);
    trace.acoustic.resize(n_ac);
    for (auto& a : trace.acoustic) a = rng.uniform(-1.0, 1.0);
    trace.magnetic.resize(n_mag);
    for (auto& m : trace.magnetic) {
        m = Vec3{rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)};
    }
    return trace;
}

// The benchmark square as authored G-code text (1 cm sides, 3 layers).
inline std::string square_gcode_text() {
    return "; benchmark square: 1 cm sides, 3 layers\n"
           "G28\n"
           "G1 X10.000 Y0.000 Z0.000 E0.50000 F600\n"
           "G1 X10.000 Y10.000 E1.00000 F600\n"
           "G1 X0.000 Y10.000 E1.50000 F600\n"
           "G1 X0.000 Y0.000 E2.00000 F600\n"
           "G1 Z0.200 F120\n"
           "G1 X10.000 Y0.000 E2.50000 F600\n"
           "G1 X10.000 Y10.000 E3.00000 F600\n"
           "G1 X0.000 Y10.000 E3.50000 F600\n"
           "G1 X0.000 Y0.000 E4.00000 F600\n"
           "G1 Z0.400 F120\n"
           "G1 X10.000 Y0.000 E4.50000 F600\n"
           "G1 X10.000 Y10.000 E5.00000 F600\n"
           "G1 X0.000 Y10.000 E5.50000 F600\n"
           "G1 X0.000 Y0.000 E6.00000 F600\n"
           "; end\n";
}

} // namespace testgen
