#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "printleak/geom.hpp"

namespace printleak::gcode {

// Dialect: Marlin-style absolute mode, motion commands only.
// G0/G1 move, G28 homes; every other M/comment line is kept as a
// pass-through record so the source file can be reasoned about later.
enum class Opcode { G0, G1, G28, MOther };

struct GCommand {
    Opcode opcode = Opcode::MOther;
    std::optional<double> x, y, z; // millimeters, absolute
    std::optional<double> e;       // filament millimeters, absolute
    std::optional<double> f;       // feed rate, mm/min
    int line = 0;                  // 1-based source line
    std::string raw;               // original text for MOther records
};

enum class Plane { Z, XY };
enum class Axis { X, Y };
enum class Direction { XLeft, XRight, YUp, YDown };
enum class Header { Printing, Positioning };
enum class SpeedClass { Slow, Fast };

struct MovementLabel {
    Plane plane = Plane::XY;
    std::optional<Axis> axis;           // set iff plane == XY
    std::optional<Direction> direction; // set iff plane == XY
    Header header = Header::Positioning;
    SpeedClass speed_class = SpeedClass::Slow;

    friend bool operator==(const MovementLabel&, const MovementLabel&) = default;

    // Run identity for segmentation ignores the speed class.
    bool same_movement(const MovementLabel& o) const {
        return plane == o.plane && axis == o.axis && direction == o.direction &&
               header == o.header;
    }
};

std::string to_string(const MovementLabel& label);
MovementLabel label_from_string(const std::string& text);

std::string to_string(Direction d);
std::string to_string(Header h);
std::string to_string(SpeedClass s);

struct LabelConfig {
    // Feed rates strictly above the boundary are Fast. Sits between typical
    // print (~600-1800) and travel (~3000) feeds.
    double speed_boundary_mm_min = 2400.0;
};

struct MotionSegment {
    Vec3 start, end;            // millimeters
    double feed_mm_min = 0.0;
    bool extruding = false;
    int layer = 0;
    MovementLabel label;

    Vec3 delta() const { return end - start; }
    double length() const { return delta().norm(); }
    double duration_s() const { return length() / feed_mm_min * 60.0; }
};

struct Toolpath {
    std::vector<MotionSegment> segments;
    Vec3 origin; // start position of the first segment

    bool empty() const { return segments.empty(); }
    double duration_s() const;
    double total_length() const;
};

// Parses the motion dialect. Comments start with ';' or are wrapped in
// '(' ')'. Throws ParseError with the line number on malformed numerals,
// unknown G-words, or command words outside the dialect.
std::vector<GCommand> parse_gcode(std::istream& in);
std::vector<GCommand> parse_gcode(const std::string& text);

// Replays commands with modal state (absent coordinates inherit the previous
// position, absent F the previous feed) and emits one labeled segment per
// move with nonzero displacement. Throws DataError if the first move has no
// feed rate established.
Toolpath to_toolpath(const std::vector<GCommand>& commands, Vec3 start = {},
                     const LabelConfig& cfg = {});

// Labels a segment from its displacement signs, extrusion flag and feed.
// Throws DataError on zero displacement.
MovementLabel classify_segment(const MotionSegment& s, const LabelConfig& cfg = {});

// Emits absolute-coordinate G1 lines, X/Y/Z to 3 decimals, F as integer,
// E accumulated while extruding. Byte-deterministic for a given toolpath.
void emit_gcode(const Toolpath& t, std::ostream& out);
std::string emit_gcode(const Toolpath& t);

} // namespace printleak::gcode
