#include "printleak/gcode.hpp"

#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "printleak/errors.hpp"
#include "text_util.hpp"

namespace printleak::gcode {

namespace {

constexpr double kHomingFeed = 3000.0;    // mm/min used for G28 travel
constexpr double kExtrusionPerMm = 0.05;  // filament mm per path mm on emit

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw ParseError("line " + std::to_string(line) + ": " + what);
}

// Removes ';' comments and '(' ')' comments. Returns the code part.
std::string strip_comments(std::string_view line, int line_no) {
    std::string out;
    bool in_paren = false;
    for (char c : line) {
        if (in_paren) {
            if (c == ')') in_paren = false;
            continue;
        }
        if (c == '(') {
            in_paren = true;
            continue;
        }
        if (c == ';') break;
        out.push_back(c);
    }
    if (in_paren) parse_fail(line_no, "unterminated '(' comment");
    return out;
}

} // namespace

double Toolpath::duration_s() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration_s();
    return t;
}

double Toolpath::total_length() const {
    double l = 0.0;
    for (const auto& s : segments) l += s.length();
    return l;
}

std::string to_string(Direction d) {
    switch (d) {
        case Direction::XLeft: return "XLeft";
        case Direction::XRight: return "XRight";
        case Direction::YUp: return "YUp";
        case Direction::YDown: return "YDown";
    }
    return "?";
}

std::string to_string(Header h) {
    return h == Header::Printing ? "Printing" : "Positioning";
}

std::string to_string(SpeedClass s) {
    return s == SpeedClass::Slow ? "Slow" : "Fast";
}

std::string to_string(const MovementLabel& label) {
    std::string out = label.plane == Plane::Z ? "Z" : "XY";
    out += ':';
    out += label.axis ? (*label.axis == Axis::X ? "X" : "Y") : "-";
    out += ':';
    out += label.direction ? to_string(*label.direction) : "-";
    out += ':';
    out += to_string(label.header);
    out += ':';
    out += to_string(label.speed_class);
    return out;
}

MovementLabel label_from_string(const std::string& text) {
    const auto parts = detail::split(text, ':');
    if (parts.size() != 5) throw ParseError("bad label '" + text + "': want 5 fields");
    MovementLabel label;
    if (parts[0] == "Z") {
        label.plane = Plane::Z;
    } else if (parts[0] == "XY") {
        label.plane = Plane::XY;
    } else {
        throw ParseError("bad label plane '" + std::string(parts[0]) + "'");
    }
    if (parts[1] == "X") {
        label.axis = Axis::X;
    } else if (parts[1] == "Y") {
        label.axis = Axis::Y;
    } else if (parts[1] != "-") {
        throw ParseError("bad label axis '" + std::string(parts[1]) + "'");
    }
    if (parts[2] == "XLeft") {
        label.direction = Direction::XLeft;
    } else if (parts[2] == "XRight") {
        label.direction = Direction::XRight;
    } else if (parts[2] == "YUp") {
        label.direction = Direction::YUp;
    } else if (parts[2] == "YDown") {
        label.direction = Direction::YDown;
    } else if (parts[2] != "-") {
        throw ParseError("bad label direction '" + std::string(parts[2]) + "'");
    }
    if (parts[3] == "Printing") {
        label.header = Header::Printing;
    } else if (parts[3] == "Positioning") {
        label.header = Header::Positioning;
    } else {
        throw ParseError("bad label header '" + std::string(parts[3]) + "'");
    }
    if (parts[4] == "Slow") {
        label.speed_class = SpeedClass::Slow;
    } else if (parts[4] == "Fast") {
        label.speed_class = SpeedClass::Fast;
    } else {
        throw ParseError("bad label speed '" + std::string(parts[4]) + "'");
    }
    if (label.plane == Plane::Z && (label.axis || label.direction)) {
        throw ParseError("bad label '" + text + "': Z plane carries no axis");
    }
    if (label.plane == Plane::XY && (!label.axis || !label.direction)) {
        throw ParseError("bad label '" + text + "': XY plane needs axis and direction");
    }
    return label;
}

std::vector<GCommand> parse_gcode(std::istream& in) {
    std::vector<GCommand> commands;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string code = strip_comments(line, line_no);
        const std::string_view body = detail::trim(code);
        const std::string_view whole = detail::trim(line);
        if (body.empty()) {
            if (whole.empty()) continue; // blank line, nothing to keep
            GCommand c;                  // comment-only: pass-through record
            c.opcode = Opcode::MOther;
            c.line = line_no;
            c.raw = std::string(whole);
            commands.push_back(std::move(c));
            continue;
        }

        // M-codes outside the dialect pass through untouched.
        const char lead = static_cast<char>(std::toupper(static_cast<unsigned char>(body[0])));
        if (lead == 'M') {
            GCommand c;
            c.opcode = Opcode::MOther;
            c.line = line_no;
            c.raw = std::string(whole);
            commands.push_back(std::move(c));
            continue;
        }

        GCommand cmd;
        cmd.line = line_no;
        bool have_opcode = false;

        std::size_t i = 0;
        while (i < body.size()) {
            const char raw_letter = body[i];
            if (raw_letter == ' ' || raw_letter == '\t') {
                ++i;
                continue;
            }
            const char letter =
                static_cast<char>(std::toupper(static_cast<unsigned char>(raw_letter)));
            ++i;
            std::size_t start = i;
            while (i < body.size() && body[i] != ' ' && body[i] != '\t') ++i;
            const std::string_view num = body.substr(start, i - start);

            if (letter == 'G') {
                const auto g = detail::parse_int(num);
                if (!g) parse_fail(line_no, "malformed G-word 'G" + std::string(num) + "'");
                if (have_opcode) parse_fail(line_no, "multiple commands on one line");
                have_opcode = true;
                switch (*g) {
                    case 0: cmd.opcode = Opcode::G0; break;
                    case 1: cmd.opcode = Opcode::G1; break;
                    case 28: cmd.opcode = Opcode::G28; break;
                    default:
                        parse_fail(line_no, "unknown G-word 'G" + std::to_string(*g) + "'");
                }
                continue;
            }

            std::optional<double>* slot = nullptr;
            switch (letter) {
                case 'X': slot = &cmd.x; break;
                case 'Y': slot = &cmd.y; break;
                case 'Z': slot = &cmd.z; break;
                case 'E': slot = &cmd.e; break;
                case 'F': slot = &cmd.f; break;
                default:
                    parse_fail(line_no, std::string("unsupported word '") + letter + "'");
            }
            // G28 may list bare axis letters ("G28 X") to home a subset.
            if (num.empty() && cmd.opcode == Opcode::G28 && have_opcode &&
                (letter == 'X' || letter == 'Y' || letter == 'Z')) {
                *slot = 0.0;
                continue;
            }
            const auto v = detail::parse_double(num);
            if (!v) {
                parse_fail(line_no,
                           std::string("malformed numeric field '") + letter +
                               std::string(num) + "'");
            }
            if (slot->has_value()) {
                parse_fail(line_no, std::string("duplicate word '") + letter + "'");
            }
            *slot = *v;
        }

        if (!have_opcode) parse_fail(line_no, "line has parameters but no G-word");
        if (cmd.opcode == Opcode::G0 || cmd.opcode == Opcode::G1) {
            if (!cmd.x && !cmd.y && !cmd.z && !cmd.e && !cmd.f) {
                parse_fail(line_no, "G0/G1 without any of X/Y/Z/E/F");
            }
        }
        if (cmd.f && *cmd.f <= 0.0) parse_fail(line_no, "feed rate must be positive");
        commands.push_back(std::move(cmd));
    }
    return commands;
}

std::vector<GCommand> parse_gcode(const std::string& text) {
    std::istringstream in(text);
    return parse_gcode(in);
}

MovementLabel classify_segment(const MotionSegment& s, const LabelConfig& cfg) {
    const Vec3 d = s.delta();
    const double adx = std::fabs(d.x);
    const double ady = std::fabs(d.y);
    const double adz = std::fabs(d.z);
    if (adx == 0.0 && ady == 0.0 && adz == 0.0) {
        throw DataError("classify_segment: zero displacement");
    }

    MovementLabel label;
    if (adz > std::max(adx, ady)) {
        label.plane = Plane::Z;
    } else {
        label.plane = Plane::XY;
        if (adx >= ady) { // exact ties break toward X
            label.axis = Axis::X;
            label.direction = d.x < 0.0 ? Direction::XLeft : Direction::XRight;
        } else {
            label.axis = Axis::Y;
            label.direction = d.y > 0.0 ? Direction::YUp : Direction::YDown;
        }
    }
    label.header = s.extruding ? Header::Printing : Header::Positioning;
    label.speed_class =
        s.feed_mm_min > cfg.speed_boundary_mm_min ? SpeedClass::Fast : SpeedClass::Slow;
    return label;
}

Toolpath to_toolpath(const std::vector<GCommand>& commands, Vec3 start, const LabelConfig& cfg) {
    Toolpath path;
    path.origin = start;

    Vec3 pos = start;
    std::optional<double> feed;
    double e_pos = 0.0;
    int layer = 0;

    auto push_segment = [&](const Vec3& from, const Vec3& to, double seg_feed, bool extruding) {
        MotionSegment seg;
        seg.start = from;
        seg.end = to;
        seg.feed_mm_min = seg_feed;
        seg.extruding = extruding;
        seg.label = classify_segment(seg, cfg);
        if (seg.label.plane == Plane::Z && to.z > from.z) ++layer;
        seg.layer = layer;
        path.segments.push_back(seg);
    };

    for (const auto& cmd : commands) {
        switch (cmd.opcode) {
            case Opcode::MOther:
                break;
            case Opcode::G28: {
                Vec3 target = pos;
                const bool any_axis = cmd.x || cmd.y || cmd.z;
                if (!any_axis || cmd.x) target.x = 0.0;
                if (!any_axis || cmd.y) target.y = 0.0;
                if (!any_axis || cmd.z) target.z = 0.0;
                if (distance(target, pos) > 0.0) {
                    push_segment(pos, target, feed.value_or(kHomingFeed), false);
                }
                pos = target;
                break;
            }
            case Opcode::G0:
            case Opcode::G1: {
                Vec3 target = pos;
                if (cmd.x) target.x = *cmd.x;
                if (cmd.y) target.y = *cmd.y;
                if (cmd.z) target.z = *cmd.z;
                if (cmd.f) feed = *cmd.f;

                const bool moves = distance(target, pos) > 0.0;
                if (moves && !feed) {
                    throw DataError("line " + std::to_string(cmd.line) +
                                    ": no feed rate established");
                }
                const bool extruding = cmd.e.has_value() && *cmd.e > e_pos;
                if (cmd.e) e_pos = *cmd.e;
                if (moves) push_segment(pos, target, *feed, extruding);
                pos = target;
                break;
            }
        }
    }
    return path;
}

void emit_gcode(const Toolpath& t, std::ostream& out) {
    out << "; toolpath export\n";
    out << "; segments: " << t.segments.size() << "\n";
    double e_pos = 0.0;
    for (const auto& seg : t.segments) {
        out << "G1 X" << detail::format_fixed(seg.end.x, 3) << " Y"
            << detail::format_fixed(seg.end.y, 3) << " Z" << detail::format_fixed(seg.end.z, 3);
        if (seg.extruding) {
            e_pos += seg.length() * kExtrusionPerMm;
            out << " E" << detail::format_fixed(e_pos, 5);
        }
        out << " F" << static_cast<long long>(std::llround(seg.feed_mm_min)) << "\n";
    }
    out << "; end\n";
}

std::string emit_gcode(const Toolpath& t) {
    std::ostringstream out;
    emit_gcode(t, out);
    return out.str();
}

} // namespace printleak::gcode
