#include "printleak/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <string>

#include "printleak/errors.hpp"
#include "printleak/rng.hpp"
#include "text_util.hpp"

namespace printleak::simulate {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kReferenceDistanceCm = 15.0;

// Stepper dipole orientation: mostly vertical shaft with a small tilt so the
// horizontal components carry some of the position signal too.
const Vec3 kDipoleAxis = Vec3{0.25, 0.25, 0.9354}.normalized();

// floor(t * rate) with a tolerance so durations that are exact sample
// multiples in real arithmetic do not lose the last sample to fp error.
std::size_t count_samples(double duration_s, double rate) {
    return static_cast<std::size_t>(std::floor(duration_s * rate + 1e-6));
}

double dir_sign(const gcode::MovementLabel& label) {
    if (!label.direction) return 1.0; // Z runs
    switch (*label.direction) {
        case gcode::Direction::XRight:
        case gcode::Direction::YUp: return 1.0;
        case gcode::Direction::XLeft:
        case gcode::Direction::YDown: return -1.0;
    }
    return 1.0;
}

Vec3 dipole_field(const Vec3& source_mm, const Vec3& sensor_mm, double moment) {
    const Vec3 r = sensor_mm - source_mm;
    const double dist = r.norm();
    const Vec3 rhat = r.normalized();
    const double md = kDipoleAxis.dot(rhat);
    const Vec3 dir = 3.0 * md * rhat - kDipoleAxis;
    const double scale = moment / (dist * dist * dist);
    return dir * scale;
}

// Dipole moment such that |B| at the closest approach of the reference
// geometry (nozzle over the bed origin, 15 cm preset) equals peak_uT.
double calibrated_moment(double peak_uT) {
    const SimConfig ref = SimConfig::preset(kReferenceDistanceCm);
    const Vec3 sensor_mm = ref.sensor_pos_cm * 10.0;
    const Vec3 unit_field = dipole_field(Vec3{}, sensor_mm, 1.0);
    return peak_uT / unit_field.norm();
}

struct SegmentTimeline {
    std::vector<double> start; // start[k] = time segment k begins; back() = total
    const gcode::Toolpath* path = nullptr;

    std::size_t segment_at(double t, std::size_t hint) const {
        std::size_t k = hint;
        const std::size_t n = path->segments.size();
        while (k + 1 < n && t >= start[k + 1]) ++k;
        return k;
    }
};

SegmentTimeline build_timeline(const gcode::Toolpath& t) {
    SegmentTimeline tl;
    tl.path = &t;
    tl.start.reserve(t.segments.size() + 1);
    double acc = 0.0;
    for (const auto& seg : t.segments) {
        tl.start.push_back(acc);
        acc += seg.duration_s();
    }
    tl.start.push_back(acc);
    return tl;
}

void check_toolpath(const gcode::Toolpath& t) {
    if (t.empty()) throw DataError("simulate: empty toolpath");
    for (std::size_t i = 1; i < t.segments.size(); ++i) {
        if (distance(t.segments[i].start, t.segments[i - 1].end) > 1e-9) {
            throw DataError("simulate: toolpath not contiguous at segment " + std::to_string(i));
        }
    }
    for (const auto& seg : t.segments) {
        if (seg.feed_mm_min <= 0.0) throw DataError("simulate: segment with non-positive feed");
    }
}

} // namespace

double ToneMap::frequency_for(const gcode::MovementLabel& label) const {
    const bool fast = label.speed_class == gcode::SpeedClass::Fast;
    double base = 0.0;
    if (label.plane == gcode::Plane::Z) {
        base = fast ? z_fast : z_slow;
    } else if (label.axis == gcode::Axis::X) {
        base = fast ? x_fast : x_slow;
    } else {
        base = fast ? y_fast : y_slow;
    }
    if (label.direction &&
        (*label.direction == gcode::Direction::XRight || *label.direction == gcode::Direction::YUp)) {
        base *= 1.0 + detune;
    }
    return base;
}

SimConfig SimConfig::preset(double distance_cm, std::uint64_t seed) {
    if (distance_cm <= 0.0) throw DataError("sim preset: distance must be positive");
    SimConfig cfg;
    cfg.seed = seed;
    cfg.distance_cm = distance_cm;
    const double leg = distance_cm / std::numbers::sqrt2;
    cfg.sensor_pos_cm = Vec3{-leg, -leg, 0.0};
    return cfg;
}

SimConfig SimConfig::with_noise_disabled() const {
    SimConfig cfg = *this;
    cfg.noise_db = -300.0;
    cfg.mag_noise_uT = 0.0;
    return cfg;
}

ingest::SensorTrace simulate_emissions(const gcode::Toolpath& t, const SimConfig& cfg) {
    check_toolpath(t);
    if (cfg.acoustic_rate < 1000.0) throw DataError("simulate: acoustic rate below 1 kHz");
    if (cfg.magnetic_rate <= 0.0) throw DataError("simulate: magnetic rate must be positive");

    const SegmentTimeline tl = build_timeline(t);
    const double total_s = tl.start.back();
    const std::size_t n_ac = count_samples(total_s, cfg.acoustic_rate);
    const std::size_t n_mag = count_samples(total_s, cfg.magnetic_rate);

    Rng root(cfg.seed);
    Rng ambient_rng = root.fork(1);
    Rng hiss_rng = root.fork(2);
    Rng mag_rng = root.fork(3);
    Rng phase_rng = root.fork(4);

    const std::size_t n_segs = t.segments.size();
    std::vector<double> tone_phase(n_segs), ripple_phase(n_segs);
    for (std::size_t k = 0; k < n_segs; ++k) {
        tone_phase[k] = phase_rng.uniform(0.0, kTwoPi);
        ripple_phase[k] = phase_rng.uniform(0.0, kTwoPi);
    }

    const double distance_ratio = cfg.distance_cm / kReferenceDistanceCm;
    const bool ambient_on = cfg.noise_db > -200.0;
    const double ambient_amp =
        ambient_on ? std::pow(10.0, cfg.noise_db / 20.0) * distance_ratio * distance_ratio : 0.0;

    ingest::SensorTrace trace;
    trace.acoustic_rate = cfg.acoustic_rate;
    trace.magnetic_rate = cfg.magnetic_rate;
    trace.acoustic.resize(n_ac);

    std::size_t hint = 0;
    for (std::size_t i = 0; i < n_ac; ++i) {
        const double time = static_cast<double>(i) / cfg.acoustic_rate;
        const std::size_t k = tl.segment_at(time, hint);
        hint = k;
        const auto& seg = t.segments[k];
        const double tau = time - tl.start[k];
        const double freq = cfg.tones.frequency_for(seg.label);
        const double amp = cfg.base_amp * std::sqrt(seg.feed_mm_min / cfg.ref_feed);
        double s = amp * std::sin(kTwoPi * freq * tau + tone_phase[k]);
        if (seg.label.header == gcode::Header::Printing) {
            s += cfg.hiss_rel * amp * hiss_rng.gaussian();
        }
        if (ambient_on) s += ambient_amp * ambient_rng.gaussian();
        trace.acoustic[i] = s;
    }

    const double moment = calibrated_moment(cfg.mag_peak_uT);
    const Vec3 sensor_mm = cfg.sensor_pos_cm * 10.0;
    const double ripple_amp =
        cfg.ripple_uT / (distance_ratio * distance_ratio * distance_ratio);

    trace.magnetic.resize(n_mag);
    hint = 0;
    for (std::size_t j = 0; j < n_mag; ++j) {
        const double time = static_cast<double>(j) / cfg.magnetic_rate;
        const std::size_t k = tl.segment_at(time, hint);
        hint = k;
        const auto& seg = t.segments[k];
        const double dur = seg.duration_s();
        const double frac = dur > 0.0 ? std::clamp((time - tl.start[k]) / dur, 0.0, 1.0) : 0.0;
        const Vec3 nozzle = seg.start + (seg.end - seg.start) * frac;

        Vec3 b = dipole_field(nozzle, sensor_mm, moment);

        const bool fast = seg.label.speed_class == gcode::SpeedClass::Fast;
        const double f_r = fast ? cfg.ripple_fast_hz : cfg.ripple_slow_hz;
        const double theta = kTwoPi * f_r * time + ripple_phase[k];
        const double wave = std::max(std::sin(theta), 0.0) - 1.0 / std::numbers::pi;
        const double ripple = dir_sign(seg.label) * ripple_amp * wave;
        if (seg.label.plane == gcode::Plane::Z) {
            b.z += ripple;
        } else if (seg.label.axis == gcode::Axis::X) {
            b.x += ripple;
        } else {
            b.y += ripple;
        }

        if (cfg.mag_noise_uT > 0.0) {
            b.x += cfg.mag_noise_uT * mag_rng.gaussian();
            b.y += cfg.mag_noise_uT * mag_rng.gaussian();
            b.z += cfg.mag_noise_uT * mag_rng.gaussian();
        }
        trace.magnetic[j] = b;
    }
    return trace;
}

std::vector<gcode::MovementLabel> label_trace(const gcode::Toolpath& t, const SimConfig& cfg,
                                              double frame_ms) {
    check_toolpath(t);
    if (frame_ms <= 0.0) throw DataError("label_trace: frame_ms must be positive");

    const SegmentTimeline tl = build_timeline(t);
    const double total_s = tl.start.back();
    const std::size_t n_ac = count_samples(total_s, cfg.acoustic_rate);
    const std::size_t n_mag = count_samples(total_s, cfg.magnetic_rate);
    const std::size_t ac_per =
        static_cast<std::size_t>(std::floor(cfg.acoustic_rate * frame_ms / 1000.0));
    const std::size_t mg_per =
        static_cast<std::size_t>(std::floor(cfg.magnetic_rate * frame_ms / 1000.0));
    if (ac_per < 2 || mg_per < 2) throw DataError("label_trace: frame too short");
    const std::size_t n_frames = std::min(n_ac / ac_per, n_mag / mg_per);

    const double frame_s = frame_ms / 1000.0;
    std::vector<gcode::MovementLabel> labels;
    labels.reserve(n_frames);
    std::size_t hint = 0;
    for (std::size_t f = 0; f < n_frames; ++f) {
        const double t0 = static_cast<double>(f) * frame_s;
        const double t1 = t0 + frame_s;
        // Majority occupant of [t0, t1).
        std::size_t k = tl.segment_at(t0, hint);
        hint = k;
        std::size_t best_seg = k;
        double best_overlap = -1.0;
        while (k < t.segments.size()) {
            const double seg_start = tl.start[k];
            const double seg_end = tl.start[k + 1];
            if (seg_start >= t1) break;
            const double overlap = std::min(seg_end, t1) - std::max(seg_start, t0);
            if (overlap > best_overlap + 1e-12) {
                best_overlap = overlap;
                best_seg = k;
            }
            ++k;
        }
        labels.push_back(t.segments[best_seg].label);
    }
    return labels;
}

SimConfig load_sim_config(std::istream& in, SimConfig base) {
    SimConfig cfg = base;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string_view body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("sim config line " + std::to_string(line_no) +
                             ": expected 'key = value'");
        }
        const std::string key(detail::trim(body.substr(0, eq)));
        const std::string_view value_text = detail::trim(body.substr(eq + 1));
        const auto value = detail::parse_double(value_text);
        if (!value) {
            throw ParseError("sim config line " + std::to_string(line_no) +
                             ": malformed value '" + std::string(value_text) + "'");
        }
        const double v = *value;
        if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(v);
        } else if (key == "acoustic_rate") {
            cfg.acoustic_rate = v;
        } else if (key == "magnetic_rate") {
            cfg.magnetic_rate = v;
        } else if (key == "distance_cm") {
            const std::uint64_t seed = cfg.seed;
            const SimConfig preset_cfg = SimConfig::preset(v, seed);
            cfg.distance_cm = preset_cfg.distance_cm;
            cfg.sensor_pos_cm = preset_cfg.sensor_pos_cm;
        } else if (key == "sensor_x_cm") {
            cfg.sensor_pos_cm.x = v;
        } else if (key == "sensor_y_cm") {
            cfg.sensor_pos_cm.y = v;
        } else if (key == "sensor_z_cm") {
            cfg.sensor_pos_cm.z = v;
        } else if (key == "noise_db") {
            cfg.noise_db = v;
        } else if (key == "mag_noise_uT") {
            cfg.mag_noise_uT = v;
        } else if (key == "tone_x_slow") {
            cfg.tones.x_slow = v;
        } else if (key == "tone_x_fast") {
            cfg.tones.x_fast = v;
        } else if (key == "tone_y_slow") {
            cfg.tones.y_slow = v;
        } else if (key == "tone_y_fast") {
            cfg.tones.y_fast = v;
        } else if (key == "tone_z_slow") {
            cfg.tones.z_slow = v;
        } else if (key == "tone_z_fast") {
            cfg.tones.z_fast = v;
        } else if (key == "tone_detune") {
            cfg.tones.detune = v;
        } else if (key == "base_amp") {
            cfg.base_amp = v;
        } else if (key == "ref_feed") {
            cfg.ref_feed = v;
        } else if (key == "hiss_rel") {
            cfg.hiss_rel = v;
        } else if (key == "mag_peak_uT") {
            cfg.mag_peak_uT = v;
        } else if (key == "ripple_uT") {
            cfg.ripple_uT = v;
        } else if (key == "ripple_slow_hz") {
            cfg.ripple_slow_hz = v;
        } else if (key == "ripple_fast_hz") {
            cfg.ripple_fast_hz = v;
        } else if (key == "speed_boundary_mm_min") {
            cfg.labels.speed_boundary_mm_min = v;
        } else {
            throw ParseError("sim config line " + std::to_string(line_no) + ": unknown key '" +
                             key + "'");
        }
    }
    return cfg;
}

} // namespace printleak::simulate
