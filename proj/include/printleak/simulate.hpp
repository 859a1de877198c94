#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "printleak/gcode.hpp"
#include "printleak/geom.hpp"
#include "printleak/ingest.hpp"

namespace printleak::simulate {

// Fundamental tone per movement kind. Distinct fundamentals per
// (axis, speed class); the positive direction of an axis is detuned upward
// by `detune` so directions are audible but close.
struct ToneMap {
    double x_slow = 440.0, x_fast = 880.0;
    double y_slow = 587.0, y_fast = 1175.0;
    double z_slow = 330.0, z_fast = 660.0;
    double detune = 0.03;

    double frequency_for(const gcode::MovementLabel& label) const;
};

struct SimConfig {
    std::uint64_t seed = 0;
    double acoustic_rate = 8000.0; // Hz
    double magnetic_rate = 100.0;  // Hz
    double distance_cm = 15.0;     // sensor placement presets: 15 / 20 / 30
    Vec3 sensor_pos_cm;            // relative to bed origin; set by preset()

    // Ambient acoustic noise floor in dB (amplitude 10^(dB/20)), scaled by
    // (distance_cm/15)^2. Values <= -200 disable the ambient noise.
    double noise_db = -32.0;
    double mag_noise_uT = 0.35; // magnetometer noise std, per axis

    ToneMap tones;

    // Emission shape constants.
    double base_amp = 0.5;      // tone amplitude at the reference feed
    double ref_feed = 3000.0;   // feed whose tone amplitude is base_amp
    double hiss_rel = 0.3162;   // extrusion hiss, -10 dB relative to the tone
    double mag_peak_uT = 20.0;  // dipole |B| at closest approach, 15 cm preset
    double ripple_uT = 4.0;     // stepper commutation ripple at the 15 cm preset
    double ripple_slow_hz = 41.3;
    double ripple_fast_hz = 87.1;

    gcode::LabelConfig labels;

    // Sensor placed distance_cm from the bed origin at a 45-degree angle in
    // the bed plane.
    static SimConfig preset(double distance_cm, std::uint64_t seed = 0);

    SimConfig with_noise_disabled() const;
};

// Synthesizes the dual-channel trace for a toolpath: per-segment tones whose
// amplitude grows with feed, extrusion hiss while printing, and a stepper
// dipole field that tracks the nozzle (1/d^3) with a commutation ripple on
// the moving axis whose asymmetry encodes the direction. Bit-deterministic
// for a fixed (toolpath, config) pair. Throws DataError on an empty toolpath.
ingest::SensorTrace simulate_emissions(const gcode::Toolpath& t, const SimConfig& cfg);

// Ground-truth label per frame: the label of the segment occupying the
// majority of the frame. Length matches align_channels on the simulated trace.
std::vector<gcode::MovementLabel> label_trace(const gcode::Toolpath& t, const SimConfig& cfg,
                                              double frame_ms = 100.0);

// Key-value config file ("key = value", '#' comments). Unknown keys throw
// ParseError. Returns `base` updated with the file's assignments.
SimConfig load_sim_config(std::istream& in, SimConfig base = SimConfig::preset(15.0));

} // namespace printleak::simulate
