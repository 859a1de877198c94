#pragma once

#include <iosfwd>
#include <vector>

#include "printleak/features.hpp"
#include "printleak/geom.hpp"

namespace printleak::ingest {

// Time-aligned dual-channel recording, the interchange unit between the
// simulator, the feature pipeline and the CSV format.
struct SensorTrace {
    std::vector<double> acoustic; // linear amplitude
    double acoustic_rate = 8000.0;
    std::vector<Vec3> magnetic; // microtesla
    double magnetic_rate = 100.0;
    double start_time = 0.0; // seconds

    double duration_s() const {
        return acoustic_rate > 0 ? static_cast<double>(acoustic.size()) / acoustic_rate : 0.0;
    }

    // Derived dB-gain view of the acoustic channel: 20*log10(|x| + 1e-12).
    std::vector<double> acoustic_db() const;
};

// CSV schema (exact): header "time_s,ax,bx_uT,by_uT,bz_uT"; one row per
// acoustic sample; magnetic columns hold the latest magnetometer sample; LF
// line endings, '.' decimal point.
//
// Reading resamples both channels onto their nominal uniform grids by linear
// interpolation. The acoustic rate is inferred from the timestamps and the
// magnetic rate from the hold pattern (value-change runs), so rates must be
// integer Hz with magnetic_rate dividing acoustic_rate. Throws ParseError on
// schema violations and DataError (naming the row) on non-monotone time.
SensorTrace read_sensor_csv(std::istream& in);
void write_sensor_csv(const SensorTrace& trace, std::ostream& out);

// Cuts the trace into fixed frames of floor(rate*frame_ms/1000) samples per
// channel; the trailing partial frame is discarded. Throws DataError when a
// frame would hold fewer than 2 samples of either channel.
std::vector<features::Frame> align_channels(const SensorTrace& trace, double frame_ms = 100.0);

} // namespace printleak::ingest
