#include "printleak/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "printleak/errors.hpp"
#include "text_util.hpp"

namespace printleak::ingest {

namespace {

constexpr const char* kHeader = "time_s,ax,bx_uT,by_uT,bz_uT";

// Linear interpolation of (t, v) support points at query time q. Support
// times are strictly increasing; queries outside the range clamp.
double interp(const std::vector<double>& ts, const std::vector<double>& vs, double q,
              std::size_t& hint) {
    const std::size_t n = ts.size();
    if (q <= ts.front()) return vs.front();
    if (q >= ts.back()) return vs.back();
    while (hint + 1 < n && ts[hint + 1] < q) ++hint;
    while (hint > 0 && ts[hint] > q) --hint;
    const double t0 = ts[hint], t1 = ts[hint + 1];
    if (q == t0) return vs[hint];
    const double a = (q - t0) / (t1 - t0);
    return vs[hint] + a * (vs[hint + 1] - vs[hint]);
}

} // namespace

std::vector<double> SensorTrace::acoustic_db() const {
    std::vector<double> db(acoustic.size());
    for (std::size_t i = 0; i < acoustic.size(); ++i) {
        db[i] = 20.0 * std::log10(std::fabs(acoustic[i]) + 1e-12);
    }
    return db;
}

void write_sensor_csv(const SensorTrace& trace, std::ostream& out) {
    if (trace.acoustic_rate < 1000.0) throw DataError("write_sensor_csv: acoustic rate below 1 kHz");
    if (trace.magnetic_rate <= 0.0) throw DataError("write_sensor_csv: magnetic rate must be positive");
    out << kHeader << '\n';
    const std::size_t n = trace.acoustic.size();
    const std::size_t n_mag = trace.magnetic.size();
    const double ratio = trace.magnetic_rate / trace.acoustic_rate;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = trace.start_time + static_cast<double>(i) / trace.acoustic_rate;
        std::size_t j = static_cast<std::size_t>(static_cast<double>(i) * ratio);
        if (n_mag > 0) j = std::min(j, n_mag - 1);
        const Vec3 b = n_mag > 0 ? trace.magnetic[j] : Vec3{};
        out << detail::format_fixed(t, 9) << ',' << detail::format_general(trace.acoustic[i], 9)
            << ',' << detail::format_fixed(b.x, 6) << ',' << detail::format_fixed(b.y, 6) << ','
            << detail::format_fixed(b.z, 6) << '\n';
    }
}

SensorTrace read_sensor_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("sensor csv: empty stream, header missing");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) {
        throw ParseError(std::string("sensor csv: header must be '") + kHeader + "', got '" +
                         line + "'");
    }

    std::vector<double> times, amps;
    std::vector<Vec3> held;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split(line, ',');
        if (fields.size() != 5) {
            throw ParseError("sensor csv row " + std::to_string(row) + ": want 5 columns, got " +
                             std::to_string(fields.size()));
        }
        double vals[5];
        for (int c = 0; c < 5; ++c) {
            const auto v = detail::parse_double(fields[static_cast<std::size_t>(c)]);
            if (!v) {
                throw ParseError("sensor csv row " + std::to_string(row) +
                                 ": malformed number '" +
                                 std::string(fields[static_cast<std::size_t>(c)]) + "'");
            }
            vals[c] = *v;
        }
        if (!times.empty() && vals[0] <= times.back()) {
            throw DataError("sensor csv row " + std::to_string(row) +
                            ": non-monotone timestamp " + detail::format_general(vals[0], 9));
        }
        times.push_back(vals[0]);
        amps.push_back(vals[1]);
        held.push_back(Vec3{vals[2], vals[3], vals[4]});
    }

    SensorTrace trace;
    if (times.empty()) return trace; // header-only file: empty trace, default rates

    trace.start_time = times.front();
    const std::size_t n = times.size();
    if (n == 1) {
        trace.acoustic = {amps[0]};
        trace.magnetic = {held[0]};
        return trace;
    }

    // Nominal acoustic rate from the time span, then resample onto its grid.
    const double span = times.back() - times.front();
    trace.acoustic_rate = std::round(static_cast<double>(n - 1) / span);
    if (trace.acoustic_rate < 1000.0) {
        throw DataError("sensor csv: inferred acoustic rate " +
                        detail::format_general(trace.acoustic_rate, 6) + " Hz is below 1 kHz");
    }
    trace.acoustic.resize(n);
    std::size_t hint = 0;
    const double snap_tol = 0.01 / trace.acoustic_rate; // 1% of the sample period
    for (std::size_t i = 0; i < n; ++i) {
        const double q = trace.start_time + static_cast<double>(i) / trace.acoustic_rate;
        // Uniform inputs (every file we write) resample to themselves exactly.
        if (std::fabs(times[i] - q) <= snap_tol) {
            trace.acoustic[i] = amps[i];
        } else {
            trace.acoustic[i] = interp(times, amps, q, hint);
        }
    }

    // Magnetic samples are held between updates; value-change runs recover
    // the original sample sequence and its rate.
    std::vector<double> mag_t;
    std::vector<Vec3> mag_v;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || !(held[i] == held[i - 1])) {
            mag_t.push_back(times[i]);
            mag_v.push_back(held[i]);
        }
    }
    if (mag_t.size() == 1) {
        trace.magnetic = {mag_v[0]};
        trace.magnetic_rate = 1.0;
        return trace;
    }
    trace.magnetic_rate =
        std::round(static_cast<double>(mag_t.size() - 1) / (mag_t.back() - mag_t.front()));
    if (trace.magnetic_rate <= 0.0) trace.magnetic_rate = 1.0;

    const std::size_t m = mag_t.size();
    trace.magnetic.resize(m);
    std::vector<double> comp(m);
    for (int axis = 0; axis < 3; ++axis) {
        for (std::size_t i = 0; i < m; ++i) {
            comp[i] = axis == 0 ? mag_v[i].x : (axis == 1 ? mag_v[i].y : mag_v[i].z);
        }
        std::size_t h = 0;
        const double mag_tol = 0.01 / trace.magnetic_rate;
        for (std::size_t i = 0; i < m; ++i) {
            const double q = mag_t.front() + static_cast<double>(i) / trace.magnetic_rate;
            const double v =
                std::fabs(mag_t[i] - q) <= mag_tol ? comp[i] : interp(mag_t, comp, q, h);
            if (axis == 0) trace.magnetic[i].x = v;
            if (axis == 1) trace.magnetic[i].y = v;
            if (axis == 2) trace.magnetic[i].z = v;
        }
    }
    return trace;
}

std::vector<features::Frame> align_channels(const SensorTrace& trace, double frame_ms) {
    if (frame_ms <= 0.0) throw DataError("align_channels: frame_ms must be positive");
    const std::size_t ac_per =
        static_cast<std::size_t>(std::floor(trace.acoustic_rate * frame_ms / 1000.0));
    const std::size_t mg_per =
        static_cast<std::size_t>(std::floor(trace.magnetic_rate * frame_ms / 1000.0));
    if (mg_per < 2) {
        throw DataError("align_channels: frame shorter than 2 magnetic samples (" +
                        std::to_string(mg_per) + " per frame)");
    }
    if (ac_per < 2) throw DataError("align_channels: frame shorter than 2 acoustic samples");

    const std::size_t n_frames =
        std::min(trace.acoustic.size() / ac_per, trace.magnetic.size() / mg_per);
    std::vector<features::Frame> frames;
    frames.reserve(n_frames);
    for (std::size_t fidx = 0; fidx < n_frames; ++fidx) {
        features::Frame fr;
        fr.acoustic_rate = trace.acoustic_rate;
        fr.acoustic.assign(trace.acoustic.begin() + static_cast<std::ptrdiff_t>(fidx * ac_per),
                           trace.acoustic.begin() + static_cast<std::ptrdiff_t>((fidx + 1) * ac_per));
        fr.magnetic.assign(trace.magnetic.begin() + static_cast<std::ptrdiff_t>(fidx * mg_per),
                           trace.magnetic.begin() + static_cast<std::ptrdiff_t>((fidx + 1) * mg_per));
        frames.push_back(std::move(fr));
    }
    return frames;
}

} // namespace printleak::ingest
