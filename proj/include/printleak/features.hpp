#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "printleak/geom.hpp"

namespace printleak::features {

// One analysis window: N acoustic samples and M magnetometer triples that
// cover the same stretch of time.
struct Frame {
    std::vector<double> acoustic; // linear amplitude
    std::vector<Vec3> magnetic;   // microtesla
    double acoustic_rate = 8000.0;
};

struct SpectrumFrame {
    std::vector<double> freq; // Hz, bins 0..N/2
    std::vector<double> mag;  // |X(k)|
};

struct MfccConfig {
    int n_mels = 26;
    int n_coeffs = 13;
    double fmin = 0.0;
    double fmax = -1.0; // <= 0 means Nyquist
    double log_floor = 1e-10;
};

struct FeatureConfig {
    MfccConfig mfcc;
};

// Fixed layout: zcr, ste, rms, centroid, bandwidth, mfcc_1..n,
// then mean/std/skew/kurt for bx, by, bz.
struct FeatureVector {
    std::vector<double> values;
    bool quality_ok = true; // false when a silent/degenerate sub-feature was zeroed
};

struct AxisStats {
    double mean = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0; // excess kurtosis
};

// Rate of sign changes, in [0, 1]. Requires at least 2 samples.
double zcr(const Frame& f);

// Sum of squared samples over the whole frame.
double short_time_energy(const Frame& f);

// sqrt(STE / N).
double rms(const Frame& f);

// Hann-windowed magnitude spectrum, bins 0..N/2.
SpectrumFrame spectrum(const Frame& f);

// Magnitude-weighted mean frequency. Throws DataError on a silent frame.
double spectral_centroid(const SpectrumFrame& sf);

// Magnitude-weighted spread around the centroid. Throws on a silent frame.
double spectral_bandwidth(const SpectrumFrame& sf);

// Convolution with a normalized truncated Gaussian (radius ceil(3*sigma)),
// half-sample reflect padding; preserves length and mean.
std::vector<double> gaussian_smooth(std::span<const double> series, double sigma);

// Mel-frequency cepstral coefficients: Hann spectrum -> triangular HTK mel
// filterbank -> log (floored) -> cosine transform, coefficients 1..n_coeffs.
std::vector<double> mfcc(const Frame& f, const MfccConfig& cfg = {});

// Population moments per magnetic axis. Throws DataError ("degenerate axis")
// when an axis has zero variance, since skewness/kurtosis are undefined.
std::array<AxisStats, 3> magnetic_stats(const Frame& f);

// Moments of one sample series; same degenerate-axis behavior.
AxisStats axis_stats(std::span<const double> xs);

// Assembles the full vector; silent or degenerate sub-features are replaced
// by 0 and the quality flag cleared so the frame stays classifiable.
FeatureVector build_feature_vector(const Frame& f, const FeatureConfig& cfg = {});

std::size_t feature_dim(const FeatureConfig& cfg = {});
std::vector<std::string> feature_names(const FeatureConfig& cfg = {});

// Column index groups, for per-model feature masks.
std::vector<int> acoustic_indices(const FeatureConfig& cfg = {});
std::vector<int> magnetic_indices(const FeatureConfig& cfg = {});
std::vector<int> all_indices(const FeatureConfig& cfg = {});

// Smooths every feature column across frames with gaussian_smooth.
// sigma <= 0 is a no-op.
std::vector<FeatureVector> smooth_feature_matrix(const std::vector<FeatureVector>& rows,
                                                 double sigma);

// CSV export: header "frame_idx,label,<names...>"; label column is '-' when
// no labels are supplied.
void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& rows,
                       const std::vector<std::string>& labels,
                       const FeatureConfig& cfg = {});

// Discrete Fourier transform of a real series, any length (radix-2 +
// Bluestein). Exposed for reuse; spectrum() is the windowed front door.
std::vector<std::complex<double>> dft_real(std::span<const double> xs);

} // namespace printleak::features
