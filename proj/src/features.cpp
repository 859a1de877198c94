#include "printleak/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "printleak/errors.hpp"
#include "text_util.hpp"

namespace printleak::features {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative in-place radix-2 Cooley-Tukey.
void fft_pow2(std::vector<cd>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cd wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cd u = a[i + k];
                const cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

// Arbitrary-length DFT via Bluestein's chirp-z reduction to a power of two.
std::vector<cd> dft_any(const std::vector<cd>& x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    if (n == 1) return x;
    if (is_pow2(n)) {
        std::vector<cd> a = x;
        fft_pow2(a, false);
        return a;
    }
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    // Chirp exponents k^2 mod 2n keep the angle argument small and exact.
    std::vector<cd> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t e = (k * k) % (2 * n);
        const double ang = -kPi * static_cast<double>(e) / static_cast<double>(n);
        chirp[k] = cd(std::cos(ang), std::sin(ang));
    }
    std::vector<cd> a(m, cd{});
    std::vector<cd> b(m, cd{});
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_pow2(a, true);
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
    return out;
}

double mel_of(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double hz_of(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

} // namespace

std::vector<cd> dft_real(std::span<const double> xs) {
    std::vector<cd> in(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) in[i] = cd(xs[i], 0.0);
    return dft_any(in);
}

double zcr(const Frame& f) {
    const auto& x = f.acoustic;
    const std::size_t n = x.size();
    if (n < 2) throw DataError("zcr: frame needs at least 2 samples");
    std::size_t crossings = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (x[i] * x[i - 1] < 0.0) ++crossings;
    }
    return static_cast<double>(crossings) / static_cast<double>(n - 1);
}

double short_time_energy(const Frame& f) {
    double e = 0.0;
    for (double v : f.acoustic) e += v * v;
    return e;
}

double rms(const Frame& f) {
    if (f.acoustic.empty()) throw DataError("rms: empty frame");
    return std::sqrt(short_time_energy(f) / static_cast<double>(f.acoustic.size()));
}

SpectrumFrame spectrum(const Frame& f) {
    const auto& x = f.acoustic;
    const std::size_t n = x.size();
    if (n < 2) throw DataError("spectrum: frame needs at least 2 samples");
    std::vector<double> windowed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w =
            0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
        windowed[i] = x[i] * w;
    }
    const auto X = dft_real(windowed);
    SpectrumFrame sf;
    const std::size_t half = n / 2;
    sf.freq.resize(half + 1);
    sf.mag.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        sf.freq[k] = static_cast<double>(k) * f.acoustic_rate / static_cast<double>(n);
        sf.mag[k] = std::abs(X[k]);
    }
    return sf;
}

double spectral_centroid(const SpectrumFrame& sf) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < sf.mag.size(); ++k) {
        num += sf.freq[k] * sf.mag[k];
        den += sf.mag[k];
    }
    if (den <= 0.0) throw DataError("spectral_centroid: silent frame");
    return num / den;
}

double spectral_bandwidth(const SpectrumFrame& sf) {
    const double c = spectral_centroid(sf);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < sf.mag.size(); ++k) {
        const double d = sf.freq[k] - c;
        num += d * d * sf.mag[k];
        den += sf.mag[k];
    }
    return std::sqrt(num / den);
}

std::vector<double> gaussian_smooth(std::span<const double> series, double sigma) {
    if (sigma <= 0.0) throw DataError("gaussian_smooth: sigma must be positive");
    const std::size_t n = series.size();
    if (n == 0) return {};

    const long radius = static_cast<long>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (long i = -radius; i <= radius; ++i) {
        const double w = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (auto& w : kernel) w /= sum;

    // Half-sample reflection: index -1 -> 0, -2 -> 1, n -> n-1, ...
    auto at = [&](long idx) -> double {
        const long span = static_cast<long>(n);
        while (idx < 0 || idx >= span) {
            if (idx < 0) idx = -idx - 1;
            if (idx >= span) idx = 2 * span - idx - 1;
        }
        return series[static_cast<std::size_t>(idx)];
    };

    std::vector<double> out(n);
    for (long i = 0; i < static_cast<long>(n); ++i) {
        double acc = 0.0;
        for (long j = -radius; j <= radius; ++j) {
            acc += kernel[static_cast<std::size_t>(j + radius)] * at(i + j);
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

std::vector<double> mfcc(const Frame& f, const MfccConfig& cfg) {
    const double nyquist = f.acoustic_rate / 2.0;
    const double fmax = cfg.fmax <= 0.0 ? nyquist : cfg.fmax;
    if (fmax > nyquist + 1e-9) throw DataError("mfcc: fmax above Nyquist");
    if (cfg.fmin < 0.0 || cfg.fmin >= fmax) throw DataError("mfcc: need 0 <= fmin < fmax");
    if (cfg.n_coeffs > cfg.n_mels) throw DataError("mfcc: n_coeffs must be <= n_mels");
    if (cfg.n_mels < 1 || cfg.n_coeffs < 1) throw DataError("mfcc: counts must be positive");

    const SpectrumFrame sf = spectrum(f);
    const int M = cfg.n_mels;

    // HTK mel points: M+2 edges, filter m spans edges m-1..m+1.
    std::vector<double> edges(static_cast<std::size_t>(M) + 2);
    const double mel_lo = mel_of(cfg.fmin);
    const double mel_hi = mel_of(fmax);
    for (int m = 0; m < M + 2; ++m) {
        edges[static_cast<std::size_t>(m)] =
            hz_of(mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) / static_cast<double>(M + 1));
    }

    std::vector<double> mel_spectrum(static_cast<std::size_t>(M), 0.0);
    for (int m = 1; m <= M; ++m) {
        const double lo = edges[static_cast<std::size_t>(m - 1)];
        const double mid = edges[static_cast<std::size_t>(m)];
        const double hi = edges[static_cast<std::size_t>(m + 1)];
        double s = 0.0;
        for (std::size_t k = 0; k < sf.freq.size(); ++k) {
            const double fk = sf.freq[k];
            double w = 0.0;
            if (fk > lo && fk < mid) {
                w = (fk - lo) / (mid - lo);
            } else if (fk == mid) {
                w = 1.0;
            } else if (fk > mid && fk < hi) {
                w = (hi - fk) / (hi - mid);
            }
            s += w * sf.mag[k];
        }
        mel_spectrum[static_cast<std::size_t>(m - 1)] = s;
    }

    std::vector<double> coeffs(static_cast<std::size_t>(cfg.n_coeffs));
    for (int n = 1; n <= cfg.n_coeffs; ++n) {
        double acc = 0.0;
        for (int m = 1; m <= M; ++m) {
            const double s = std::max(mel_spectrum[static_cast<std::size_t>(m - 1)], cfg.log_floor);
            acc += std::log(s) * std::cos(static_cast<double>(n) *
                                          (static_cast<double>(m) - 0.5) * kPi /
                                          static_cast<double>(M));
        }
        coeffs[static_cast<std::size_t>(n - 1)] = acc;
    }
    return coeffs;
}

AxisStats axis_stats(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) throw DataError("axis_stats: need at least 2 samples");
    AxisStats st;
    double sum = 0.0;
    for (double v : xs) sum += v;
    st.mean = sum / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : xs) {
        const double d = v - st.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    st.stddev = std::sqrt(m2);
    if (m2 <= 0.0) throw DataError("degenerate axis: zero variance");
    st.skewness = m3 / std::pow(m2, 1.5);
    st.kurtosis = m4 / (m2 * m2) - 3.0;
    return st;
}

std::array<AxisStats, 3> magnetic_stats(const Frame& f) {
    if (f.magnetic.size() < 2) throw DataError("magnetic_stats: need at least 2 samples");
    std::array<AxisStats, 3> out;
    std::vector<double> axis(f.magnetic.size());
    for (int a = 0; a < 3; ++a) {
        for (std::size_t i = 0; i < f.magnetic.size(); ++i) {
            const Vec3& v = f.magnetic[i];
            axis[i] = a == 0 ? v.x : (a == 1 ? v.y : v.z);
        }
        out[static_cast<std::size_t>(a)] = axis_stats(axis);
    }
    return out;
}

std::size_t feature_dim(const FeatureConfig& cfg) {
    return 5 + static_cast<std::size_t>(cfg.mfcc.n_coeffs) + 12;
}

std::vector<std::string> feature_names(const FeatureConfig& cfg) {
    std::vector<std::string> names = {"zcr", "ste", "rms", "centroid", "bandwidth"};
    for (int i = 1; i <= cfg.mfcc.n_coeffs; ++i) {
        names.push_back("mfcc_" + std::to_string(i));
    }
    for (const char* axis : {"bx", "by", "bz"}) {
        for (const char* stat : {"mean", "std", "skew", "kurt"}) {
            names.push_back(std::string(axis) + "_" + stat);
        }
    }
    return names;
}

std::vector<int> acoustic_indices(const FeatureConfig& cfg) {
    std::vector<int> idx;
    for (int i = 0; i < 5 + cfg.mfcc.n_coeffs; ++i) idx.push_back(i);
    return idx;
}

std::vector<int> magnetic_indices(const FeatureConfig& cfg) {
    std::vector<int> idx;
    const int base = 5 + cfg.mfcc.n_coeffs;
    for (int i = 0; i < 12; ++i) idx.push_back(base + i);
    return idx;
}

std::vector<int> all_indices(const FeatureConfig& cfg) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < feature_dim(cfg); ++i) idx.push_back(static_cast<int>(i));
    return idx;
}

FeatureVector build_feature_vector(const Frame& f, const FeatureConfig& cfg) {
    FeatureVector out;
    out.values.reserve(feature_dim(cfg));

    out.values.push_back(zcr(f));
    out.values.push_back(short_time_energy(f));
    out.values.push_back(rms(f));

    const SpectrumFrame sf = spectrum(f);
    double total_mag = 0.0;
    for (double m : sf.mag) total_mag += m;
    if (total_mag > 0.0) {
        const double c = spectral_centroid(sf);
        out.values.push_back(c);
        out.values.push_back(spectral_bandwidth(sf));
    } else {
        out.values.push_back(0.0); // silent frame
        out.values.push_back(0.0);
        out.quality_ok = false;
    }

    for (double c : mfcc(f, cfg.mfcc)) out.values.push_back(c);

    if (f.magnetic.size() < 2) throw DataError("build_feature_vector: need 2 magnetic samples");
    std::vector<double> axis(f.magnetic.size());
    for (int a = 0; a < 3; ++a) {
        for (std::size_t i = 0; i < f.magnetic.size(); ++i) {
            const Vec3& v = f.magnetic[i];
            axis[i] = a == 0 ? v.x : (a == 1 ? v.y : v.z);
        }
        double sum = 0.0;
        for (double v : axis) sum += v;
        const double mean = sum / static_cast<double>(axis.size());
        double m2 = 0.0;
        for (double v : axis) m2 += (v - mean) * (v - mean);
        m2 /= static_cast<double>(axis.size());
        out.values.push_back(mean);
        out.values.push_back(std::sqrt(m2));
        if (m2 > 0.0) {
            const AxisStats st = axis_stats(axis);
            out.values.push_back(st.skewness);
            out.values.push_back(st.kurtosis);
        } else {
            out.values.push_back(0.0); // degenerate axis
            out.values.push_back(0.0);
            out.quality_ok = false;
        }
    }
    return out;
}

std::vector<FeatureVector> smooth_feature_matrix(const std::vector<FeatureVector>& rows,
                                                 double sigma) {
    if (sigma <= 0.0 || rows.size() < 2) return rows;
    const std::size_t dim = rows.front().values.size();
    std::vector<FeatureVector> out = rows;
    std::vector<double> column(rows.size());
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i].values[j];
        const auto smoothed = gaussian_smooth(column, sigma);
        for (std::size_t i = 0; i < rows.size(); ++i) out[i].values[j] = smoothed[i];
    }
    return out;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureVector>& rows,
                       const std::vector<std::string>& labels, const FeatureConfig& cfg) {
    out << "frame_idx,label";
    for (const auto& name : feature_names(cfg)) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << i << ',' << (i < labels.size() ? labels[i] : std::string("-"));
        for (double v : rows[i].values) out << ',' << detail::format_general(v, 12);
        out << '\n';
    }
}

} // namespace printleak::features
