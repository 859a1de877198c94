#pragma once

// Test-only reference implementations, coded independently of the library
// path they check: naive O(N^2) DFT instead of the FFT, direct formula loops
// instead of the shared helpers. Used by the unit suites and the acceptance
// oracle criterion.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracle {

inline double zcr(const std::vector<double>& x) {
    std::size_t count = 0;
    for (std::size_t n = 1; n < x.size(); ++n) {
        if (x[n] * x[n - 1] < 0.0) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(x.size() - 1);
}

inline double short_time_energy(const std::vector<double>& x) {
    double e = 0.0;
    for (double v : x) e += v * v;
    return e;
}

inline double rms(const std::vector<double>& x) {
    return std::sqrt(short_time_energy(x) / static_cast<double>(x.size()));
}

inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    const double pi = 3.14159265358979323846;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 0; t < n; ++t) {
            const double ang =
                -2.0 * pi * static_cast<double>(k) * static_cast<double>(t) / static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

inline std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n);
    const double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return w;
}

// Hann-windowed half spectrum via the naive DFT, mirroring the library's
// bin layout (0..N/2, freq k*rate/N).
struct Spectrum {
    std::vector<double> freq, mag;
};

inline Spectrum spectrum(const std::vector<double>& x, double rate) {
    const std::size_t n = x.size();
    const auto w = hann(n);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] * w[i];
    const auto X = naive_dft(xs);
    Spectrum sp;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        sp.freq.push_back(static_cast<double>(k) * rate / static_cast<double>(n));
        sp.mag.push_back(std::abs(X[k]));
    }
    return sp;
}

inline double centroid(const Spectrum& sp) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < sp.mag.size(); ++k) {
        num += sp.freq[k] * sp.mag[k];
        den += sp.mag[k];
    }
    return num / den;
}

inline double bandwidth(const Spectrum& sp) {
    const double c = centroid(sp);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < sp.mag.size(); ++k) {
        num += (sp.freq[k] - c) * (sp.freq[k] - c) * sp.mag[k];
        den += sp.mag[k];
    }
    return std::sqrt(num / den);
}

// Direct convolution with an explicitly materialized reflect-padded series.
inline std::vector<double> gaussian_smooth(const std::vector<double>& x, double sigma) {
    const long n = static_cast<long>(x.size());
    const long radius = static_cast<long>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (long i = -radius; i <= radius; ++i) {
        kernel[static_cast<std::size_t>(i + radius)] =
            std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        sum += kernel[static_cast<std::size_t>(i + radius)];
    }
    for (auto& k : kernel) k /= sum;

    // Padded buffer: [x reflected | x | x reflected], half-sample reflection
    // applied repeatedly for radii beyond the series length.
    const auto reflect = [&](long idx) {
        while (idx < 0 || idx >= n) {
            if (idx < 0) idx = -idx - 1;
            if (idx >= n) idx = 2 * n - idx - 1;
        }
        return static_cast<std::size_t>(idx);
    };
    std::vector<double> padded;
    for (long i = -radius; i < n + radius; ++i) padded.push_back(x[reflect(i)]);

    std::vector<double> out(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long j = 0; j <= 2 * radius; ++j) {
            acc += kernel[static_cast<std::size_t>(j)] *
                   padded[static_cast<std::size_t>(i + j)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

// Independent mel filterbank + cosine-transform coefficients.
inline std::vector<double> mfcc(const std::vector<double>& x, double rate, int n_mels,
                                int n_coeffs, double fmin, double fmax, double log_floor) {
    const auto sp = spectrum(x, rate);
    const double pi = 3.14159265358979323846;
    auto to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    auto to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };

    const double m_lo = to_mel(fmin);
    const double m_hi = to_mel(fmax);
    std::vector<double> mel_spec(static_cast<std::size_t>(n_mels), 0.0);
    for (int m = 1; m <= n_mels; ++m) {
        const double lo = to_hz(m_lo + (m_hi - m_lo) * (m - 1) / (n_mels + 1));
        const double mid = to_hz(m_lo + (m_hi - m_lo) * m / (n_mels + 1));
        const double hi = to_hz(m_lo + (m_hi - m_lo) * (m + 1) / (n_mels + 1));
        double s = 0.0;
        for (std::size_t k = 0; k < sp.freq.size(); ++k) {
            const double f = sp.freq[k];
            double w = 0.0;
            if (f > lo && f < mid) {
                w = (f - lo) / (mid - lo);
            } else if (f == mid) {
                w = 1.0;
            } else if (f > mid && f < hi) {
                w = (hi - f) / (hi - mid);
            }
            s += w * sp.mag[k];
        }
        mel_spec[static_cast<std::size_t>(m - 1)] = s;
    }

    std::vector<double> out(static_cast<std::size_t>(n_coeffs), 0.0);
    for (int n = 1; n <= n_coeffs; ++n) {
        double acc = 0.0;
        for (int m = 1; m <= n_mels; ++m) {
            acc += std::log(std::max(mel_spec[static_cast<std::size_t>(m - 1)], log_floor)) *
                   std::cos(n * (m - 0.5) * pi / n_mels);
        }
        out[static_cast<std::size_t>(n - 1)] = acc;
    }
    return out;
}

struct Moments {
    double mean, stddev, skewness, kurtosis;
};

inline Moments moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {mean, std::sqrt(m2), m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

// Relative error with a unit floor so near-zero quantities compare sanely.
inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

} // namespace oracle
