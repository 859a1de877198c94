#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "printleak/errors.hpp"
#include "printleak/features.hpp"
#include "printleak/rng.hpp"

using namespace printleak;
using namespace printleak::features;

TEST_SUITE_BEGIN("features");

namespace {

Frame make_frame(std::vector<double> acoustic, std::vector<Vec3> magnetic = {},
                 double rate = 8000.0) {
    Frame f;
    f.acoustic = std::move(acoustic);
    if (magnetic.empty()) magnetic.assign(10, Vec3{});
    f.magnetic = std::move(magnetic);
    f.acoustic_rate = rate;
    return f;
}

Frame random_frame(Rng& rng, std::size_t n_ac = 800, std::size_t n_mag = 10) {
    std::vector<double> ac(n_ac);
    for (auto& v : ac) v = rng.uniform(-1.0, 1.0);
    std::vector<Vec3> mag(n_mag);
    for (auto& m : mag) {
        m = Vec3{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
    }
    return make_frame(std::move(ac), std::move(mag));
}

std::vector<double> tone(double freq, double rate, std::size_t n, double amp = 0.7) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
    }
    return x;
}

} // namespace

TEST_CASE("zcr: frozen examples") {
    CHECK(zcr(make_frame({1, 1, 1, 1})) == 0.0);
    CHECK(zcr(make_frame({1, -1, 1, -1})) == 1.0);
    CHECK_THROWS_AS(zcr(make_frame({1.0})), DataError);
}

TEST_CASE("zcr: matches the direct count oracle") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const auto f = random_frame(rng, 257);
        CHECK(zcr(f) == oracle::zcr(f.acoustic));
    }
}

TEST_CASE("short_time_energy: frozen examples and oracle") {
    CHECK(short_time_energy(make_frame({0, 0, 0})) == 0.0);
    CHECK(short_time_energy(make_frame({3, 4})) == 25.0);
    Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const auto f = random_frame(rng, 301);
        CHECK(oracle::rel_err(short_time_energy(f), oracle::short_time_energy(f.acoustic)) <
              1e-12);
    }
}

TEST_CASE("rms: closed forms") {
    CHECK(rms(make_frame({3, 3, 3, 3})) == doctest::Approx(3.0));
    CHECK(rms(make_frame({0, 0})) == 0.0);
    CHECK(rms(make_frame({3, 4})) == doctest::Approx(std::sqrt(12.5)));
}

TEST_CASE("rms^2 * N equals STE") {
    Rng rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const auto f = random_frame(rng, 400);
        const double lhs = rms(f) * rms(f) * static_cast<double>(f.acoustic.size());
        CHECK(oracle::rel_err(lhs, short_time_energy(f)) < 1e-9);
    }
}

TEST_CASE("spectrum: pure tone has its peak at the nearest bin") {
    const auto f = make_frame(tone(1000.0, 8000.0, 800));
    const auto sf = spectrum(f);
    std::size_t peak = 0;
    for (std::size_t k = 1; k < sf.mag.size(); ++k) {
        if (sf.mag[k] > sf.mag[peak]) peak = k;
    }
    CHECK(sf.freq[peak] == doctest::Approx(1000.0).epsilon(0.01));
}

TEST_CASE("spectrum: DC frame concentrates in bin 0") {
    const auto sf = spectrum(make_frame(std::vector<double>(128, 1.0)));
    std::size_t peak = 1;
    for (std::size_t k = 1; k < sf.mag.size(); ++k) {
        if (sf.mag[k] > sf.mag[peak]) peak = k;
    }
    CHECK(sf.mag[0] > sf.mag[peak]);
}

TEST_CASE("spectrum: Parseval against windowed energy") {
    Rng rng(14);
    for (int rep = 0; rep < 10; ++rep) {
        const auto f = random_frame(rng, 512);
        const auto X = dft_real([&] {
            std::vector<double> w(f.acoustic.size());
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] = f.acoustic[i] *
                       (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                             static_cast<double>(w.size() - 1)));
            }
            return w;
        }());
        double spec_energy = 0.0;
        for (const auto& c : X) spec_energy += std::norm(c);
        spec_energy /= static_cast<double>(X.size());
        double time_energy = 0.0;
        for (std::size_t i = 0; i < f.acoustic.size(); ++i) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                  static_cast<double>(f.acoustic.size() - 1));
            time_energy += f.acoustic[i] * w * f.acoustic[i] * w;
        }
        CHECK(oracle::rel_err(spec_energy, time_energy) < 1e-9);
    }
}

TEST_CASE("spectrum matches the naive DFT oracle") {
    Rng rng(15);
    for (std::size_t n : {64u, 100u, 800u}) { // power of two and Bluestein paths
        const auto f = random_frame(rng, n);
        const auto sf = spectrum(f);
        const auto osp = oracle::spectrum(f.acoustic, f.acoustic_rate);
        REQUIRE(sf.mag.size() == osp.mag.size());
        for (std::size_t k = 0; k < sf.mag.size(); ++k) {
            CHECK(std::fabs(sf.mag[k] - osp.mag[k]) < 1e-8);
            CHECK(sf.freq[k] == doctest::Approx(osp.freq[k]));
        }
    }
}

TEST_CASE("centroid: frozen examples") {
    SpectrumFrame sf;
    sf.freq = {0, 100, 200, 300};
    sf.mag = {0, 0, 5, 0};
    CHECK(spectral_centroid(sf) == doctest::Approx(200.0));
    sf.mag = {1, 1, 1, 1};
    CHECK(spectral_centroid(sf) == doctest::Approx(150.0));
    sf.mag = {0, 0, 0, 0};
    CHECK_THROWS_WITH_AS(spectral_centroid(sf), doctest::Contains("silent"), DataError);
}

TEST_CASE("centroid: 1 kHz tone lands within a bin") {
    const auto f = make_frame(tone(1000.0, 8000.0, 800));
    const double c = spectral_centroid(spectrum(f));
    CHECK(std::fabs(c - 1000.0) < 8000.0 / 800.0);
}

TEST_CASE("centroid and bandwidth match the oracle on noise frames") {
    Rng rng(16);
    for (int rep = 0; rep < 25; ++rep) {
        const auto f = random_frame(rng, 320);
        const auto sf = spectrum(f);
        const auto osp = oracle::spectrum(f.acoustic, f.acoustic_rate);
        CHECK(oracle::rel_err(spectral_centroid(sf), oracle::centroid(osp)) < 1e-9);
        CHECK(oracle::rel_err(spectral_bandwidth(sf), oracle::bandwidth(osp)) < 1e-9);
    }
}

TEST_CASE("bandwidth: closed forms") {
    SpectrumFrame sf;
    sf.freq = {0, 100, 200, 300};
    sf.mag = {0, 4, 0, 0};
    CHECK(spectral_bandwidth(sf) == doctest::Approx(0.0));
    sf.mag = {0, 3, 0, 3}; // two equal bins at 100 and 300
    CHECK(spectral_bandwidth(sf) == doctest::Approx(100.0)); // |f2-f1|/2
}

TEST_CASE("gaussian_smooth: constant series is unchanged") {
    const std::vector<double> series(32, 2.5);
    for (double v : gaussian_smooth(series, 2.0)) CHECK(v == doctest::Approx(2.5));
}

TEST_CASE("gaussian_smooth: unit impulse reproduces the kernel") {
    std::vector<double> series(31, 0.0);
    series[15] = 1.0;
    const auto out = gaussian_smooth(series, 1.5);
    const long radius = 5; // ceil(3 * 1.5)
    double sum = 0.0;
    std::vector<double> kernel;
    for (long i = -radius; i <= radius; ++i) {
        kernel.push_back(std::exp(-static_cast<double>(i * i) / (2.0 * 1.5 * 1.5)));
        sum += kernel.back();
    }
    for (long i = -radius; i <= radius; ++i) {
        CHECK(out[static_cast<std::size_t>(15 + i)] ==
              doctest::Approx(kernel[static_cast<std::size_t>(i + radius)] / sum));
    }
}

TEST_CASE("gaussian_smooth: matches direct convolution and preserves the mean") {
    Rng rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> series(5 + rng.below(60));
        for (auto& v : series) v = rng.uniform(-4.0, 4.0);
        const double sigma = 0.5 + rng.uniform01() * 3.0;
        const auto ours = gaussian_smooth(series, sigma);
        const auto ref = oracle::gaussian_smooth(series, sigma);
        REQUIRE(ours.size() == ref.size());
        for (std::size_t i = 0; i < ours.size(); ++i) {
            CHECK(oracle::rel_err(ours[i], ref[i]) < 1e-12);
        }
        double mean_in = 0.0, mean_out = 0.0;
        for (double v : series) mean_in += v;
        for (double v : ours) mean_out += v;
        mean_in /= static_cast<double>(series.size());
        mean_out /= static_cast<double>(series.size());
        CHECK(oracle::rel_err(mean_in, mean_out) < 1e-9);
    }
}

TEST_CASE("mfcc: silent frame gives near-zero coefficients") {
    const auto coeffs = mfcc(make_frame(std::vector<double>(800, 0.0)));
    for (double c : coeffs) CHECK(std::fabs(c) < 1e-9);
}

TEST_CASE("mfcc: deterministic on identical frames") {
    const auto f = make_frame(tone(523.0, 8000.0, 800));
    const auto a = mfcc(f);
    const auto b = mfcc(f);
    CHECK(a == b);
}

TEST_CASE("mfcc: matches the independent mel + cosine oracle") {
    Rng rng(18);
    const MfccConfig cfg;
    for (int rep = 0; rep < 10; ++rep) {
        const bool pure_tone = rep % 2 == 0;
        const auto f = pure_tone ? make_frame(tone(300.0 + 200.0 * rep, 8000.0, 800))
                                 : random_frame(rng, 800);
        const auto ours = mfcc(f, cfg);
        const auto ref = oracle::mfcc(f.acoustic, f.acoustic_rate, cfg.n_mels, cfg.n_coeffs,
                                      cfg.fmin, 4000.0, cfg.log_floor);
        REQUIRE(ours.size() == ref.size());
        // Pure tones leave distant mel bands nearly empty, and the log of a
        // tiny band magnifies last-digit DFT differences; broadband frames
        // stay well-conditioned.
        const double tol = pure_tone ? 1e-6 : 1e-9;
        for (std::size_t i = 0; i < ours.size(); ++i) {
            CHECK(oracle::rel_err(ours[i], ref[i]) < tol);
        }
    }
}

TEST_CASE("mfcc: config validation") {
    const auto f = make_frame(tone(440.0, 8000.0, 256));
    MfccConfig cfg;
    cfg.fmax = 5000.0; // above Nyquist
    CHECK_THROWS_AS(mfcc(f, cfg), DataError);
    cfg = {};
    cfg.n_coeffs = 40;
    CHECK_THROWS_AS(mfcc(f, cfg), DataError);
}

TEST_CASE("magnetic_stats: closed forms") {
    Frame f = make_frame({0, 0}, {Vec3{-1, 2, 5}, Vec3{0, 2.5, 6}, Vec3{1, 3, 7}});
    const auto stats = magnetic_stats(f);
    CHECK(stats[0].mean == doctest::Approx(0.0));
    CHECK(stats[0].stddev == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(stats[0].skewness == doctest::Approx(0.0));
}

TEST_CASE("magnetic_stats: degenerate axis throws") {
    Frame f = make_frame({0, 0}, {Vec3{1, 2, 3}, Vec3{1, 2.5, 4}});
    CHECK_THROWS_WITH_AS(magnetic_stats(f), doctest::Contains("degenerate"), DataError);
}

TEST_CASE("magnetic_stats: matches the moment oracle") {
    Rng rng(19);
    for (int rep = 0; rep < 50; ++rep) {
        const auto f = random_frame(rng, 16, 24);
        const auto stats = magnetic_stats(f);
        for (int axis = 0; axis < 3; ++axis) {
            std::vector<double> xs;
            for (const auto& m : f.magnetic) {
                xs.push_back(axis == 0 ? m.x : (axis == 1 ? m.y : m.z));
            }
            const auto ref = oracle::moments(xs);
            const auto& st = stats[static_cast<std::size_t>(axis)];
            CHECK(oracle::rel_err(st.mean, ref.mean) < 1e-12);
            CHECK(oracle::rel_err(st.stddev, ref.stddev) < 1e-12);
            CHECK(oracle::rel_err(st.skewness, ref.skewness) < 1e-9);
            CHECK(oracle::rel_err(st.kurtosis, ref.kurtosis) < 1e-9);
        }
    }
}

TEST_CASE("skewness is exactly zero on mirror-symmetric samples") {
    Rng rng(20);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> xs;
        for (int i = 0; i < 7; ++i) {
            const double v = rng.uniform(0.5, 9.0);
            xs.push_back(v);
            xs.push_back(-v);
        }
        CHECK(axis_stats(xs).skewness == 0.0);
    }
}

TEST_CASE("excess kurtosis of a large gaussian sample is near zero") {
    Rng rng(21);
    std::vector<double> xs(100000);
    for (auto& v : xs) v = rng.gaussian();
    CHECK(std::fabs(axis_stats(xs).kurtosis) < 0.2);
}

TEST_CASE("build_feature_vector: zero frame is all zeros with the quality flag") {
    Frame f = make_frame(std::vector<double>(800, 0.0));
    const auto v = build_feature_vector(f);
    CHECK(!v.quality_ok);
    CHECK(v.values.size() == 30);
    for (double x : v.values) CHECK(std::fabs(x) < 1e-9);
}

TEST_CASE("build_feature_vector: fixed dimension and determinism") {
    Rng rng(22);
    const auto f = random_frame(rng);
    const auto a = build_feature_vector(f);
    const auto b = build_feature_vector(f);
    CHECK(a.values.size() == feature_dim({}));
    CHECK(a.values == b.values);
    CHECK(a.quality_ok);
    CHECK(feature_names({}).size() == a.values.size());
}

TEST_CASE("feature index groups partition the layout") {
    const FeatureConfig cfg;
    const auto ac = acoustic_indices(cfg);
    const auto mag = magnetic_indices(cfg);
    CHECK(ac.size() + mag.size() == feature_dim(cfg));
    CHECK(ac.front() == 0);
    CHECK(mag.front() == static_cast<int>(ac.size()));
    CHECK(mag.back() == static_cast<int>(feature_dim(cfg)) - 1);
}

TEST_SUITE_END();
