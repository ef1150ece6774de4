#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "respiscreen/dsp.hpp"

using namespace respiscreen;

namespace {

constexpr double kFs = 8.7;

BreathSignal tone(double freq_hz, double amp, double seconds = 15.0, double fs = kFs,
                  double phase = 0.0) {
    BreathSignal sig;
    sig.sample_rate_hz = fs;
    const size_t n = static_cast<size_t>(std::floor(seconds * fs));
    for (size_t i = 0; i < n; ++i)
        sig.samples.push_back(
            amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs + phase));
    return sig;
}

BreathSignal constant(double value, size_t n, double fs = kFs) {
    BreathSignal sig;
    sig.sample_rate_hz = fs;
    sig.samples.assign(n, value);
    return sig;
}

double amplitude_of(const BreathSignal& sig, size_t skip_edges) {
    double peak = 0.0;
    for (size_t i = skip_edges; i + skip_edges < sig.samples.size(); ++i)
        peak = std::max(peak, std::abs(sig.samples[i]));
    return peak;
}

// least-squares amplitude and phase of the freq_hz component over the
// settled center of the signal
struct ToneFit {
    double amplitude;
    double phase;
};
ToneFit fit_tone(const BreathSignal& sig, double freq_hz, size_t skip_edges) {
    double cs = 0.0, cc = 0.0;
    size_t n = 0;
    for (size_t i = skip_edges; i + skip_edges < sig.samples.size(); ++i, ++n) {
        const double arg = 2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) /
                           sig.sample_rate_hz;
        cs += sig.samples[i] * std::sin(arg);
        cc += sig.samples[i] * std::cos(arg);
    }
    cs *= 2.0 / static_cast<double>(n);
    cc *= 2.0 / static_cast<double>(n);
    return {std::hypot(cs, cc), std::atan2(cc, cs)};
}

// Analytic magnitude of the order-2 Butterworth band-pass after
// forward-backward application, evaluated through the bilinear prewarp.
// This is the independent oracle for the filtering route.
double butter_fb_gain(double f, double low, double high, double fs) {
    const double W = std::tan(std::numbers::pi * f / fs);
    const double Wl = std::tan(std::numbers::pi * low / fs);
    const double Wh = std::tan(std::numbers::pi * high / fs);
    const double x = (W * W - Wl * Wh) / ((Wh - Wl) * W);
    return 1.0 / (1.0 + x * x * x * x);  // |H|^2 = single-pass power = filtfilt amplitude gain
}

}  // namespace

TEST_CASE("detrend removes an exact line") {
    BreathSignal sig;
    sig.sample_rate_hz = kFs;
    for (int i = 0; i < 100; ++i) sig.samples.push_back(3.5 + 0.25 * i);
    const BreathSignal out = detrend(sig);
    for (double v : out.samples) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("detrend of a constant is zero") {
    const BreathSignal out = detrend(constant(36.6, 50));
    for (double v : out.samples) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("detrend recovers a sinusoid riding a line") {
    const BreathSignal sine = tone(0.25, 0.4);
    BreathSignal mixed = sine;
    for (size_t i = 0; i < mixed.samples.size(); ++i)
        mixed.samples[i] += 30.0 + 0.05 * static_cast<double>(i) / kFs;

    // oracle: brute-force least-squares line fit of the pure sinusoid
    const size_t n = sine.samples.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += static_cast<double>(i);
        sy += sine.samples[i];
        sxx += static_cast<double>(i) * i;
        sxy += static_cast<double>(i) * sine.samples[i];
    }
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    const double slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
    const double icept = (sy - slope * sx) / static_cast<double>(n);

    const BreathSignal out = detrend(mixed);
    for (size_t i = 0; i < n; ++i) {
        const double expected = sine.samples[i] - (icept + slope * static_cast<double>(i));
        CHECK(std::abs(out.samples[i] - expected) < 1e-9);
    }
}

TEST_CASE("detrend and bandpass are linear operators") {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> dist(0.0, 1.0);
    BreathSignal x = constant(0.0, 130), y = constant(0.0, 130);
    for (size_t i = 0; i < 130; ++i) {
        x.samples[i] = dist(gen);
        y.samples[i] = dist(gen);
    }
    const double a = 2.3, b = -1.7;
    BreathSignal mix = x;
    for (size_t i = 0; i < 130; ++i) mix.samples[i] = a * x.samples[i] + b * y.samples[i];

    SECTION("detrend") {
        const BreathSignal lhs = detrend(mix);
        const BreathSignal dx = detrend(x), dy = detrend(y);
        for (size_t i = 0; i < 130; ++i)
            CHECK(std::abs(lhs.samples[i] - (a * dx.samples[i] + b * dy.samples[i])) < 1e-9);
    }
    SECTION("bandpass") {
        const BreathSignal lhs = bandpass(mix);
        const BreathSignal fx = bandpass(x), fy = bandpass(y);
        for (size_t i = 0; i < 130; ++i)
            CHECK(std::abs(lhs.samples[i] - (a * fx.samples[i] + b * fy.samples[i])) < 1e-9);
    }
}

TEST_CASE("bandpass blocks DC") {
    const BreathSignal out = bandpass(constant(1.0, 130));
    CHECK(amplitude_of(out, 10) < 1e-3);
}

TEST_CASE("bandpass passes 0.3 Hz nearly untouched, phase shift ~ 0") {
    const BreathSignal out = bandpass(tone(0.3, 1.0, 30.0));
    const ToneFit fit = fit_tone(out, 0.3, 40);
    const double oracle = butter_fb_gain(0.3, 0.1, 0.85, kFs);
    CHECK(fit.amplitude >= 0.9);
    CHECK(fit.amplitude <= 1.0 + 1e-6);
    CHECK(fit.amplitude == Catch::Approx(oracle).margin(0.01));
    CHECK(std::abs(fit.phase) < 0.05);
}

TEST_CASE("bandpass attenuates 2.0 Hz at least 20x") {
    const BreathSignal out = bandpass(tone(2.0, 1.0, 30.0));
    const ToneFit fit = fit_tone(out, 2.0, 40);
    const double oracle = butter_fb_gain(2.0, 0.1, 0.85, kFs);
    CHECK(fit.amplitude <= 1.0 / 20.0);
    CHECK(fit.amplitude == Catch::Approx(oracle).margin(0.005));
    // even the raw peak, edge ripple included, must stay well down
    CHECK(amplitude_of(out, 40) <= 0.1);
}

TEST_CASE("bandpass is zero-phase on pass-band tones") {
    for (double f : {0.2, 0.3, 0.5}) {
        const BreathSignal in = tone(f, 1.0, 30.0);
        const BreathSignal out = bandpass(in);
        // cross-correlation over small lags; the peak must sit at lag 0
        int best_lag = -99;
        double best = -1e300;
        const int n = static_cast<int>(in.samples.size());
        for (int lag = -5; lag <= 5; ++lag) {
            double c = 0.0;
            for (int i = std::max(0, -lag); i < n && i + lag < n; ++i)
                c += in.samples[static_cast<size_t>(i)] * out.samples[static_cast<size_t>(i + lag)];
            if (c > best) {
                best = c;
                best_lag = lag;
            }
        }
        INFO("tone " << f << " Hz");
        CHECK(best_lag == 0);
    }
}

TEST_CASE("bandpass twice changes an in-band tone by < 5% RMS") {
    const BreathSignal once = bandpass(tone(0.25, 1.0, 30.0));
    const BreathSignal twice = bandpass(once);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < once.samples.size(); ++i) {
        num += (twice.samples[i] - once.samples[i]) * (twice.samples[i] - once.samples[i]);
        den += once.samples[i] * once.samples[i];
    }
    CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("bandpass rejects bands outside Nyquist") {
    CHECK_THROWS_AS(bandpass(constant(0.0, 64), 0.1, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(bandpass(constant(0.0, 64), 0.0, 0.85), std::invalid_argument);
    CHECK_THROWS_AS(bandpass(constant(0.0, 64), 0.9, 0.5), std::invalid_argument);
}

TEST_CASE("periodogram peaks at the tone") {
    const Spectrum spec = periodogram(tone(0.25, 0.4), 4096);
    size_t kmax = 0;
    for (size_t k = 0; k < spec.power.size(); ++k)
        if (spec.power[k] > spec.power[kmax]) kmax = k;
    CHECK(std::abs(spec.freqs_hz[kmax] - 0.25) <= spec.resolution_hz);
}

TEST_CASE("periodogram satisfies Parseval on fixed-seed noise") {
    std::mt19937_64 gen(99);
    std::normal_distribution<double> dist(0.0, 1.0);
    BreathSignal sig = constant(0.0, 130);
    for (double& v : sig.samples) v = dist(gen);

    const size_t nfft = 4096;
    const Spectrum spec = periodogram(sig, nfft);

    // windowed, mean-removed time-domain power, computed directly
    double mean = 0.0;
    for (double v : sig.samples) mean += v;
    mean /= static_cast<double>(sig.samples.size());
    double time_power = 0.0;
    for (size_t i = 0; i < sig.samples.size(); ++i) {
        const double w = (sig.samples[i] - mean) * hann(i, sig.samples.size());
        time_power += w * w;
    }

    double spec_power = spec.power.front() + spec.power.back();
    for (size_t k = 1; k + 1 < spec.power.size(); ++k) spec_power += 2.0 * spec.power[k];
    spec_power /= static_cast<double>(nfft);

    CHECK(spec_power == Catch::Approx(time_power).epsilon(1e-6));
}

TEST_CASE("periodogram of a constant is identically zero") {
    const Spectrum spec = periodogram(constant(30.0, 64));
    for (double p : spec.power) CHECK(std::abs(p) < 1e-18);
}

TEST_CASE("periodogram requires at least 8 samples") {
    CHECK_THROWS_AS(periodogram(constant(0.0, 7)), std::invalid_argument);
}

TEST_CASE("dominant_frequency finds a 0.25 Hz tone within 0.005 Hz") {
    const Spectrum spec = periodogram(tone(0.25, 0.4), 4096);
    const DominantFrequency dom = dominant_frequency(spec, 0.1, 0.85);
    CHECK(dom.frequency_hz == Catch::Approx(0.25).margin(0.005));
    CHECK(dom.snr > 10.0);
}

TEST_CASE("dominant_frequency error <= 0.01 Hz across the whole band") {
    for (double f = 0.10; f <= 0.8501; f += 0.05) {
        for (double phase : {0.0, 1.1, 2.7}) {
            const Spectrum spec = periodogram(tone(f, 0.4, 15.0, kFs, phase), 4096);
            const DominantFrequency dom = dominant_frequency(spec, 0.1, 0.85);
            INFO("f = " << f << " phase = " << phase);
            CHECK(std::abs(dom.frequency_hz - f) <= 0.01);
        }
    }
}

TEST_CASE("dominant_frequency on a flat spectrum reports snr ~ 1") {
    Spectrum spec;
    spec.resolution_hz = 0.01;
    for (int k = 0; k <= 100; ++k) {
        spec.freqs_hz.push_back(k * 0.01);
        spec.power.push_back(3.0);
    }
    const DominantFrequency dom = dominant_frequency(spec, 0.1, 0.85);
    CHECK(dom.snr == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("dominant_frequency ignores out-of-band tones") {
    BreathSignal two = tone(0.3, 0.2, 30.0);
    const BreathSignal loud = tone(2.0, 1.0, 30.0);
    for (size_t i = 0; i < two.samples.size(); ++i) two.samples[i] += loud.samples[i];
    const DominantFrequency dom = dominant_frequency(periodogram(two, 4096), 0.1, 0.85);
    CHECK(dom.frequency_hz == Catch::Approx(0.3).margin(0.01));
}

TEST_CASE("dominant_frequency rejects an empty band") {
    const Spectrum spec = periodogram(tone(0.25, 0.4), 4096);
    CHECK_THROWS_AS(dominant_frequency(spec, 90.0, 99.0), std::invalid_argument);
}

TEST_CASE("count_peaks on a 0.25 Hz sinusoid over 15 s") {
    const size_t n = count_peaks(tone(0.25, 0.4), 60.0 / 40.0, 0.05);
    CHECK(n >= 3);
    CHECK(n <= 4);
}

TEST_CASE("count_peaks edge cases") {
    CHECK(count_peaks(constant(1.0, 100)) == 0);
    // amplitude below the prominence threshold
    CHECK(count_peaks(tone(0.25, 0.01)) == 0);
}

TEST_CASE("count_peaks separation keeps the higher peak") {
    BreathSignal sig = constant(0.0, 60, 10.0);
    sig.samples[10] = 1.0;
    sig.samples[14] = 2.0;  // 0.4 s from the first peak
    sig.samples[40] = 1.5;
    // min separation 1 s = 10 samples: peaks at 10 and 14 conflict
    CHECK(count_peaks(sig, 1.0, 0.1) == 2);
    CHECK(count_peaks(sig, 0.1, 0.1) == 3);
}

TEST_CASE("roi_mean_series basics") {
    CelsiusFrame f;
    f.width = 4;
    f.height = 4;
    f.temps.assign(16, 30.0);
    const std::vector<CelsiusFrame> frames{f, f, f};
    const std::vector<Rect> rects(3, Rect{1, 1, 2, 2});
    const BreathSignal sig = roi_mean_series(frames, kFs, rects, 0.0);
    REQUIRE(sig.samples.size() == 3);
    for (double v : sig.samples) CHECK(v == Catch::Approx(30.0));
    CHECK(sig.sample_rate_hz == kFs);
}

TEST_CASE("roi_mean_series is invariant to pixel order inside the rect") {
    CelsiusFrame a;
    a.width = 3;
    a.height = 1;
    a.temps = {1.0, 5.0, 9.0};
    CelsiusFrame b = a;
    std::swap(b.temps[0], b.temps[2]);
    const std::vector<Rect> rects{Rect{0, 0, 3, 1}};
    const double ma = roi_mean_series({a}, 1.0, rects).samples[0];
    const double mb = roi_mean_series({b}, 1.0, rects).samples[0];
    CHECK(ma == mb);
}

TEST_CASE("one-frame clip yields a one-sample signal; downstream ops refuse it") {
    CelsiusFrame f;
    f.width = 2;
    f.height = 2;
    f.temps.assign(4, 25.0);
    const BreathSignal sig = roi_mean_series({f}, kFs, {Rect{0, 0, 2, 2}});
    CHECK(sig.samples.size() == 1);
    CHECK_THROWS_AS(detrend(sig), std::invalid_argument);
    CHECK_THROWS_AS(bandpass(sig), std::invalid_argument);
}
