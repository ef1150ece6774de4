#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "respiscreen/thermal.hpp"

namespace respiscreen {

/// Uniformly sampled region-mean temperature series, degrees Celsius.
struct BreathSignal {
    std::vector<double> samples;
    double sample_rate_hz = 0.0;
    double t0_s = 0.0;

    double duration_seconds() const {
        return sample_rate_hz > 0.0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
    }
};

/// One-sided power spectrum. power[k] = |X[k]|^2 of the windowed,
/// zero-padded DFT; freqs run 0..Nyquist on a uniform grid.
struct Spectrum {
    std::vector<double> freqs_hz;
    std::vector<double> power;
    double resolution_hz = 0.0;
};

struct DominantFrequency {
    double frequency_hz = 0.0;
    double snr = 0.0;  // peak power over median in-band power
};

/// Mean temperature inside rects[i] of frames[i]; one sample per frame.
inline BreathSignal roi_mean_series(const std::vector<CelsiusFrame>& frames, double fps,
                                    const std::vector<Rect>& rects, double t0_s = 0.0) {
    if (rects.size() != frames.size())
        throw std::invalid_argument("roi_mean_series: one rect per frame required");
    BreathSignal sig;
    sig.sample_rate_hz = fps;
    sig.t0_s = t0_s;
    sig.samples.reserve(frames.size());
    for (size_t i = 0; i < frames.size(); ++i) {
        const CelsiusFrame& f = frames[i];
        const Rect& r = rects[i];
        if (!r.within(f.width, f.height))
            throw std::out_of_range("roi_mean_series: rect outside frame bounds");
        double sum = 0.0;
        for (int32_t row = r.y; row < r.bottom(); ++row) {
            const double* p = &f.temps[static_cast<size_t>(row) * f.width + r.x];
            for (int32_t k = 0; k < r.w; ++k) sum += p[k];
        }
        sig.samples.push_back(sum / static_cast<double>(r.area()));
    }
    return sig;
}

/// Subtracts the least-squares line; the result has zero mean and zero
/// least-squares slope.
inline BreathSignal detrend(const BreathSignal& sig) {
    const size_t n = sig.samples.size();
    if (n < 2) throw std::invalid_argument("detrend: too few samples");
    const double mid = (static_cast<double>(n) - 1.0) / 2.0;
    double mean = 0.0, cov = 0.0, var_t = 0.0;
    for (size_t i = 0; i < n; ++i) mean += sig.samples[i];
    mean /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        const double tc = static_cast<double>(i) - mid;
        cov += tc * (sig.samples[i] - mean);
        var_t += tc * tc;
    }
    const double slope = cov / var_t;
    BreathSignal out = sig;
    for (size_t i = 0; i < n; ++i)
        out.samples[i] = sig.samples[i] - mean - slope * (static_cast<double>(i) - mid);
    return out;
}

namespace detail {

/// 4th-order IIR transfer function (normalized a[0] = 1).
struct Biquad4 {
    double b[5];
    double a[5];
};

/**
 * Band-pass Butterworth from a 2nd-order low-pass prototype via the analog
 * band transform and the bilinear map, i.e. a 4-pole band-pass with double
 * zeros at z=1 and z=-1, unity gain at the geometric band center.
 */
inline Biquad4 design_butter_bandpass(double low_hz, double high_hz, double fs) {
    using cd = std::complex<double>;
    const double wl = std::tan(std::numbers::pi * low_hz / fs);
    const double wh = std::tan(std::numbers::pi * high_hz / fs);
    const double w0sq = wl * wh;
    const double bw = wh - wl;

    // Prototype poles of the order-2 Butterworth low-pass.
    const cd proto[2] = {std::polar(1.0, 3.0 * std::numbers::pi / 4.0),
                         std::polar(1.0, 5.0 * std::numbers::pi / 4.0)};
    cd zpoles[4];
    int np = 0;
    for (const cd& p : proto) {
        const cd bp = bw * p;
        const cd disc = std::sqrt(bp * bp - 4.0 * w0sq);
        for (const cd s : {(bp + disc) / 2.0, (bp - disc) / 2.0})
            zpoles[np++] = (1.0 + s) / (1.0 - s);  // bilinear map
    }

    Biquad4 f{};
    // numerator (1 - z^-2)^2
    f.b[0] = 1.0; f.b[1] = 0.0; f.b[2] = -2.0; f.b[3] = 0.0; f.b[4] = 1.0;
    // denominator prod(1 - zp * z^-1); poles come in conjugate pairs so the
    // expansion is real
    cd den[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < 4; ++i)
        for (int k = 4; k >= 1; --k) den[k] -= zpoles[i] * den[k - 1];
    for (int k = 0; k < 5; ++k) f.a[k] = den[k].real();

    // unity gain at the band center
    const double w0 = 2.0 * std::atan(std::sqrt(w0sq));
    const cd z1 = std::polar(1.0, -w0);
    cd num_v = 0.0, den_v = 0.0, zk = 1.0;
    for (int k = 0; k < 5; ++k) {
        num_v += f.b[k] * zk;
        den_v += f.a[k] * zk;
        zk *= z1;
    }
    const double g = std::abs(den_v) / std::abs(num_v);
    for (double& b : f.b) b *= g;
    return f;
}

/// Steady-state transposed direct form II states for a constant input x0.
inline void steady_state_zi(const Biquad4& f, double x0, double zi[4]) {
    double sb = 0.0, sa = 0.0;
    for (double b : f.b) sb += b;
    for (double a : f.a) sa += a;
    const double y0 = (sb / sa) * x0;
    zi[3] = f.b[4] * x0 - f.a[4] * y0;
    zi[2] = f.b[3] * x0 - f.a[3] * y0 + zi[3];
    zi[1] = f.b[2] * x0 - f.a[2] * y0 + zi[2];
    zi[0] = f.b[1] * x0 - f.a[1] * y0 + zi[1];
}

inline void filter_in_place(const Biquad4& f, std::vector<double>& x) {
    double z[4];
    steady_state_zi(f, x.empty() ? 0.0 : x.front(), z);
    for (double& v : x) {
        const double in = v;
        const double y = f.b[0] * in + z[0];
        z[0] = f.b[1] * in - f.a[1] * y + z[1];
        z[1] = f.b[2] * in - f.a[2] * y + z[2];
        z[2] = f.b[3] * in - f.a[3] * y + z[3];
        z[3] = f.b[4] * in - f.a[4] * y;
        v = y;
    }
}

}  // namespace detail

/**
 * Zero-phase 2nd-order Butterworth band-pass: the filter runs forward then
 * backward, with one second of mirror-reflected signal at each boundary to
 * absorb edge transients. The mirror is symmetric (no level flip): an
 * anti-symmetric extension injects a step of twice the endpoint value at
 * the joint, and the band-pass rings on that step far longer than any
 * realistic pad.
 */
inline BreathSignal bandpass(const BreathSignal& sig, double low_hz = 0.1, double high_hz = 0.85) {
    const size_t n = sig.samples.size();
    if (n < 2) throw std::invalid_argument("bandpass: too few samples");
    const double fs = sig.sample_rate_hz;
    if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0))
        throw std::invalid_argument("bandpass: band outside (0, Nyquist)");

    const detail::Biquad4 f = detail::design_butter_bandpass(low_hz, high_hz, fs);

    const size_t pad = std::min(n - 1, static_cast<size_t>(std::max(4.0, std::round(fs))));
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (size_t i = 0; i < pad; ++i) ext.push_back(sig.samples[pad - i]);
    ext.insert(ext.end(), sig.samples.begin(), sig.samples.end());
    for (size_t i = 0; i < pad; ++i) ext.push_back(sig.samples[n - 2 - i]);

    detail::filter_in_place(f, ext);
    std::reverse(ext.begin(), ext.end());
    detail::filter_in_place(f, ext);
    std::reverse(ext.begin(), ext.end());

    BreathSignal out = sig;
    std::copy(ext.begin() + static_cast<std::ptrdiff_t>(pad),
              ext.begin() + static_cast<std::ptrdiff_t>(pad + n), out.samples.begin());
    return out;
}

namespace detail {

/// Iterative radix-2 FFT, in place; n must be a power of two.
inline void fft(std::vector<std::complex<double>>& a) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const std::complex<double> wlen =
            std::polar(1.0, -2.0 * std::numbers::pi / static_cast<double>(len));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w = 1.0;
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace detail

/// Symmetric Hann window value, length n, index i.
inline double hann(size_t i, size_t n) {
    return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n - 1)));
}

/**
 * Hann-windowed, mean-removed, zero-padded magnitude-squared spectrum.
 * zero_pad_to is rounded up to the next power of two (and to at least the
 * signal length).
 */
inline Spectrum periodogram(const BreathSignal& sig, size_t zero_pad_to = 4096) {
    const size_t n = sig.samples.size();
    if (n < 8) throw std::invalid_argument("periodogram: too few samples");
    const size_t nfft = detail::next_pow2(std::max(zero_pad_to, n));

    double mean = 0.0;
    for (double v : sig.samples) mean += v;
    mean /= static_cast<double>(n);

    std::vector<std::complex<double>> buf(nfft, 0.0);
    for (size_t i = 0; i < n; ++i) buf[i] = (sig.samples[i] - mean) * hann(i, n);
    detail::fft(buf);

    Spectrum spec;
    spec.resolution_hz = sig.sample_rate_hz / static_cast<double>(nfft);
    const size_t half = nfft / 2;
    spec.freqs_hz.resize(half + 1);
    spec.power.resize(half + 1);
    for (size_t k = 0; k <= half; ++k) {
        spec.freqs_hz[k] = static_cast<double>(k) * spec.resolution_hz;
        spec.power[k] = std::norm(buf[k]);
    }
    return spec;
}

/**
 * Max-power bin within [low, high], refined by parabolic interpolation over
 * the three bins around the peak. snr is peak power over the median
 * in-band power.
 */
inline DominantFrequency dominant_frequency(const Spectrum& spec, double low_hz, double high_hz) {
    size_t first = spec.freqs_hz.size(), last = 0;
    for (size_t k = 0; k < spec.freqs_hz.size(); ++k) {
        if (spec.freqs_hz[k] >= low_hz && spec.freqs_hz[k] <= high_hz) {
            first = std::min(first, k);
            last = k;
        }
    }
    if (first >= spec.freqs_hz.size())
        throw std::invalid_argument("dominant_frequency: empty band");

    size_t kmax = first;
    for (size_t k = first; k <= last; ++k)
        if (spec.power[k] > spec.power[kmax]) kmax = k;

    double delta = 0.0;
    if (kmax > 0 && kmax + 1 < spec.power.size()) {
        const double pm = spec.power[kmax - 1];
        const double p0 = spec.power[kmax];
        const double pp = spec.power[kmax + 1];
        const double denom = pm - 2.0 * p0 + pp;
        if (std::abs(denom) > 1e-300) delta = std::clamp(0.5 * (pm - pp) / denom, -0.5, 0.5);
    }

    std::vector<double> band(spec.power.begin() + static_cast<std::ptrdiff_t>(first),
                             spec.power.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    const size_t mid = band.size() / 2;
    std::nth_element(band.begin(), band.begin() + static_cast<std::ptrdiff_t>(mid), band.end());
    double median = band[mid];
    if (band.size() % 2 == 0) {
        const double lo = *std::max_element(band.begin(), band.begin() + static_cast<std::ptrdiff_t>(mid));
        median = (median + lo) / 2.0;
    }

    DominantFrequency out;
    out.frequency_hz = (static_cast<double>(kmax) + delta) * spec.resolution_hz;
    const double peak = spec.power[kmax];
    if (median > 0.0)
        out.snr = peak / median;
    else
        out.snr = peak > 0.0 ? 1e12 : 1.0;
    return out;
}

/**
 * Counts local maxima with topographic prominence >= min_prominence, then
 * enforces pairwise separation >= min_separation greedily, keeping the
 * higher peak on conflict.
 */
inline size_t count_peaks(const BreathSignal& sig, double min_separation_s = 60.0 / 40.0,
                          double min_prominence = 0.05) {
    const std::vector<double>& x = sig.samples;
    const size_t n = x.size();
    if (n < 3) return 0;

    std::vector<size_t> candidates;
    for (size_t i = 1; i + 1 < n; ++i)
        if (x[i] > x[i - 1] && x[i] > x[i + 1]) candidates.push_back(i);

    std::vector<size_t> prominent;
    for (size_t i : candidates) {
        double left_min = x[i];
        for (size_t j = i; j-- > 0;) {
            if (x[j] > x[i]) break;
            left_min = std::min(left_min, x[j]);
        }
        double right_min = x[i];
        for (size_t j = i + 1; j < n; ++j) {
            if (x[j] > x[i]) break;
            right_min = std::min(right_min, x[j]);
        }
        if (x[i] - std::max(left_min, right_min) >= min_prominence) prominent.push_back(i);
    }

    std::sort(prominent.begin(), prominent.end(), [&](size_t a, size_t b) {
        if (x[a] != x[b]) return x[a] > x[b];
        return a < b;
    });
    const double min_sep_samples = min_separation_s * sig.sample_rate_hz;
    std::vector<size_t> accepted;
    for (size_t i : prominent) {
        bool ok = true;
        for (size_t j : accepted) {
            const double d = i > j ? static_cast<double>(i - j) : static_cast<double>(j - i);
            if (d < min_sep_samples) {
                ok = false;
                break;
            }
        }
        if (ok) accepted.push_back(i);
    }
    return accepted.size();
}

/// Root-mean-square of a signal.
inline double rms(const BreathSignal& sig) {
    if (sig.samples.empty()) return 0.0;
    double s = 0.0;
    for (double v : sig.samples) s += v * v;
    return std::sqrt(s / static_cast<double>(sig.samples.size()));
}

}  // namespace respiscreen
