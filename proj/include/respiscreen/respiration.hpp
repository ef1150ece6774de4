#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "respiscreen/dsp.hpp"

namespace respiscreen {

enum class BreathPattern { Eupnea, Bradypnea, Tachypnea, Apnea };

inline const char* to_string(BreathPattern p) {
    switch (p) {
        case BreathPattern::Eupnea: return "Eupnea";
        case BreathPattern::Bradypnea: return "Bradypnea";
        case BreathPattern::Tachypnea: return "Tachypnea";
        case BreathPattern::Apnea: return "Apnea";
    }
    return "?";
}

inline std::optional<BreathPattern> pattern_from_string(const std::string& s) {
    if (s == "Eupnea") return BreathPattern::Eupnea;
    if (s == "Bradypnea") return BreathPattern::Bradypnea;
    if (s == "Tachypnea") return BreathPattern::Tachypnea;
    if (s == "Apnea") return BreathPattern::Apnea;
    return std::nullopt;
}

/// Class boundaries for the four breathing patterns. The rate boundaries
/// follow adult clinical norms; the apnea gate is amplitude + SNR based
/// because spectral estimators on near-silent signals return noise peaks.
struct PatternThresholds {
    double brady_max_bpm = 12.0;
    double tachy_min_bpm = 20.0;
    double apnea_rms_c = 0.03;
    double apnea_min_snr = 2.0;

    std::string validate() const {
        if (!(brady_max_bpm > 0.0)) return "brady_max_bpm must be positive";
        if (!(brady_max_bpm < tachy_min_bpm)) return "brady_max_bpm must be below tachy_min_bpm";
        if (!(apnea_rms_c >= 0.0)) return "apnea_rms_c must be non-negative";
        if (!(apnea_min_snr >= 0.0)) return "apnea_min_snr must be non-negative";
        return {};
    }
};

struct RateOptions {
    double band_low_hz = 0.1;
    double band_high_hz = 0.85;
    double peak_min_separation_s = 60.0 / 40.0;
    double peak_min_prominence_c = 0.05;
    size_t zero_pad_to = 4096;
};

/// Output of the dual-route rate estimator.
struct RateEstimate {
    double rate_spectral_bpm = 0.0;
    double rate_timedomain_bpm = 0.0;
    double fused_bpm = 0.0;
    double confidence = 0.0;
    double snr = 0.0;
};

struct RespirationEstimate {
    double rate_bpm = 0.0;  // 0 exactly when pattern == Apnea
    BreathPattern pattern = BreathPattern::Apnea;
    double confidence = 0.0;
    double rate_spectral_bpm = 0.0;
    double rate_timedomain_bpm = 0.0;
};

// Routes agreeing within the raw 15 s FFT resolution count as consistent;
// on disagreement the spectral route wins only when its SNR is solid.
inline constexpr double kRateAgreementBpm = 4.0;
inline constexpr double kSpectralTrustSnr = 4.0;
inline constexpr double kMinSignalSeconds = 10.0;

/**
 * Spectral and time-domain respiratory rate from a detrended, band-passed
 * signal of at least 10 seconds.
 */
inline RateEstimate estimate_rate(const BreathSignal& sig, const RateOptions& opt = {}) {
    if (sig.duration_seconds() < kMinSignalSeconds)
        throw std::invalid_argument("estimate_rate: signal too short (< 10 s)");

    const Spectrum spec = periodogram(sig, opt.zero_pad_to);
    const DominantFrequency dom = dominant_frequency(spec, opt.band_low_hz, opt.band_high_hz);
    const size_t peaks = count_peaks(sig, opt.peak_min_separation_s, opt.peak_min_prominence_c);

    RateEstimate est;
    est.snr = dom.snr;
    est.rate_spectral_bpm = 60.0 * dom.frequency_hz;
    est.rate_timedomain_bpm = 60.0 * static_cast<double>(peaks) / sig.duration_seconds();
    const bool agree =
        std::abs(est.rate_spectral_bpm - est.rate_timedomain_bpm) <= kRateAgreementBpm;
    if (agree || dom.snr >= kSpectralTrustSnr)
        est.fused_bpm = est.rate_spectral_bpm;
    else
        est.fused_bpm = est.rate_timedomain_bpm;
    est.confidence = std::min(1.0, dom.snr / 10.0) * (agree ? 1.0 : 0.5);
    return est;
}

/**
 * Apnea when the band-limited RMS or the spectral SNR collapses; otherwise
 * the fused rate picks the class.
 */
inline BreathPattern classify_pattern(const BreathSignal& sig, const RateEstimate& rates,
                                      const PatternThresholds& th = {}) {
    if (rms(sig) < th.apnea_rms_c || rates.snr < th.apnea_min_snr) return BreathPattern::Apnea;
    if (rates.fused_bpm < th.brady_max_bpm) return BreathPattern::Bradypnea;
    if (rates.fused_bpm <= th.tachy_min_bpm) return BreathPattern::Eupnea;
    return BreathPattern::Tachypnea;
}

/// Rate estimation plus pattern classification in one step.
inline RespirationEstimate estimate_respiration(const BreathSignal& sig,
                                                const RateOptions& opt = {},
                                                const PatternThresholds& th = {}) {
    const RateEstimate rates = estimate_rate(sig, opt);
    const BreathPattern pattern = classify_pattern(sig, rates, th);
    RespirationEstimate out;
    out.pattern = pattern;
    out.rate_bpm = pattern == BreathPattern::Apnea ? 0.0 : rates.fused_bpm;
    out.confidence = rates.confidence;
    out.rate_spectral_bpm = rates.rate_spectral_bpm;
    out.rate_timedomain_bpm = rates.rate_timedomain_bpm;
    return out;
}

}  // namespace respiscreen
