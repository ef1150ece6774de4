#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "respiscreen/dsp.hpp"
#include "respiscreen/respiration.hpp"
#include "respiscreen/roi.hpp"
#include "respiscreen/screening.hpp"
#include "respiscreen/thermal.hpp"

namespace respiscreen {

/// Every tunable of the analysis chain, with its default.
struct PipelineConfig {
    double band_low_hz = 0.1;
    double band_high_hz = 0.85;
    PatternThresholds thresholds;
    ScreeningRules rules;
    double probe_seconds = 5.0;
    int search_radius_px = 8;
    double window_seconds = 15.0;
    double peak_min_separation_s = 60.0 / 40.0;
    double peak_min_prominence_c = 0.05;

    std::string validate() const {
        if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz))
            return "band_low_hz must satisfy 0 < low < high";
        if (std::string msg = thresholds.validate(); !msg.empty()) return msg;
        if (std::string msg = rules.validate(); !msg.empty()) return msg;
        if (!(probe_seconds > 0.0)) return "probe_seconds must be positive";
        if (search_radius_px < 0) return "search_radius_px must be non-negative";
        if (!(window_seconds >= 10.0)) return "window_seconds must be at least 10";
        if (!(peak_min_separation_s > 0.0)) return "peak_min_separation_s must be positive";
        if (!(peak_min_prominence_c >= 0.0)) return "peak_min_prominence_c must be non-negative";
        return {};
    }

    RateOptions rate_options() const {
        return RateOptions{band_low_hz, band_high_hz, peak_min_separation_s,
                           peak_min_prominence_c, 4096};
    }
};

struct AnalyzeOptions {
    std::optional<Rect> forehead_override;
    std::optional<Rect> nostril_override;
    // Diagnostic mode: fall back to geometric default regions instead of
    // failing when detection finds nothing (used by the plot command).
    bool lenient_roi = false;
};

/// Everything the analysis produced, for reporting and plotting.
struct AnalysisResult {
    Rect face;
    RoiTrack forehead_track;
    RoiTrack nostril_track;
    BreathSignal raw_signal;
    BreathSignal filtered_signal;
    Spectrum spectrum;
    DominantFrequency dominant;
    TemperatureEstimate temperature;
    RespirationEstimate respiration;
    ScreeningReport report;
    size_t window_first_frame = 0;
};

namespace detail {

inline Rect default_nostril_rect(const Rect& face) {
    const int w = std::max(1, face.w / 3);
    const int h = std::max(1, face.h / 6);
    return Rect{face.x + (face.w - w) / 2, face.y + face.h / 2 + (face.h / 2 - h) / 2, w, h};
}

}  // namespace detail

/**
 * Full analysis over the trailing window of a clip:
 * detect -> track -> signal -> respiration -> temperature -> screen.
 */
inline AnalysisResult analyze_clip(const RadiometricClip& clip, const PipelineConfig& cfg = {},
                                   const AnalyzeOptions& opts = {}) {
    if (std::string msg = cfg.validate(); !msg.empty())
        throw std::invalid_argument("config: " + msg);
    if (std::string msg = clip.validate(false); !msg.empty())
        throw std::invalid_argument("clip: " + msg);
    if (clip.frames.empty()) throw std::invalid_argument("clip: no frames to analyze");

    AnalysisResult res;
    const size_t n = clip.frames.size();
    const size_t want =
        std::max<size_t>(2, static_cast<size_t>(std::floor(cfg.window_seconds * clip.fps + 1e-9)));
    const size_t k = std::min(n, want);
    res.window_first_frame = n - k;

    std::vector<CelsiusFrame> frames;
    frames.reserve(k);
    for (size_t i = n - k; i < n; ++i)
        frames.push_back(calibrate(clip.frames[i], clip.calibration));
    const double t0 = static_cast<double>(clip.frames[n - k].timestamp_micros) / 1e6;

    try {
        res.face = detect_face(frames[0]);
    } catch (const NoFaceFound&) {
        if (!opts.lenient_roi) throw;
        res.face = Rect{0, 0, static_cast<int32_t>(clip.width), static_cast<int32_t>(clip.height)};
    }

    const Rect forehead =
        opts.forehead_override ? *opts.forehead_override : detect_forehead(frames[0], res.face);
    Rect nostril;
    if (opts.nostril_override) {
        nostril = *opts.nostril_override;
    } else {
        try {
            nostril = detect_nostril(frames, clip.fps, res.face, cfg.probe_seconds,
                                     cfg.band_low_hz, cfg.band_high_hz, cfg.search_radius_px);
        } catch (const NoBreathingRegion&) {
            if (!opts.lenient_roi) throw;
            nostril = detail::default_nostril_rect(res.face);
        }
    }

    res.forehead_track = track(frames, forehead, RoiRegion::Forehead, cfg.search_radius_px);
    res.nostril_track = track(frames, nostril, RoiRegion::Nostril, cfg.search_radius_px);

    res.raw_signal = roi_mean_series(frames, clip.fps, res.nostril_track.rects, t0);
    res.filtered_signal = bandpass(detrend(res.raw_signal), cfg.band_low_hz, cfg.band_high_hz);

    const RateOptions ropt = cfg.rate_options();
    res.spectrum = periodogram(res.filtered_signal, ropt.zero_pad_to);
    res.dominant = dominant_frequency(res.spectrum, ropt.band_low_hz, ropt.band_high_hz);

    const RateEstimate rates = estimate_rate(res.filtered_signal, ropt);
    const BreathPattern pattern = classify_pattern(res.filtered_signal, rates, cfg.thresholds);
    res.respiration.pattern = pattern;
    res.respiration.rate_bpm = pattern == BreathPattern::Apnea ? 0.0 : rates.fused_bpm;
    res.respiration.confidence = rates.confidence;
    res.respiration.rate_spectral_bpm = rates.rate_spectral_bpm;
    res.respiration.rate_timedomain_bpm = rates.rate_timedomain_bpm;

    res.temperature = estimate_body_temp(frames, res.forehead_track.rects);
    res.report = screen(res.temperature, res.respiration, cfg.rules,
                        static_cast<double>(k) / clip.fps);
    return res;
}

}  // namespace respiscreen
