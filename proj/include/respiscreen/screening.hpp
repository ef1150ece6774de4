#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "respiscreen/respiration.hpp"
#include "respiscreen/roi.hpp"
#include "respiscreen/thermal.hpp"

namespace respiscreen {

/// Forehead-derived body temperature. Values outside the [25, 45] degC
/// sanity band are flagged implausible rather than clamped.
struct TemperatureEstimate {
    double body_temp_c = 0.0;
    std::vector<double> per_frame_p95_c;
    std::string method = "forehead_p95_median";
    bool plausible = false;
};

struct ScreeningRules {
    double fever_threshold_c = 37.3;
    // Forehead skin underestimates core temperature; this offset is added
    // before the fever comparison.
    double skin_to_core_offset_c = 0.0;
    bool require_eupnea = true;
    double rate_hard_max_bpm = 30.0;
    double rate_hard_min_bpm = 6.0;
    double min_confidence = 0.3;

    std::string validate() const {
        if (!(fever_threshold_c > 35.0 && fever_threshold_c < 42.0))
            return "fever_threshold_c must lie in (35, 42)";
        if (!(rate_hard_min_bpm < rate_hard_max_bpm))
            return "rate_hard_min_bpm must be below rate_hard_max_bpm";
        if (!(min_confidence >= 0.0 && min_confidence <= 1.0))
            return "min_confidence must lie in [0, 1]";
        return {};
    }
};

enum class Decision { Pass, Alert, Inconclusive };

inline const char* to_string(Decision d) {
    switch (d) {
        case Decision::Pass: return "Pass";
        case Decision::Alert: return "Alert";
        case Decision::Inconclusive: return "Inconclusive";
    }
    return "?";
}

enum class ReasonCode { Fever, AbnormalPattern, RateOutOfRange, LowConfidence };

inline const char* to_string(ReasonCode r) {
    switch (r) {
        case ReasonCode::Fever: return "FEVER";
        case ReasonCode::AbnormalPattern: return "ABNORMAL_PATTERN";
        case ReasonCode::RateOutOfRange: return "RATE_OUT_OF_RANGE";
        case ReasonCode::LowConfidence: return "LOW_CONFIDENCE";
    }
    return "?";
}

struct ScreeningReport {
    double body_temp_c = 0.0;
    RespirationEstimate respiration;
    Decision decision = Decision::Inconclusive;
    std::vector<ReasonCode> reasons;
    double window_seconds = 0.0;
};

/**
 * Nearest-rank percentile reaching into the upper tail: rank
 * floor(p*n) + 1 (1-based) of the ascending sample, clamped to n. For
 * p = 0.95 and n = 100 this is the 96th value, so the hottest 5% decide.
 */
inline double nearest_rank_percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile of empty sample");
    const size_t n = values.size();
    size_t idx = static_cast<size_t>(std::floor(p * static_cast<double>(n) + 1e-12));
    idx = std::min(idx, n - 1);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx),
                     values.end());
    return values[idx];
}

inline double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty sample");
    const size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        const double lo = *std::max_element(values.begin(),
                                            values.begin() + static_cast<std::ptrdiff_t>(mid));
        m = (m + lo) / 2.0;
    }
    return m;
}

/**
 * Per frame, the 95th-percentile forehead temperature; the body estimate is
 * the median of those values. Percentile-then-median is robust against
 * both hot pixels and single bad frames.
 */
inline TemperatureEstimate estimate_body_temp(const std::vector<CelsiusFrame>& frames,
                                              const std::vector<Rect>& rects) {
    if (frames.empty() || rects.size() != frames.size())
        throw std::invalid_argument("estimate_body_temp: track does not cover the clip");
    TemperatureEstimate est;
    est.per_frame_p95_c.reserve(frames.size());
    std::vector<double> roi;
    for (size_t i = 0; i < frames.size(); ++i) {
        const CelsiusFrame& f = frames[i];
        const Rect& r = rects[i];
        if (!r.within(f.width, f.height))
            throw std::out_of_range("estimate_body_temp: rect outside frame");
        roi.clear();
        roi.reserve(static_cast<size_t>(r.area()));
        for (int32_t y = r.y; y < r.bottom(); ++y)
            for (int32_t x = r.x; x < r.right(); ++x)
                roi.push_back(f.at(static_cast<uint32_t>(x), static_cast<uint32_t>(y)));
        est.per_frame_p95_c.push_back(nearest_rank_percentile(roi, 0.95));
    }
    est.body_temp_c = median(est.per_frame_p95_c);
    est.plausible = est.body_temp_c >= 25.0 && est.body_temp_c <= 45.0;
    return est;
}

inline TemperatureEstimate estimate_body_temp(const RadiometricClip& clip,
                                              const RoiTrack& forehead) {
    return estimate_body_temp(calibrate_all(clip), forehead.rects);
}

/**
 * Rule-based screening decision. Alert reasons accumulate; low confidence
 * alone yields Inconclusive because a failed measurement is not an
 * abnormal finding.
 */
inline ScreeningReport screen(const TemperatureEstimate& temp, const RespirationEstimate& resp,
                              const ScreeningRules& rules = {}, double window_seconds = 15.0) {
    if (std::string msg = rules.validate(); !msg.empty())
        throw std::invalid_argument("screen: " + msg);
    ScreeningReport rep;
    rep.body_temp_c = temp.body_temp_c;
    rep.respiration = resp;
    rep.window_seconds = window_seconds;

    if (temp.body_temp_c + rules.skin_to_core_offset_c >= rules.fever_threshold_c)
        rep.reasons.push_back(ReasonCode::Fever);
    if (rules.require_eupnea && resp.pattern != BreathPattern::Eupnea)
        rep.reasons.push_back(ReasonCode::AbnormalPattern);
    if (resp.pattern != BreathPattern::Apnea &&
        (resp.rate_bpm < rules.rate_hard_min_bpm || resp.rate_bpm > rules.rate_hard_max_bpm))
        rep.reasons.push_back(ReasonCode::RateOutOfRange);
    if (rep.reasons.empty() && resp.confidence < rules.min_confidence)
        rep.reasons.push_back(ReasonCode::LowConfidence);

    if (rep.reasons.empty())
        rep.decision = Decision::Pass;
    else if (rep.reasons.size() == 1 && rep.reasons[0] == ReasonCode::LowConfidence)
        rep.decision = Decision::Inconclusive;
    else
        rep.decision = Decision::Alert;
    return rep;
}

/// One-line human summary, e.g. for terminals and logs.
inline std::string summary_line(const ScreeningReport& rep) {
    char buf[256];
    std::string reasons;
    for (ReasonCode r : rep.reasons) {
        if (!reasons.empty()) reasons += ",";
        reasons += to_string(r);
    }
    std::snprintf(buf, sizeof(buf), "%s: body %.2f C, %.1f bpm %s (conf %.2f)%s%s",
                  to_string(rep.decision), rep.body_temp_c, rep.respiration.rate_bpm,
                  to_string(rep.respiration.pattern), rep.respiration.confidence,
                  reasons.empty() ? "" : " - ", reasons.c_str());
    return buf;
}

}  // namespace respiscreen
