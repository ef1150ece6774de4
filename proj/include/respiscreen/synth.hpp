#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "respiscreen/respiration.hpp"
#include "respiscreen/rng.hpp"
#include "respiscreen/thermal.hpp"

namespace respiscreen {

struct ApneaWindow {
    double start_s = 0.0;
    double end_s = 0.0;
};

/**
 * Parameters of a synthetic masked-face recording: an elliptical warm face
 * on a cool background, a hot forehead patch, and a nostril/mask patch
 * whose temperature rides the breathing waveform. Exhalation warms the
 * patch (exhaled air is warmer than a resting mask surface).
 */
struct Scenario {
    double duration_s = 15.0;
    double fps = 8.7;
    uint32_t width = 160;
    uint32_t height = 120;
    double face_center_x = 80.0;
    double face_center_y = 60.0;
    double face_axis_x = 39.0;  // semi-axis, px
    double face_axis_y = 51.0;
    double forehead_temp_c = 36.6;
    double face_temp_c = 34.5;
    double background_temp_c = 24.0;
    double nostril_baseline_c = 33.0;
    double breath_amplitude_c = 0.4;
    double breath_rate_bpm = 15.0;
    double waveform_asymmetry = 0.5;  // exhale fraction of each cycle
    std::vector<ApneaWindow> apnea_windows;
    double drift_c_per_s = 0.0;
    double noise_sigma_c = 0.0;
    double sway_amplitude_px = 0.0;
    double sway_period_s = 4.0;
    uint64_t seed = 0;
    double cal_slope = 0.01;
    double cal_offset = 0.0;

    size_t frame_count() const {
        return static_cast<size_t>(std::floor(duration_s * fps + 1e-9));
    }
};

/// Per-frame oracle emitted alongside every rendered clip.
struct GroundTruth {
    std::vector<Rect> forehead_rects;
    std::vector<Rect> nostril_rects;
    double true_rate_bpm = 0.0;
    BreathPattern true_pattern = BreathPattern::Apnea;
    std::vector<double> breath_waveform;  // [-1, 1], 0 during apnea
};

struct RenderResult {
    RadiometricClip clip;
    GroundTruth truth;
};

namespace detail {

/// Forehead patch: horizontally centered, in the upper part of the face
/// ellipse. Nostril patch: horizontally centered, below the face center.
/// Sizes match what the detectors search for on the ellipse bounding box.
inline Rect base_forehead_rect(const Scenario& s) {
    const int w = std::max(1, static_cast<int>(std::llround(s.face_axis_x)));
    const int h = std::max(1, static_cast<int>(std::llround(s.face_axis_y / 3.0)));
    const int x = static_cast<int>(std::llround(s.face_center_x - w / 2.0));
    const int y = static_cast<int>(std::llround(s.face_center_y - s.face_axis_y + s.face_axis_y / 6.0));
    return Rect{x, y, w, h};
}

inline Rect base_nostril_rect(const Scenario& s) {
    const int w = std::max(1, static_cast<int>(std::llround(2.0 * s.face_axis_x / 3.0)));
    const int h = std::max(1, static_cast<int>(std::llround(s.face_axis_y / 3.0)));
    const int x = static_cast<int>(std::llround(s.face_center_x - w / 2.0));
    const int y = static_cast<int>(std::llround(s.face_center_y + s.face_axis_y / 3.0));
    return Rect{x, y, w, h};
}

inline bool rect_inside_ellipse(const Rect& r, double cx, double cy, double ax, double ay) {
    for (int corner = 0; corner < 4; ++corner) {
        const double x = corner % 2 == 0 ? r.x : r.right() - 1;
        const double y = corner < 2 ? r.y : r.bottom() - 1;
        const double dx = (x - cx) / ax;
        const double dy = (y - cy) / ay;
        if (dx * dx + dy * dy > 1.0) return false;
    }
    return true;
}

}  // namespace detail

/// Returns an empty string when valid, otherwise a message naming the field.
inline std::string validate_scenario(const Scenario& s) {
    if (!(s.duration_s > 0.0) || !std::isfinite(s.duration_s)) return "duration must be positive";
    if (!(s.fps > 0.0) || !std::isfinite(s.fps)) return "fps must be positive";
    if (s.duration_s * s.fps < 2.0) return "duration*fps must be at least 2 frames";
    if (s.width == 0 || s.width > 65535) return "width must be in [1, 65535]";
    if (s.height == 0 || s.height > 65535) return "height must be in [1, 65535]";
    if (!(s.face_axis_x >= 6.0)) return "face_axis_x must be at least 6 px";
    if (!(s.face_axis_y >= 9.0)) return "face_axis_y must be at least 9 px";
    if (!(s.sway_amplitude_px >= 0.0)) return "sway_amplitude must be non-negative";
    if (!(s.sway_period_s > 0.0)) return "sway_period must be positive";
    const double margin = s.sway_amplitude_px;
    if (s.face_center_x - s.face_axis_x - margin < 0.0 ||
        s.face_center_x + s.face_axis_x + margin > static_cast<double>(s.width))
        return "face ellipse (plus sway) must lie within the frame horizontally";
    if (s.face_center_y - s.face_axis_y < 0.0 ||
        s.face_center_y + s.face_axis_y > static_cast<double>(s.height))
        return "face ellipse must lie within the frame vertically";
    if (!(s.breath_amplitude_c >= 0.0)) return "breath_amplitude must be non-negative";
    if (!(s.breath_rate_bpm > 0.0)) return "breath_rate must be positive";
    if (!(s.waveform_asymmetry > 0.0 && s.waveform_asymmetry < 1.0))
        return "waveform_asymmetry must lie in (0, 1)";
    if (!(s.noise_sigma_c >= 0.0)) return "noise_sigma must be non-negative";
    if (!std::isfinite(s.drift_c_per_s)) return "drift must be finite";
    if (!(s.cal_slope > 0.0) || !std::isfinite(s.cal_slope)) return "cal_slope must be positive";
    if (!std::isfinite(s.cal_offset)) return "cal_offset must be finite";
    double prev_end = -1.0;
    for (size_t i = 0; i < s.apnea_windows.size(); ++i) {
        const ApneaWindow& w = s.apnea_windows[i];
        if (!(w.start_s >= 0.0 && w.end_s > w.start_s && w.end_s <= s.duration_s))
            return "apnea_windows[" + std::to_string(i) + "] must satisfy 0 <= start < end <= duration";
        if (w.start_s < prev_end)
            return "apnea_windows must be non-overlapping and sorted";
        prev_end = w.end_s;
    }
    if (!detail::rect_inside_ellipse(detail::base_forehead_rect(s), s.face_center_x,
                                     s.face_center_y, s.face_axis_x, s.face_axis_y))
        return "face axes too eccentric: forehead patch leaves the ellipse";
    if (!detail::rect_inside_ellipse(detail::base_nostril_rect(s), s.face_center_x,
                                     s.face_center_y, s.face_axis_x, s.face_axis_y))
        return "face axes too eccentric: nostril patch leaves the ellipse";
    return {};
}

/**
 * Normalized breathing waveform at cycle phase in [0, 1): a half-sine
 * exhale lobe over the first `exhale_fraction` of the cycle, a half-sine
 * inhale lobe over the rest. At exhale_fraction 0.5 this is exactly
 * sin(2*pi*phase).
 */
inline double breath_waveform(double phase01, double exhale_fraction) {
    const double a = exhale_fraction;
    const double theta = phase01 < a
                             ? std::numbers::pi * phase01 / a
                             : std::numbers::pi * (1.0 + (phase01 - a) / (1.0 - a));
    return std::sin(theta);
}

/**
 * Renders the scenario into a radiometric clip plus its ground truth.
 * Output is a pure function of the scenario (including seed).
 */
inline RenderResult render(const Scenario& s) {
    if (std::string msg = validate_scenario(s); !msg.empty())
        throw std::invalid_argument("scenario: " + msg);

    const size_t n = s.frame_count();
    const Calibration cal{s.cal_slope, s.cal_offset};
    const Rect fore0 = detail::base_forehead_rect(s);
    const Rect nose0 = detail::base_nostril_rect(s);

    RenderResult out;
    out.clip.width = s.width;
    out.clip.height = s.height;
    out.clip.fps = s.fps;
    out.clip.calibration = cal;
    out.clip.frames.resize(n);
    out.truth.forehead_rects.reserve(n);
    out.truth.nostril_rects.reserve(n);
    out.truth.breath_waveform.reserve(n);

    const size_t px_count = static_cast<size_t>(s.width) * s.height;
    bool any_breath = false;
    for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / s.fps;
        bool in_apnea = false;
        for (const ApneaWindow& w : s.apnea_windows)
            if (t >= w.start_s && t <= w.end_s) in_apnea = true;
        const double phase = t * s.breath_rate_bpm / 60.0;
        const double w_t =
            in_apnea ? 0.0 : breath_waveform(phase - std::floor(phase), s.waveform_asymmetry);
        if (s.breath_amplitude_c > 0.0 && w_t != 0.0) any_breath = true;

        const int dx =
            s.sway_amplitude_px == 0.0
                ? 0
                : static_cast<int>(std::llround(s.sway_amplitude_px *
                                                std::sin(2.0 * std::numbers::pi * t / s.sway_period_s)));
        const double cx = s.face_center_x + dx;
        const Rect fore{fore0.x + dx, fore0.y, fore0.w, fore0.h};
        const Rect nose{nose0.x + dx, nose0.y, nose0.w, nose0.h};
        const double nostril_temp =
            s.nostril_baseline_c + s.breath_amplitude_c * w_t + s.drift_c_per_s * t;

        RadiometricFrame& frame = out.clip.frames[i];
        frame.width = s.width;
        frame.height = s.height;
        frame.timestamp_micros = static_cast<uint64_t>(std::llround(t * 1e6));
        frame.counts.resize(px_count);
        size_t p = 0;
        for (uint32_t y = 0; y < s.height; ++y) {
            for (uint32_t x = 0; x < s.width; ++x, ++p) {
                const double ex = (static_cast<double>(x) - cx) / s.face_axis_x;
                const double ey = (static_cast<double>(y) - s.face_center_y) / s.face_axis_y;
                double temp = s.background_temp_c;
                if (ex * ex + ey * ey <= 1.0) {
                    temp = s.face_temp_c;
                    const int ix = static_cast<int>(x), iy = static_cast<int>(y);
                    if (ix >= fore.x && ix < fore.right() && iy >= fore.y && iy < fore.bottom())
                        temp = s.forehead_temp_c;
                    else if (ix >= nose.x && ix < nose.right() && iy >= nose.y && iy < nose.bottom())
                        temp = nostril_temp;
                }
                if (s.noise_sigma_c > 0.0)
                    temp += s.noise_sigma_c * rng::gaussian(s.seed, i, p);
                frame.counts[p] = cal.to_count(temp);
            }
        }
        out.truth.forehead_rects.push_back(fore);
        out.truth.nostril_rects.push_back(nose);
        out.truth.breath_waveform.push_back(w_t);
    }

    if (!any_breath || s.breath_amplitude_c == 0.0) {
        out.truth.true_pattern = BreathPattern::Apnea;
        out.truth.true_rate_bpm = 0.0;
    } else {
        const PatternThresholds th;
        out.truth.true_rate_bpm = s.breath_rate_bpm;
        if (s.breath_rate_bpm < th.brady_max_bpm)
            out.truth.true_pattern = BreathPattern::Bradypnea;
        else if (s.breath_rate_bpm <= th.tachy_min_bpm)
            out.truth.true_pattern = BreathPattern::Eupnea;
        else
            out.truth.true_pattern = BreathPattern::Tachypnea;
    }
    return out;
}

}  // namespace respiscreen
