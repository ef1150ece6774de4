#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace respiscreen {

/**
 * Linear count -> Celsius map. Radiometric sensors export raw counts plus
 * a conversion; a slope/offset pair is the self-describing form of it.
 */
struct Calibration {
    double slope_c_per_count = 0.01;
    double offset_c = 0.0;

    bool valid() const {
        return std::isfinite(slope_c_per_count) && std::isfinite(offset_c) &&
               slope_c_per_count > 0.0;
    }

    double to_celsius(uint16_t count) const {
        return slope_c_per_count * static_cast<double>(count) + offset_c;
    }

    // Inverse map, rounded and clamped to the representable count range.
    uint16_t to_count(double celsius) const {
        const double c = std::round((celsius - offset_c) / slope_c_per_count);
        if (!(c > 0.0)) return 0;
        if (c >= 65535.0) return 65535;
        return static_cast<uint16_t>(c);
    }
};

/// One raw sensor frame. `counts` is row-major, width*height entries.
struct RadiometricFrame {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<uint16_t> counts;
    uint64_t timestamp_micros = 0;  // since clip start

    bool valid() const {
        return width > 0 && height > 0 &&
               counts.size() == static_cast<size_t>(width) * height;
    }
};

/// Calibrated frame, degrees Celsius, row-major.
struct CelsiusFrame {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<double> temps;

    double at(uint32_t x, uint32_t y) const {
        return temps[static_cast<size_t>(y) * width + x];
    }
    double& at(uint32_t x, uint32_t y) {
        return temps[static_cast<size_t>(y) * width + x];
    }
};

/// Axis-aligned pixel rectangle, top-left anchored, half-open on the
/// right/bottom edge.
struct Rect {
    int32_t x = 0;
    int32_t y = 0;
    int32_t w = 0;
    int32_t h = 0;

    int32_t right() const { return x + w; }
    int32_t bottom() const { return y + h; }
    double center_x() const { return x + w / 2.0; }
    double center_y() const { return y + h / 2.0; }
    int64_t area() const { return static_cast<int64_t>(w) * h; }

    bool valid() const { return x >= 0 && y >= 0 && w > 0 && h > 0; }
    bool within(uint32_t frame_w, uint32_t frame_h) const {
        return valid() && right() <= static_cast<int32_t>(frame_w) &&
               bottom() <= static_cast<int32_t>(frame_h);
    }
    bool operator==(const Rect&) const = default;
};

inline double iou(const Rect& a, const Rect& b) {
    const int32_t ix = std::max(a.x, b.x);
    const int32_t iy = std::max(a.y, b.y);
    const int32_t ir = std::min(a.right(), b.right());
    const int32_t ib = std::min(a.bottom(), b.bottom());
    if (ir <= ix || ib <= iy) return 0.0;
    const double inter = static_cast<double>(ir - ix) * (ib - iy);
    return inter / (static_cast<double>(a.area()) + b.area() - inter);
}

/**
 * An ordered sequence of raw frames with a shared geometry, nominal frame
 * rate and calibration. Per-frame timestamps are stored, not derived, so
 * dropped-frame recordings stay representable; nominal uniformity is a
 * property that can be checked, not an assumption.
 */
struct RadiometricClip {
    uint32_t width = 0;
    uint32_t height = 0;
    double fps = 0.0;
    Calibration calibration;
    std::vector<RadiometricFrame> frames;

    double duration_seconds() const {
        return fps > 0.0 ? static_cast<double>(frames.size()) / fps : 0.0;
    }

    /**
     * Returns an empty string when well-formed, otherwise a message naming
     * the offending field. With `check_uniformity` every timestamp must sit
     * within half a frame period of its nominal i/fps slot.
     */
    std::string validate(bool check_uniformity = true) const {
        if (width == 0 || height == 0) return "width/height must be positive";
        if (!(std::isfinite(fps) && fps > 0.0)) return "fps must be positive";
        if (!calibration.valid()) return "calibration slope must be positive and finite";
        const size_t px = static_cast<size_t>(width) * height;
        for (size_t i = 0; i < frames.size(); ++i) {
            const RadiometricFrame& f = frames[i];
            if (f.width != width || f.height != height)
                return "frame " + std::to_string(i) + " dimensions differ from clip";
            if (f.counts.size() != px)
                return "frame " + std::to_string(i) + " counts length != width*height";
            if (i > 0 && f.timestamp_micros <= frames[i - 1].timestamp_micros)
                return "timestamps not strictly increasing at frame " + std::to_string(i);
            if (check_uniformity) {
                const double nominal = static_cast<double>(i) * 1e6 / fps;
                if (std::abs(static_cast<double>(f.timestamp_micros) - nominal) > 1e6 / (2.0 * fps))
                    return "timestamp " + std::to_string(i) + " deviates from nominal uniform sampling";
            }
        }
        return {};
    }
};

/// Applies the linear calibration to every pixel.
inline CelsiusFrame calibrate(const RadiometricFrame& frame, const Calibration& cal) {
    CelsiusFrame out;
    out.width = frame.width;
    out.height = frame.height;
    out.temps.resize(frame.counts.size());
    for (size_t i = 0; i < frame.counts.size(); ++i)
        out.temps[i] = cal.to_celsius(frame.counts[i]);
    return out;
}

/// Calibrates every frame of a clip.
inline std::vector<CelsiusFrame> calibrate_all(const RadiometricClip& clip) {
    std::vector<CelsiusFrame> out;
    out.reserve(clip.frames.size());
    for (const RadiometricFrame& f : clip.frames) out.push_back(calibrate(f, clip.calibration));
    return out;
}

/// Extracts the sub-window `r` of a frame, row-major.
inline CelsiusFrame crop(const CelsiusFrame& frame, const Rect& r) {
    if (!r.within(frame.width, frame.height))
        throw std::out_of_range("crop: rect out of frame bounds");
    CelsiusFrame out;
    out.width = static_cast<uint32_t>(r.w);
    out.height = static_cast<uint32_t>(r.h);
    out.temps.resize(static_cast<size_t>(r.w) * r.h);
    for (int32_t row = 0; row < r.h; ++row) {
        const double* src = &frame.temps[static_cast<size_t>(r.y + row) * frame.width + r.x];
        std::copy(src, src + r.w, &out.temps[static_cast<size_t>(row) * r.w]);
    }
    return out;
}

}  // namespace respiscreen
