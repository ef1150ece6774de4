#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "respiscreen/dsp.hpp"
#include "respiscreen/thermal.hpp"

namespace respiscreen {

enum class RoiRegion { Forehead, Nostril };

inline const char* to_string(RoiRegion r) {
    return r == RoiRegion::Forehead ? "forehead" : "nostril";
}

/// Per-frame rectangle plus match quality for one named region.
struct RoiTrack {
    RoiRegion region = RoiRegion::Forehead;
    std::vector<Rect> rects;
    std::vector<double> quality;  // ZNCC clamped to [0,1]
};

struct NoFaceFound : std::runtime_error {
    explicit NoFaceFound(const std::string& what) : std::runtime_error("NO_FACE_FOUND: " + what) {}
};
struct NoBreathingRegion : std::runtime_error {
    explicit NoBreathingRegion(const std::string& what)
        : std::runtime_error("NO_BREATHING_REGION: " + what) {}
};

// Tunables fixed by contract rather than configuration.
inline constexpr double kMinFaceAreaFraction = 0.02;
inline constexpr double kCoastQuality = 0.4;         // below this the tracker coasts
inline constexpr double kNostrilVarianceFloor = 1e-6;  // degC^2, mean over the window
inline constexpr int kTrackContextMarginPx = 4;       // matching window grows by this

namespace detail {

/// Otsu threshold over a 256-bin histogram of the frame; returns the bin
/// index separating background from foreground. Requires spread > 0.
inline int otsu_bin(const CelsiusFrame& f, double vmin, double vmax) {
    constexpr int kBins = 256;
    const double scale = kBins / (vmax - vmin);
    std::vector<uint32_t> hist(kBins, 0);
    for (double v : f.temps) {
        int b = static_cast<int>((v - vmin) * scale);
        hist[std::clamp(b, 0, kBins - 1)]++;
    }
    const double total = static_cast<double>(f.temps.size());
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += static_cast<double>(b) * hist[b];

    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    int best_bin = 0;
    for (int t = 0; t < kBins - 1; ++t) {
        w0 += hist[t];
        if (w0 == 0.0) continue;
        const double w1 = total - w0;
        if (w1 == 0.0) break;
        sum0 += static_cast<double>(t) * hist[t];
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_bin = t;
        }
    }
    return best_bin;
}

/// Summed-area table; sat has (w+1)*(h+1) entries, sat[0,*] = sat[*,0] = 0.
inline std::vector<double> summed_area(const CelsiusFrame& f) {
    const size_t w = f.width, h = f.height;
    std::vector<double> sat((w + 1) * (h + 1), 0.0);
    for (size_t y = 0; y < h; ++y) {
        double row = 0.0;
        for (size_t x = 0; x < w; ++x) {
            row += f.temps[y * w + x];
            sat[(y + 1) * (w + 1) + (x + 1)] = sat[y * (w + 1) + (x + 1)] + row;
        }
    }
    return sat;
}

inline double sat_sum(const std::vector<double>& sat, size_t stride, const Rect& r) {
    return sat[static_cast<size_t>(r.bottom()) * stride + r.right()] -
           sat[static_cast<size_t>(r.y) * stride + r.right()] -
           sat[static_cast<size_t>(r.bottom()) * stride + r.x] +
           sat[static_cast<size_t>(r.y) * stride + r.x];
}

}  // namespace detail

/**
 * Bounding box of the largest 4-connected component above an Otsu
 * threshold. The component must cover at least 2% of the frame.
 */
inline Rect detect_face(const CelsiusFrame& frame) {
    if (frame.width == 0 || frame.height == 0 || frame.temps.empty())
        throw std::invalid_argument("detect_face: empty frame");
    const auto [mn_it, mx_it] = std::minmax_element(frame.temps.begin(), frame.temps.end());
    if (*mx_it - *mn_it < 1e-9) throw NoFaceFound("frame has no thermal contrast");

    const int thr_bin = detail::otsu_bin(frame, *mn_it, *mx_it);
    const double scale = 256.0 / (*mx_it - *mn_it);
    const int w = static_cast<int>(frame.width), h = static_cast<int>(frame.height);
    std::vector<uint8_t> fg(frame.temps.size());
    for (size_t i = 0; i < frame.temps.size(); ++i) {
        const int b = std::clamp(static_cast<int>((frame.temps[i] - *mn_it) * scale), 0, 255);
        fg[i] = b > thr_bin ? 1 : 0;
    }

    // largest connected component by pixel count; scan order breaks ties
    std::vector<int32_t> label(frame.temps.size(), -1);
    std::vector<size_t> stack;
    int64_t best_area = 0;
    Rect best{};
    int32_t next_label = 0;
    for (size_t start = 0; start < fg.size(); ++start) {
        if (!fg[start] || label[start] >= 0) continue;
        int64_t area = 0;
        int minx = w, miny = h, maxx = -1, maxy = -1;
        stack.assign(1, start);
        label[start] = next_label;
        while (!stack.empty()) {
            const size_t i = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(i % frame.width);
            const int y = static_cast<int>(i / frame.width);
            ++area;
            minx = std::min(minx, x);
            maxx = std::max(maxx, x);
            miny = std::min(miny, y);
            maxy = std::max(maxy, y);
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int k = 0; k < 4; ++k) {
                if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
                const size_t j = static_cast<size_t>(ny[k]) * frame.width + nx[k];
                if (fg[j] && label[j] < 0) {
                    label[j] = next_label;
                    stack.push_back(j);
                }
            }
        }
        ++next_label;
        if (area > best_area) {
            best_area = area;
            best = Rect{minx, miny, maxx - minx + 1, maxy - miny + 1};
        }
    }
    if (best_area < static_cast<int64_t>(kMinFaceAreaFraction * static_cast<double>(w) * h))
        throw NoFaceFound("largest warm component below area floor");
    return best;
}

/**
 * Hottest (w/2 x h/6) window inside the top third of the face box,
 * exhaustive stride-1 search. Ties resolve leftmost then topmost.
 */
inline Rect detect_forehead(const CelsiusFrame& frame, const Rect& face) {
    if (!face.within(frame.width, frame.height))
        throw std::invalid_argument("detect_forehead: face rect out of bounds");
    if (face.h < 6 || face.w < 2)
        throw std::invalid_argument("detect_forehead: face box too small");
    const int win_w = face.w / 2;
    const int win_h = face.h / 6;
    const int band_h = face.h / 3;

    const std::vector<double> sat = detail::summed_area(frame);
    const size_t stride = frame.width + 1;
    double best = -1e300;
    Rect best_rect{};
    for (int x = face.x; x <= face.right() - win_w; ++x) {
        for (int y = face.y; y <= face.y + band_h - win_h; ++y) {
            const Rect cand{x, y, win_w, win_h};
            const double s = detail::sat_sum(sat, stride, cand);
            if (s > best) {
                best = s;
                best_rect = cand;
            }
        }
    }
    return best_rect;
}

// declared below; the nostril detector anchors motion compensation on it
inline RoiTrack track(const std::vector<CelsiusFrame>& frames, const Rect& initial,
                      RoiRegion region, int search_radius);

/**
 * Finds the (w/3 x h/6) window in the bottom half of the face box whose
 * band-passed per-pixel temperature series has the largest summed temporal
 * variance over the probe window, i.e. the region that breathes the most.
 *
 * The probe series is sampled in motion-compensated coordinates, using the
 * forehead patch as a rigid-translation anchor. Without compensation the
 * silhouette edge of a slightly moving face flickers between background
 * and skin temperature, and that artifact out-varies any breathing signal.
 */
inline Rect detect_nostril(const std::vector<CelsiusFrame>& frames, double fps, const Rect& face,
                           double probe_seconds = 5.0, double band_low_hz = 0.1,
                           double band_high_hz = 0.85, int search_radius = 8) {
    if (frames.empty()) throw std::invalid_argument("detect_nostril: no frames");
    if (!face.within(frames[0].width, frames[0].height))
        throw std::invalid_argument("detect_nostril: face rect out of bounds");
    if (face.h < 6 || face.w < 3)
        throw std::invalid_argument("detect_nostril: face box too small");
    const size_t probe_n =
        std::max<size_t>(8, static_cast<size_t>(std::floor(probe_seconds * fps + 1e-9)));
    if (frames.size() < probe_n)
        throw std::invalid_argument("detect_nostril: clip shorter than probe window");

    const int win_w = face.w / 3;
    const int win_h = face.h / 6;
    const Rect region{face.x, face.y + face.h / 2, face.w, face.h - face.h / 2};

    // per-frame rigid offsets from tracking the forehead over the probe
    std::vector<CelsiusFrame> probe(frames.begin(),
                                    frames.begin() + static_cast<std::ptrdiff_t>(probe_n));
    std::vector<int> off_x(probe_n, 0), off_y(probe_n, 0);
    try {
        const Rect anchor = detect_forehead(frames[0], face);
        const RoiTrack stab = track(probe, anchor, RoiRegion::Forehead, search_radius);
        for (size_t i = 0; i < probe_n; ++i) {
            off_x[i] = stab.rects[i].x - anchor.x;
            off_y[i] = stab.rects[i].y - anchor.y;
        }
    } catch (const std::invalid_argument&) {
        // face box too small for an anchor: proceed without compensation
    }

    const int W = static_cast<int>(frames[0].width), H = static_cast<int>(frames[0].height);

    // temporal variance of the band-passed, stabilized series per pixel
    CelsiusFrame var_map;
    var_map.width = static_cast<uint32_t>(region.w);
    var_map.height = static_cast<uint32_t>(region.h);
    var_map.temps.assign(static_cast<size_t>(region.w) * region.h, 0.0);
    BreathSignal px_series;
    px_series.sample_rate_hz = fps;
    px_series.samples.resize(probe_n);
    for (int ry = 0; ry < region.h; ++ry) {
        for (int rx = 0; rx < region.w; ++rx) {
            for (size_t i = 0; i < probe_n; ++i) {
                const int x = std::clamp(region.x + rx + off_x[i], 0, W - 1);
                const int y = std::clamp(region.y + ry + off_y[i], 0, H - 1);
                px_series.samples[i] =
                    frames[i].at(static_cast<uint32_t>(x), static_cast<uint32_t>(y));
            }
            const BreathSignal bp = bandpass(px_series, band_low_hz, band_high_hz);
            double mean = 0.0;
            for (double v : bp.samples) mean += v;
            mean /= static_cast<double>(probe_n);
            double var = 0.0;
            for (double v : bp.samples) var += (v - mean) * (v - mean);
            var_map.temps[static_cast<size_t>(ry) * region.w + rx] =
                var / static_cast<double>(probe_n);
        }
    }

    const std::vector<double> sat = detail::summed_area(var_map);
    const size_t stride = static_cast<size_t>(region.w) + 1;
    double best = -1.0;
    Rect best_local{};
    for (int x = 0; x <= region.w - win_w; ++x) {
        for (int y = 0; y <= region.h - win_h; ++y) {
            const Rect cand{x, y, win_w, win_h};
            const double s = detail::sat_sum(sat, stride, cand);
            if (s > best) {
                best = s;
                best_local = cand;
            }
        }
    }
    const double mean_var = best / static_cast<double>(win_w * win_h);
    if (mean_var < kNostrilVarianceFloor)
        throw NoBreathingRegion("no periodic temperature variation in the lower face");
    return Rect{region.x + best_local.x, region.y + best_local.y, win_w, win_h};
}

inline Rect detect_nostril(const RadiometricClip& clip, const Rect& face,
                           double probe_seconds = 5.0, double band_low_hz = 0.1,
                           double band_high_hz = 0.85, int search_radius = 8) {
    return detect_nostril(calibrate_all(clip), clip.fps, face, probe_seconds, band_low_hz,
                          band_high_hz, search_radius);
}

namespace detail {

struct TemplatePatch {
    std::vector<double> values;
    int w = 0, h = 0;
    double mean = 0.0;
    double var = 0.0;  // sum of squared deviations
};

inline TemplatePatch make_template(const CelsiusFrame& frame, const Rect& r) {
    TemplatePatch t;
    t.w = r.w;
    t.h = r.h;
    t.values.reserve(static_cast<size_t>(r.w) * r.h);
    for (int y = r.y; y < r.bottom(); ++y)
        for (int x = r.x; x < r.right(); ++x)
            t.values.push_back(frame.at(static_cast<uint32_t>(x), static_cast<uint32_t>(y)));
    for (double v : t.values) t.mean += v;
    t.mean /= static_cast<double>(t.values.size());
    for (double v : t.values) t.var += (v - t.mean) * (v - t.mean);
    return t;
}

/// Zero-normalized cross-correlation of the template against the window of
/// equal size at (r.x, r.y). Two flat patches with equal means score 1.
inline double zncc(const TemplatePatch& t, const CelsiusFrame& frame, int x0, int y0) {
    const size_t n = t.values.size();
    double sum = 0.0, sum2 = 0.0, cross = 0.0;
    size_t i = 0;
    for (int y = 0; y < t.h; ++y) {
        const double* p = &frame.temps[static_cast<size_t>(y0 + y) * frame.width + x0];
        for (int x = 0; x < t.w; ++x, ++i) {
            const double v = p[x];
            sum += v;
            sum2 += v * v;
            cross += v * t.values[i];
        }
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum2 - sum * mean;
    const double cov = cross - t.mean * sum;
    constexpr double kEps = 1e-12;
    if (t.var < kEps || var < kEps) {
        if (t.var < kEps && var < kEps) return std::abs(mean - t.mean) < 1e-9 ? 1.0 : 0.0;
        return 0.0;
    }
    return cov / std::sqrt(t.var * var);
}

}  // namespace detail

/**
 * Tracks `initial` through the clip by ZNCC against the frame-0 template.
 * The matched window is the region grown by a small context margin so that
 * featureless interiors remain trackable by their boundary; emitted rects
 * keep the original size. When the best score drops below the coast
 * threshold the previous rect is carried forward.
 */
inline RoiTrack track(const std::vector<CelsiusFrame>& frames, const Rect& initial,
                      RoiRegion region, int search_radius = 8) {
    if (frames.empty()) throw std::invalid_argument("track: no frames");
    const uint32_t W = frames[0].width, H = frames[0].height;
    if (!initial.within(W, H)) throw std::invalid_argument("track: initial rect out of bounds");
    if (search_radius < 0) throw std::invalid_argument("track: negative search radius");

    const int m = std::min({kTrackContextMarginPx, initial.x, initial.y,
                            static_cast<int>(W) - initial.right(),
                            static_cast<int>(H) - initial.bottom()});
    const Rect tmpl_rect{initial.x - m, initial.y - m, initial.w + 2 * m, initial.h + 2 * m};
    const detail::TemplatePatch tmpl = detail::make_template(frames[0], tmpl_rect);

    RoiTrack out;
    out.region = region;
    out.rects.reserve(frames.size());
    out.quality.reserve(frames.size());
    out.rects.push_back(initial);
    out.quality.push_back(1.0);

    Rect prev = initial;
    const int max_x = static_cast<int>(W) - tmpl_rect.w;
    const int max_y = static_cast<int>(H) - tmpl_rect.h;
    for (size_t i = 1; i < frames.size(); ++i) {
        double best = -2.0;
        int best_x = prev.x - m, best_y = prev.y - m;
        for (int dx = -search_radius; dx <= search_radius; ++dx) {
            const int cx = std::clamp(prev.x - m + dx, 0, max_x);
            for (int dy = -search_radius; dy <= search_radius; ++dy) {
                const int cy = std::clamp(prev.y - m + dy, 0, max_y);
                const double score = detail::zncc(tmpl, frames[i], cx, cy);
                if (score > best) {
                    best = score;
                    best_x = cx;
                    best_y = cy;
                }
            }
        }
        const double quality = std::clamp(best, 0.0, 1.0);
        if (best < kCoastQuality) {
            out.rects.push_back(prev);  // coast
        } else {
            prev = Rect{best_x + m, best_y + m, initial.w, initial.h};
            out.rects.push_back(prev);
        }
        out.quality.push_back(quality);
    }
    return out;
}

inline RoiTrack track(const RadiometricClip& clip, const Rect& initial, RoiRegion region,
                      int search_radius = 8) {
    return track(calibrate_all(clip), initial, region, search_radius);
}

/// Mean-temperature series under a track (one rect per frame).
inline BreathSignal roi_mean_series(const RadiometricClip& clip, const RoiTrack& track,
                                    double t0_s = 0.0) {
    return roi_mean_series(calibrate_all(clip), clip.fps, track.rects, t0_s);
}

}  // namespace respiscreen
