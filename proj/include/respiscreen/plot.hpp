#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "respiscreen/pipeline.hpp"

namespace respiscreen {

inline void write_signal_csv(const std::string& path, const BreathSignal& sig) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "t,value\n";
    char line[64];
    for (size_t i = 0; i < sig.samples.size(); ++i) {
        const double t = sig.t0_s + static_cast<double>(i) / sig.sample_rate_hz;
        std::snprintf(line, sizeof(line), "%.6f,%.9g\n", t, sig.samples[i]);
        out << line;
    }
}

inline void write_spectrum_csv(const std::string& path, const Spectrum& spec) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "freq,power\n";
    char line[64];
    for (size_t i = 0; i < spec.freqs_hz.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.6f,%.9g\n", spec.freqs_hz[i], spec.power[i]);
        out << line;
    }
}

inline void write_track_csv(const std::string& path, const RoiTrack& track) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "frame,x,y,w,h,quality\n";
    char line[96];
    for (size_t i = 0; i < track.rects.size(); ++i) {
        const Rect& r = track.rects[i];
        std::snprintf(line, sizeof(line), "%zu,%d,%d,%d,%d,%.4f\n", i, r.x, r.y, r.w, r.h,
                      track.quality[i]);
        out << line;
    }
}

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct PanelLayout {
    double x0, y0, w, h;  // data area in SVG coordinates
};

/// Polyline over a data area with linear x/y scaling.
inline void emit_series(std::string& svg, const PanelLayout& p, const std::vector<double>& xs,
                        const std::vector<double>& ys, double xmin, double xmax, double ymin,
                        double ymax, const char* color) {
    svg += "    <polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.2\" points=\"";
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;
    const double yspan = ymax > ymin ? ymax - ymin : 1.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double sx = p.x0 + (xs[i] - xmin) / xspan * p.w;
        const double sy = p.y0 + p.h - (ys[i] - ymin) / yspan * p.h;
        svg += fmt(sx);
        svg += ",";
        svg += fmt(sy);
        if (i + 1 < xs.size()) svg += " ";
    }
    svg += "\"/>\n";
}

inline void emit_panel_frame(std::string& svg, const PanelLayout& p, const std::string& title,
                             const std::string& xlabel, double xmin, double xmax, double ymin,
                             double ymax) {
    svg += "    <rect x=\"" + fmt(p.x0) + "\" y=\"" + fmt(p.y0) + "\" width=\"" + fmt(p.w) +
           "\" height=\"" + fmt(p.h) +
           "\" fill=\"#fcfcfc\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    svg += "    <text x=\"" + fmt(p.x0) + "\" y=\"" + fmt(p.y0 - 8.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\">" + title + "</text>\n";
    svg += "    <text x=\"" + fmt(p.x0 + p.w / 2.0) + "\" y=\"" + fmt(p.y0 + p.h + 28.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + xlabel +
           "</text>\n";
    svg += "    <text x=\"" + fmt(p.x0 - 6.0) + "\" y=\"" + fmt(p.y0 + p.h) +
           "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" + fmt(ymin) +
           "</text>\n";
    svg += "    <text x=\"" + fmt(p.x0 - 6.0) + "\" y=\"" + fmt(p.y0 + 10.0) +
           "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" + fmt(ymax) +
           "</text>\n";
    svg += "    <text x=\"" + fmt(p.x0) + "\" y=\"" + fmt(p.y0 + p.h + 14.0) +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(xmin) + "</text>\n";
    svg += "    <text x=\"" + fmt(p.x0 + p.w) + "\" y=\"" + fmt(p.y0 + p.h + 14.0) +
           "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" + fmt(xmax) +
           "</text>\n";
}

inline void series_range(const std::vector<double>& v, double& lo, double& hi) {
    lo = *std::min_element(v.begin(), v.end());
    hi = *std::max_element(v.begin(), v.end());
    if (hi - lo < 1e-9) {
        lo -= 0.5;
        hi += 0.5;
    }
}

}  // namespace detail

/**
 * Three stacked panels: raw nostril series, band-passed series, and the
 * breathing-band spectrum on a breaths/min axis. The spectral peak gets a
 * marker (with a data-bpm attribute) when a dominant tone exists.
 */
inline std::string render_plot_svg(const AnalysisResult& res, const PipelineConfig& cfg = {}) {
    const double width = 880.0, panel_h = 170.0, left = 70.0, top = 40.0, gap = 60.0;
    const double height = top + 3 * panel_h + 2 * gap + 50.0;
    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt(width) +
           "\" height=\"" + detail::fmt(height) + "\" viewBox=\"0 0 " + detail::fmt(width) + " " +
           detail::fmt(height) + "\">\n";

    const BreathSignal& raw = res.raw_signal;
    const BreathSignal& flt = res.filtered_signal;
    std::vector<double> t(raw.samples.size());
    for (size_t i = 0; i < t.size(); ++i)
        t[i] = raw.t0_s + static_cast<double>(i) / raw.sample_rate_hz;
    const double tmin = t.front(), tmax = t.back();

    // panel 1: raw nostril series
    {
        detail::PanelLayout p{left, top, width - left - 30.0, panel_h};
        double lo, hi;
        detail::series_range(raw.samples, lo, hi);
        svg += "  <g id=\"panel-raw\">\n";
        detail::emit_panel_frame(svg, p, "Nostril region mean temperature (degC)", "time (s)",
                                 tmin, tmax, lo, hi);
        detail::emit_series(svg, p, t, raw.samples, tmin, tmax, lo, hi, "#1f77b4");
        svg += "  </g>\n";
    }
    // panel 2: filtered series
    {
        detail::PanelLayout p{left, top + panel_h + gap, width - left - 30.0, panel_h};
        double lo, hi;
        detail::series_range(flt.samples, lo, hi);
        svg += "  <g id=\"panel-filtered\">\n";
        detail::emit_panel_frame(svg, p, "Band-passed breathing signal (degC)", "time (s)", tmin,
                                 tmax, lo, hi);
        detail::emit_series(svg, p, t, flt.samples, tmin, tmax, lo, hi, "#2ca02c");
        svg += "  </g>\n";
    }
    // panel 3: spectrum on a breaths/min axis, breathing band only
    {
        detail::PanelLayout p{left, top + 2 * (panel_h + gap), width - left - 30.0, panel_h};
        std::vector<double> bpm, pw;
        for (size_t i = 0; i < res.spectrum.freqs_hz.size(); ++i) {
            const double f = res.spectrum.freqs_hz[i];
            if (f >= cfg.band_low_hz * 0.5 && f <= cfg.band_high_hz * 1.2) {
                bpm.push_back(60.0 * f);
                pw.push_back(res.spectrum.power[i]);
            }
        }
        if (bpm.empty()) {
            bpm = {0.0, 60.0};
            pw = {0.0, 0.0};
        }
        double lo, hi;
        detail::series_range(pw, lo, hi);
        lo = std::min(lo, 0.0);
        const double bmin = bpm.front(), bmax = bpm.back();
        svg += "  <g id=\"panel-spectrum\">\n";
        detail::emit_panel_frame(svg, p, "Breathing-band power spectrum", "rate (breaths/min)",
                                 bmin, bmax, lo, hi);
        detail::emit_series(svg, p, bpm, pw, bmin, bmax, lo, hi, "#d62728");
        if (res.dominant.snr >= cfg.thresholds.apnea_min_snr) {
            const double mark_bpm = 60.0 * res.dominant.frequency_hz;
            const double sx = p.x0 + (mark_bpm - bmin) / (bmax - bmin) * p.w;
            svg += "    <line class=\"peak-marker\" data-bpm=\"" + detail::fmt(mark_bpm) +
                   "\" x1=\"" + detail::fmt(sx) + "\" y1=\"" + detail::fmt(p.y0) + "\" x2=\"" +
                   detail::fmt(sx) + "\" y2=\"" + detail::fmt(p.y0 + p.h) +
                   "\" stroke=\"#ff7f0e\" stroke-width=\"1.5\" stroke-dasharray=\"4,3\"/>\n";
            svg += "    <text x=\"" + detail::fmt(sx + 4.0) + "\" y=\"" +
                   detail::fmt(p.y0 + 14.0) +
                   "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#ff7f0e\">" +
                   detail::fmt(mark_bpm) + " bpm</text>\n";
        }
        svg += "  </g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace respiscreen
