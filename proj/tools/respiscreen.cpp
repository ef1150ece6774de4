// respiscreen: contactless respiratory-infection screening on thermal clips.
//
// Subcommands: synth (render a scenario), analyze (screen a clip),
// plot (signal/spectrum SVG + CSV), inspect (container header dump).
// Exit codes for analyze: 0 Pass, 2 Alert, 3 Inconclusive, 1 error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "respiscreen/codec.hpp"
#include "respiscreen/json_io.hpp"
#include "respiscreen/pipeline.hpp"
#include "respiscreen/plot.hpp"
#include "respiscreen/synth.hpp"

namespace rs = respiscreen;

namespace {

rs::PipelineConfig load_config(const std::string& config_path) {
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("RESPISCREEN_CONFIG")) path = env;
    }
    if (path.empty()) return rs::PipelineConfig{};
    return rs::config_from_json(rs::load_json_file(path));
}

std::string sidecar_path(const std::string& thrm_path, const std::string& suffix) {
    const std::string ext = ".thrm";
    if (thrm_path.size() > ext.size() &&
        thrm_path.compare(thrm_path.size() - ext.size(), ext.size(), ext) == 0)
        return thrm_path.substr(0, thrm_path.size() - ext.size()) + suffix;
    return thrm_path + suffix;
}

std::string strip_suffix(const std::string& path, const std::string& ext) {
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
        return path.substr(0, path.size() - ext.size());
    return path;
}

std::optional<rs::Rect> parse_rect_flag(const std::vector<int>& v) {
    if (v.empty()) return std::nullopt;
    return rs::Rect{v[0], v[1], v[2], v[3]};
}

int cmd_synth(const std::string& scenario_path, const std::string& out_path) {
    const rs::Scenario s = rs::scenario_from_json(rs::load_json_file(scenario_path));
    const rs::RenderResult r = rs::render(s);
    rs::write_thrm(out_path, r.clip);
    const std::string truth_path = sidecar_path(out_path, ".truth.json");
    rs::save_json_file(truth_path, rs::truth_to_json(r.truth));
    std::printf("wrote %s (%zu frames, %ux%u @ %.3f fps, %s", out_path.c_str(),
                r.clip.frames.size(), r.clip.width, r.clip.height, r.clip.fps,
                rs::to_string(r.truth.true_pattern));
    if (r.truth.true_pattern != rs::BreathPattern::Apnea)
        std::printf(" %.1f bpm", r.truth.true_rate_bpm);
    std::printf(") + %s\n", truth_path.c_str());
    return 0;
}

int cmd_analyze(const std::string& clip_path, const std::string& out_path,
                const std::string& tracks_prefix, const rs::PipelineConfig& cfg,
                const std::optional<rs::Rect>& forehead, const std::optional<rs::Rect>& nostril) {
    const rs::RadiometricClip clip = rs::read_thrm(clip_path);
    rs::AnalyzeOptions opts;
    opts.forehead_override = forehead;
    opts.nostril_override = nostril;
    const rs::AnalysisResult res = rs::analyze_clip(clip, cfg, opts);

    const std::string report = rs::report_to_json(res.report).dump(2) + "\n";
    if (out_path.empty()) {
        std::fputs(report.c_str(), stdout);
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
        out << report;
    }
    if (!tracks_prefix.empty()) {
        rs::write_track_csv(tracks_prefix + ".forehead.csv", res.forehead_track);
        rs::write_track_csv(tracks_prefix + ".nostril.csv", res.nostril_track);
    }
    std::fprintf(stderr, "%s\n", rs::summary_line(res.report).c_str());
    switch (res.report.decision) {
        case rs::Decision::Pass: return 0;
        case rs::Decision::Alert: return 2;
        case rs::Decision::Inconclusive: return 3;
    }
    return 1;
}

int cmd_plot(const std::string& clip_path, const std::string& out_svg,
             const rs::PipelineConfig& cfg) {
    const rs::RadiometricClip clip = rs::read_thrm(clip_path);
    rs::AnalyzeOptions opts;
    opts.lenient_roi = true;  // a diagnostic plot of a flat clip is still useful
    const rs::AnalysisResult res = rs::analyze_clip(clip, cfg, opts);

    std::ofstream out(out_svg, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_svg);
    out << rs::render_plot_svg(res, cfg);

    const std::string base = strip_suffix(out_svg, ".svg");
    rs::write_signal_csv(base + ".raw.csv", res.raw_signal);
    rs::write_signal_csv(base + ".filtered.csv", res.filtered_signal);
    rs::write_spectrum_csv(base + ".spectrum.csv", res.spectrum);
    std::printf("wrote %s (+ %s.{raw,filtered,spectrum}.csv)\n", out_svg.c_str(), base.c_str());
    return 0;
}

int cmd_inspect(const std::string& clip_path, bool as_json) {
    const rs::RadiometricClip clip = rs::read_thrm(clip_path);
    double tmin = 0.0, tmax = 0.0;
    bool have_range = false;
    for (const rs::RadiometricFrame& f : clip.frames) {
        for (uint16_t c : f.counts) {
            const double v = clip.calibration.to_celsius(c);
            if (!have_range) {
                tmin = tmax = v;
                have_range = true;
            } else {
                tmin = std::min(tmin, v);
                tmax = std::max(tmax, v);
            }
        }
    }
    if (as_json) {
        rs::json j;
        j["version"] = rs::kThrmVersion;
        j["width"] = clip.width;
        j["height"] = clip.height;
        j["frame_count"] = clip.frames.size();
        j["fps"] = clip.fps;
        j["duration_s"] = clip.duration_seconds();
        j["cal_slope"] = clip.calibration.slope_c_per_count;
        j["cal_offset"] = clip.calibration.offset_c;
        j["min_temp_c"] = have_range ? rs::json(tmin) : rs::json(nullptr);
        j["max_temp_c"] = have_range ? rs::json(tmax) : rs::json(nullptr);
        std::printf("%s\n", j.dump(2).c_str());
        return 0;
    }
    std::printf("file:        %s\n", clip_path.c_str());
    std::printf("version:     %u\n", rs::kThrmVersion);
    std::printf("size:        %ux%u\n", clip.width, clip.height);
    std::printf("frames:      %zu\n", clip.frames.size());
    std::printf("fps:         %.3f\n", clip.fps);
    std::printf("duration:    %.2f s\n", clip.duration_seconds());
    std::printf("calibration: slope %.6f degC/count, offset %.6f degC\n",
                clip.calibration.slope_c_per_count, clip.calibration.offset_c);
    if (have_range)
        std::printf("temp range:  %.2f .. %.2f degC\n", tmin, tmax);
    else
        std::printf("temp range:  n/a (no frames)\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contactless respiratory screening over radiometric thermal clips"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    bool as_json = false;
    app.add_option("--config", config_path,
                   "Pipeline config JSON (falls back to $RESPISCREEN_CONFIG)");
    app.add_flag("--json", as_json, "JSON output where applicable");

    auto* synth = app.add_subcommand("synth", "Render a scenario into a .thrm clip + ground truth");
    std::string scenario_path, synth_out;
    synth->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    synth->add_option("output", synth_out, "Output .thrm path")->required();

    auto* analyze = app.add_subcommand("analyze", "Screen the trailing window of a clip");
    std::string clip_path, tracks_prefix;
    std::vector<int> fore_flag, nose_flag;
    analyze->add_option("clip", clip_path, "Input .thrm clip")->required();
    analyze->add_option("--out", out_path, "Write the report JSON here instead of stdout");
    analyze->add_option("--tracks", tracks_prefix, "Also write <prefix>.{forehead,nostril}.csv");
    analyze->add_option("--forehead", fore_flag, "Manual forehead rect x y w h")->expected(4);
    analyze->add_option("--nostril", nose_flag, "Manual nostril rect x y w h")->expected(4);

    auto* plot = app.add_subcommand("plot", "Emit signal/spectrum SVG plus CSV sidecars");
    std::string plot_clip, plot_svg;
    plot->add_option("clip", plot_clip, "Input .thrm clip")->required();
    plot->add_option("output", plot_svg, "Output .svg path")->required();

    auto* inspect = app.add_subcommand("inspect", "Print container header and temperature range");
    std::string inspect_clip;
    inspect->add_option("clip", inspect_clip, "Input .thrm clip")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(scenario_path, synth_out);
        const rs::PipelineConfig cfg = load_config(config_path);
        if (analyze->parsed())
            return cmd_analyze(clip_path, out_path, tracks_prefix, cfg,
                               parse_rect_flag(fore_flag), parse_rect_flag(nose_flag));
        if (plot->parsed()) return cmd_plot(plot_clip, plot_svg, cfg);
        if (inspect->parsed()) return cmd_inspect(inspect_clip, as_json);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
