#pragma once

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "respiscreen/pipeline.hpp"
#include "respiscreen/screening.hpp"
#include "respiscreen/synth.hpp"

namespace respiscreen {

using nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                                const char* what) {
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw std::invalid_argument(std::string(what) + ": unknown key '" + item.key() + "'");
}

inline void get_number(const json& j, const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number())
        throw std::invalid_argument(std::string("field '") + key + "' must be a number");
    dst = j[key].get<double>();
}

inline void get_uint(const json& j, const char* key, uint32_t& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer() || j[key].get<int64_t>() < 0)
        throw std::invalid_argument(std::string("field '") + key +
                                    "' must be a non-negative integer");
    dst = static_cast<uint32_t>(j[key].get<int64_t>());
}

inline void get_bool(const json& j, const char* key, bool& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_boolean())
        throw std::invalid_argument(std::string("field '") + key + "' must be a boolean");
    dst = j[key].get<bool>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario files: one flat JSON object, snake_case keys, unknown keys rejected.

inline Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("scenario: expected a JSON object");
    static const std::set<std::string> known = {
        "duration",       "fps",           "width",           "height",
        "face_center_x",  "face_center_y", "face_axis_x",     "face_axis_y",
        "forehead_temp",  "face_temp",     "background_temp", "nostril_baseline",
        "breath_amplitude", "breath_rate", "waveform_asymmetry", "apnea_windows",
        "drift",          "noise_sigma",   "sway_amplitude",  "sway_period",
        "seed",           "cal_slope",     "cal_offset"};
    detail::reject_unknown_keys(j, known, "scenario");

    Scenario s;
    detail::get_number(j, "duration", s.duration_s);
    detail::get_number(j, "fps", s.fps);
    detail::get_uint(j, "width", s.width);
    detail::get_uint(j, "height", s.height);
    detail::get_number(j, "face_center_x", s.face_center_x);
    detail::get_number(j, "face_center_y", s.face_center_y);
    detail::get_number(j, "face_axis_x", s.face_axis_x);
    detail::get_number(j, "face_axis_y", s.face_axis_y);
    detail::get_number(j, "forehead_temp", s.forehead_temp_c);
    detail::get_number(j, "face_temp", s.face_temp_c);
    detail::get_number(j, "background_temp", s.background_temp_c);
    detail::get_number(j, "nostril_baseline", s.nostril_baseline_c);
    detail::get_number(j, "breath_amplitude", s.breath_amplitude_c);
    detail::get_number(j, "breath_rate", s.breath_rate_bpm);
    detail::get_number(j, "waveform_asymmetry", s.waveform_asymmetry);
    detail::get_number(j, "drift", s.drift_c_per_s);
    detail::get_number(j, "noise_sigma", s.noise_sigma_c);
    detail::get_number(j, "sway_amplitude", s.sway_amplitude_px);
    detail::get_number(j, "sway_period", s.sway_period_s);
    detail::get_number(j, "cal_slope", s.cal_slope);
    detail::get_number(j, "cal_offset", s.cal_offset);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer())
            throw std::invalid_argument("field 'seed' must be an integer");
        s.seed = j["seed"].get<uint64_t>();
    }
    if (j.contains("apnea_windows")) {
        if (!j["apnea_windows"].is_array())
            throw std::invalid_argument("field 'apnea_windows' must be an array of [start, end]");
        for (const json& w : j["apnea_windows"]) {
            if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
                throw std::invalid_argument("apnea_windows entries must be [start, end] pairs");
            s.apnea_windows.push_back({w[0].get<double>(), w[1].get<double>()});
        }
    }
    if (std::string msg = validate_scenario(s); !msg.empty())
        throw std::invalid_argument("scenario: " + msg);
    return s;
}

inline json scenario_to_json(const Scenario& s) {
    json j;
    j["duration"] = s.duration_s;
    j["fps"] = s.fps;
    j["width"] = s.width;
    j["height"] = s.height;
    j["face_center_x"] = s.face_center_x;
    j["face_center_y"] = s.face_center_y;
    j["face_axis_x"] = s.face_axis_x;
    j["face_axis_y"] = s.face_axis_y;
    j["forehead_temp"] = s.forehead_temp_c;
    j["face_temp"] = s.face_temp_c;
    j["background_temp"] = s.background_temp_c;
    j["nostril_baseline"] = s.nostril_baseline_c;
    j["breath_amplitude"] = s.breath_amplitude_c;
    j["breath_rate"] = s.breath_rate_bpm;
    j["waveform_asymmetry"] = s.waveform_asymmetry;
    json windows = json::array();
    for (const ApneaWindow& w : s.apnea_windows) windows.push_back({w.start_s, w.end_s});
    j["apnea_windows"] = windows;
    j["drift"] = s.drift_c_per_s;
    j["noise_sigma"] = s.noise_sigma_c;
    j["sway_amplitude"] = s.sway_amplitude_px;
    j["sway_period"] = s.sway_period_s;
    j["seed"] = s.seed;
    j["cal_slope"] = s.cal_slope;
    j["cal_offset"] = s.cal_offset;
    return j;
}

// ---------------------------------------------------------------------------
// GroundTruth sidecar (.truth.json)

inline json rect_to_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

inline Rect rect_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4)
        throw std::invalid_argument("rect must be [x, y, w, h]");
    return Rect{j[0].get<int32_t>(), j[1].get<int32_t>(), j[2].get<int32_t>(),
                j[3].get<int32_t>()};
}

inline json truth_to_json(const GroundTruth& t) {
    json j;
    json fore = json::array(), nose = json::array();
    for (const Rect& r : t.forehead_rects) fore.push_back(rect_to_json(r));
    for (const Rect& r : t.nostril_rects) nose.push_back(rect_to_json(r));
    j["forehead_rects"] = fore;
    j["nostril_rects"] = nose;
    j["true_rate"] = t.true_rate_bpm;
    j["true_pattern"] = to_string(t.true_pattern);
    j["breath_waveform"] = t.breath_waveform;
    return j;
}

inline GroundTruth truth_from_json(const json& j) {
    GroundTruth t;
    for (const json& r : j.at("forehead_rects")) t.forehead_rects.push_back(rect_from_json(r));
    for (const json& r : j.at("nostril_rects")) t.nostril_rects.push_back(rect_from_json(r));
    t.true_rate_bpm = j.at("true_rate").get<double>();
    const auto p = pattern_from_string(j.at("true_pattern").get<std::string>());
    if (!p) throw std::invalid_argument("truth: unknown pattern name");
    t.true_pattern = *p;
    t.breath_waveform = j.at("breath_waveform").get<std::vector<double>>();
    return t;
}

// ---------------------------------------------------------------------------
// Pipeline config: one flat JSON object, every tunable with its default.

inline PipelineConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    static const std::set<std::string> known = {
        "band_low_hz",        "band_high_hz",        "brady_max_bpm",
        "tachy_min_bpm",      "apnea_rms_c",         "apnea_min_snr",
        "fever_threshold_c",  "skin_to_core_offset_c", "require_eupnea",
        "rate_hard_min_bpm",  "rate_hard_max_bpm",   "min_confidence",
        "probe_seconds",      "search_radius_px",    "window_seconds",
        "peak_min_separation_s", "peak_min_prominence_c"};
    detail::reject_unknown_keys(j, known, "config");

    PipelineConfig c;
    detail::get_number(j, "band_low_hz", c.band_low_hz);
    detail::get_number(j, "band_high_hz", c.band_high_hz);
    detail::get_number(j, "brady_max_bpm", c.thresholds.brady_max_bpm);
    detail::get_number(j, "tachy_min_bpm", c.thresholds.tachy_min_bpm);
    detail::get_number(j, "apnea_rms_c", c.thresholds.apnea_rms_c);
    detail::get_number(j, "apnea_min_snr", c.thresholds.apnea_min_snr);
    detail::get_number(j, "fever_threshold_c", c.rules.fever_threshold_c);
    detail::get_number(j, "skin_to_core_offset_c", c.rules.skin_to_core_offset_c);
    detail::get_bool(j, "require_eupnea", c.rules.require_eupnea);
    detail::get_number(j, "rate_hard_min_bpm", c.rules.rate_hard_min_bpm);
    detail::get_number(j, "rate_hard_max_bpm", c.rules.rate_hard_max_bpm);
    detail::get_number(j, "min_confidence", c.rules.min_confidence);
    detail::get_number(j, "probe_seconds", c.probe_seconds);
    if (j.contains("search_radius_px")) {
        if (!j["search_radius_px"].is_number_integer())
            throw std::invalid_argument("field 'search_radius_px' must be an integer");
        c.search_radius_px = j["search_radius_px"].get<int>();
    }
    detail::get_number(j, "window_seconds", c.window_seconds);
    detail::get_number(j, "peak_min_separation_s", c.peak_min_separation_s);
    detail::get_number(j, "peak_min_prominence_c", c.peak_min_prominence_c);
    if (std::string msg = c.validate(); !msg.empty())
        throw std::invalid_argument("config: " + msg);
    return c;
}

inline json config_to_json(const PipelineConfig& c) {
    json j;
    j["band_low_hz"] = c.band_low_hz;
    j["band_high_hz"] = c.band_high_hz;
    j["brady_max_bpm"] = c.thresholds.brady_max_bpm;
    j["tachy_min_bpm"] = c.thresholds.tachy_min_bpm;
    j["apnea_rms_c"] = c.thresholds.apnea_rms_c;
    j["apnea_min_snr"] = c.thresholds.apnea_min_snr;
    j["fever_threshold_c"] = c.rules.fever_threshold_c;
    j["skin_to_core_offset_c"] = c.rules.skin_to_core_offset_c;
    j["require_eupnea"] = c.rules.require_eupnea;
    j["rate_hard_min_bpm"] = c.rules.rate_hard_min_bpm;
    j["rate_hard_max_bpm"] = c.rules.rate_hard_max_bpm;
    j["min_confidence"] = c.rules.min_confidence;
    j["probe_seconds"] = c.probe_seconds;
    j["search_radius_px"] = c.search_radius_px;
    j["window_seconds"] = c.window_seconds;
    j["peak_min_separation_s"] = c.peak_min_separation_s;
    j["peak_min_prominence_c"] = c.peak_min_prominence_c;
    return j;
}

// ---------------------------------------------------------------------------
// Screening report: stable schema, fixed key names.

inline json report_to_json(const ScreeningReport& r) {
    json j;
    j["body_temp_c"] = r.body_temp_c;
    j["rate_bpm"] = r.respiration.rate_bpm;
    j["pattern"] = to_string(r.respiration.pattern);
    j["confidence"] = r.respiration.confidence;
    j["decision"] = to_string(r.decision);
    json reasons = json::array();
    for (ReasonCode c : r.reasons) reasons.push_back(to_string(c));
    j["reasons"] = reasons;
    j["window_seconds"] = r.window_seconds;
    return j;
}

// ---------------------------------------------------------------------------
// File helpers

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json j;
    in >> j;
    return j;
}

inline void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace respiscreen
