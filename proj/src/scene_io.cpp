// SPDX-License-Identifier: Apache-2.0
#include "aysense/scene_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace aysense::io {

namespace {

std::string slurp(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json parse_json(const std::string &text, const std::string &origin)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw std::runtime_error(origin + ": " + e.what());
    }
}

[[noreturn]] void schema_error(const std::string &origin, const std::string &what)
{
    throw std::runtime_error(origin + ": schema error: " + what);
}

double num(const json &j, const char *key, const std::string &origin)
{
    if (!j.contains(key) || !j[key].is_number())
        schema_error(origin, std::string("missing or non-numeric field '") + key + "'");
    return j[key].get<double>();
}

void write_text(const std::string &path, const std::string &text)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open file for writing: " + path);
    f << text;
}

} // namespace

SceneFile parse_scene(const std::string &text, const std::string &origin)
{
    json j = parse_json(text, origin);
    SceneFile sf;
    scenesim::Scene &sc = sf.scene;

    if (j.contains("room")) {
        sc.room_w = num(j["room"], "w", origin);
        sc.room_h = num(j["room"], "h", origin);
    }
    if (!j.contains("aps") || !j["aps"].is_array() || j["aps"].empty())
        schema_error(origin, "'aps' must be a non-empty array");
    for (const auto &a : j["aps"]) {
        scenesim::ApPose ap;
        ap.x = num(a, "x", origin);
        ap.y = num(a, "y", origin);
        ap.boresight_deg = a.value("boresight_deg", 90.0);
        sc.ap_poses.push_back(ap);
    }
    for (const auto &s : j.value("subjects", json::array())) {
        if (!s.contains("waypoints") || !s["waypoints"].is_array() || s["waypoints"].empty())
            schema_error(origin, "subject needs a non-empty 'waypoints' array");
        std::vector<scenesim::Waypoint> wps;
        double last_t = -1.0;
        for (const auto &w : s["waypoints"]) {
            scenesim::Waypoint wp;
            wp.t = num(w, "t", origin);
            wp.x = num(w, "x", origin);
            wp.y = num(w, "y", origin);
            if (wp.t <= last_t)
                schema_error(origin, "waypoint times must be strictly increasing");
            last_t = wp.t;
            wps.push_back(wp);
        }
        std::string act = s.value("activity", std::string("walking"));
        scenesim::Subject subj;
        try {
            subj = scenesim::make_subject(s.value("id", static_cast<int>(sc.subjects.size())),
                                          scenesim::activity_from_string(act), std::move(wps));
        } catch (const std::invalid_argument &e) {
            schema_error(origin, e.what());
        }
        for (const auto &p : s.value("phases", json::array())) {
            scenesim::ActivityPhase ph;
            ph.t = num(p, "t", origin);
            if (!p.contains("activity"))
                schema_error(origin, "phase needs an 'activity'");
            try {
                ph.activity = scenesim::activity_from_string(p["activity"].get<std::string>());
            } catch (const std::invalid_argument &e) {
                schema_error(origin, e.what());
            }
            subj.phases.push_back(ph);
        }
        sc.subjects.push_back(std::move(subj));
    }
    for (const auto &r : j.value("reflectors", json::array())) {
        scenesim::StaticReflector ref;
        ref.x = num(r, "x", origin);
        ref.y = num(r, "y", origin);
        ref.reflectivity = num(r, "reflectivity", origin);
        sc.reflectors.push_back(ref);
    }
    sc.noise_std = j.value("noise_std", 0.0);
    sc.cfo_range_hz = j.value("cfo_range_hz", 40.0);
    sc.seed = j.value("seed", 1ULL);
    sc.duration_s = j.value("duration_s", 5.0);
    if (sc.duration_s <= 0.0)
        schema_error(origin, "'duration_s' must be positive");
    sf.calib_frames = j.value("calib_frames", 128);
    if (sf.calib_frames < 0)
        schema_error(origin, "'calib_frames' must be non-negative");
    return sf;
}

SceneFile load_scene(const std::string &path) { return parse_scene(slurp(path), path); }

void save_scene(const std::string &path, const SceneFile &sf)
{
    const scenesim::Scene &sc = sf.scene;
    json j;
    j["room"] = {{"w", sc.room_w}, {"h", sc.room_h}};
    j["aps"] = json::array();
    for (const auto &ap : sc.ap_poses)
        j["aps"].push_back({{"x", ap.x}, {"y", ap.y}, {"boresight_deg", ap.boresight_deg}});
    j["subjects"] = json::array();
    for (const auto &s : sc.subjects) {
        json js;
        js["id"] = s.id;
        js["activity"] = scenesim::activity_to_string(s.activity);
        js["waypoints"] = json::array();
        for (const auto &w : s.trajectory)
            js["waypoints"].push_back({{"t", w.t}, {"x", w.x}, {"y", w.y}});
        if (!s.phases.empty()) {
            js["phases"] = json::array();
            for (const auto &p : s.phases)
                js["phases"].push_back({{"t", p.t}, {"activity", scenesim::activity_to_string(p.activity)}});
        }
        j["subjects"].push_back(std::move(js));
    }
    j["reflectors"] = json::array();
    for (const auto &r : sc.reflectors)
        j["reflectors"].push_back({{"x", r.x}, {"y", r.y}, {"reflectivity", r.reflectivity}});
    j["noise_std"] = sc.noise_std;
    j["cfo_range_hz"] = sc.cfo_range_hz;
    j["seed"] = sc.seed;
    j["duration_s"] = sc.duration_s;
    j["calib_frames"] = sf.calib_frames;
    write_text(path, j.dump(2) + "\n");
}

PipelineConfig parse_pipeline_config(const std::string &text, const std::string &origin)
{
    json j = parse_json(text, origin);
    PipelineConfig c;

    if (j.contains("radio")) {
        const json &r = j["radio"];
        c.radio.f_o = r.value("f_o", c.radio.f_o);
        c.radio.bandwidth = r.value("bandwidth", c.radio.bandwidth);
        c.radio.t_c = r.value("t_c", c.radio.t_c);
        c.radio.n_taps = r.value("n_taps", c.radio.n_taps);
        c.radio.n_patterns = r.value("n_patterns", c.radio.n_patterns);
    }
    if (j.contains("detect")) {
        const json &d = j["detect"];
        c.detect.alpha_max = d.value("alpha_max", c.detect.alpha_max);
        c.detect.alpha_mean = d.value("alpha_mean", c.detect.alpha_mean);
        c.detect.alpha_abs = d.value("alpha_abs", c.detect.alpha_abs);
        c.detect.k_static = d.value("k_static", c.detect.k_static);
    }
    if (j.contains("tracker")) {
        const json &t = j["tracker"];
        c.tracker.q = t.value("q", c.tracker.q);
        c.tracker.r_d = t.value("r_d", c.tracker.r_d);
        c.tracker.r_theta = t.value("r_theta", c.tracker.r_theta);
        c.tracker.gate = t.value("gate", c.tracker.gate);
        c.tracker.confirm_hits = t.value("confirm_hits", c.tracker.confirm_hits);
        c.tracker.kill_misses = t.value("kill_misses", c.tracker.kill_misses);
        c.tracker.init_pos_std = t.value("init_pos_std", c.tracker.init_pos_std);
        c.tracker.init_vel_std = t.value("init_vel_std", c.tracker.init_vel_std);
        c.tracker.spawn_radius = t.value("spawn_radius", c.tracker.spawn_radius);
    }
    if (j.contains("stft")) {
        c.stft_m = j["stft"].value("m", c.stft_m);
        c.stft_sigma = j["stft"].value("sigma", c.stft_sigma);
    }
    if (j.contains("microdoppler")) {
        const json &m = j["microdoppler"];
        c.md.q = m.value("q", c.md.q);
        c.md.t_window = m.value("t_window", c.md.t_window);
        c.md.overlap = m.value("overlap", c.md.overlap);
        c.md.static_band = m.value("static_band", c.md.static_band);
    }
    if (j.contains("train")) {
        const json &t = j["train"];
        c.train.lr = t.value("lr", c.train.lr);
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.batch = t.value("batch", c.train.batch);
        c.train.target_accuracy = t.value("target_accuracy", c.train.target_accuracy);
    }
    for (const auto &a : j.value("aps", json::array())) {
        fusion::ApRegistration reg;
        reg.ap_id = a.value("ap_id", static_cast<int>(c.aps.size()));
        reg.x = num(a, "x", origin);
        reg.y = num(a, "y", origin);
        reg.boresight_deg = a.value("boresight_deg", 90.0);
        c.aps.push_back(reg);
    }
    c.fusion_mode = j.value("fusion_mode", c.fusion_mode);
    if (c.fusion_mode != "decision" && c.fusion_mode != "position")
        schema_error(origin, "'fusion_mode' must be 'decision' or 'position'");
    c.codebook_patterns = j.value("codebook_patterns", c.codebook_patterns);
    if (c.stft_m < 2 || (c.stft_m & (c.stft_m - 1)) != 0)
        schema_error(origin, "'stft.m' must be a power of two");
    if (c.md.overlap < 0 || c.md.overlap >= c.md.t_window)
        schema_error(origin, "'microdoppler.overlap' must lie in [0, t_window)");
    return c;
}

PipelineConfig load_pipeline_config(const std::string &path)
{
    return parse_pipeline_config(slurp(path), path);
}

void save_pipeline_config(const std::string &path, const PipelineConfig &c)
{
    json j;
    j["radio"] = {{"f_o", c.radio.f_o},
                  {"bandwidth", c.radio.bandwidth},
                  {"t_c", c.radio.t_c},
                  {"n_taps", c.radio.n_taps},
                  {"n_patterns", c.radio.n_patterns}};
    j["detect"] = {{"alpha_max", c.detect.alpha_max},
                   {"alpha_mean", c.detect.alpha_mean},
                   {"alpha_abs", c.detect.alpha_abs},
                   {"k_static", c.detect.k_static}};
    j["tracker"] = {{"q", c.tracker.q},
                    {"r_d", c.tracker.r_d},
                    {"r_theta", c.tracker.r_theta},
                    {"gate", c.tracker.gate},
                    {"confirm_hits", c.tracker.confirm_hits},
                    {"kill_misses", c.tracker.kill_misses},
                    {"init_pos_std", c.tracker.init_pos_std},
                    {"init_vel_std", c.tracker.init_vel_std},
                    {"spawn_radius", c.tracker.spawn_radius}};
    j["stft"] = {{"m", c.stft_m}, {"sigma", c.stft_sigma}};
    j["microdoppler"] = {{"q", c.md.q},
                         {"t_window", c.md.t_window},
                         {"overlap", c.md.overlap},
                         {"static_band", c.md.static_band}};
    j["train"] = {{"lr", c.train.lr},
                  {"epochs", c.train.epochs},
                  {"batch", c.train.batch},
                  {"target_accuracy", c.train.target_accuracy}};
    j["aps"] = json::array();
    for (const auto &a : c.aps)
        j["aps"].push_back({{"ap_id", a.ap_id}, {"x", a.x}, {"y", a.y}, {"boresight_deg", a.boresight_deg}});
    j["fusion_mode"] = c.fusion_mode;
    j["codebook_patterns"] = c.codebook_patterns;
    write_text(path, j.dump(2) + "\n");
}

} // namespace aysense::io
