// SPDX-License-Identifier: Apache-2.0
//
// JSON scene descriptions and the pipeline configuration file (all module
// parameters plus AP registrations).
#pragma once

#include <string>
#include <vector>

#include "aysense/classify.hpp"
#include "aysense/detect.hpp"
#include "aysense/fusion.hpp"
#include "aysense/microdoppler.hpp"
#include "aysense/scenesim.hpp"
#include "aysense/track.hpp"
#include "aysense/waveform.hpp"

namespace aysense::io {

// Scene file: room, aps, subjects (waypoints, activity, optional phases),
// reflectors, noise_std, cfo_range_hz, seed, duration_s, calib_frames.
struct SceneFile {
    scenesim::Scene scene;
    int calib_frames = 128; // leading frames synthesized with subjects muted
};

SceneFile load_scene(const std::string &path);
SceneFile parse_scene(const std::string &text, const std::string &origin);
void save_scene(const std::string &path, const SceneFile &sf);

struct PipelineConfig {
    waveform::RadioConfig radio;
    detect::DetectConfig detect;
    track::TrackerConfig tracker;
    int stft_m = 64;
    int stft_sigma = 16;
    microdoppler::MdConfig md;
    classify::TrainConfig train;
    std::vector<fusion::ApRegistration> aps;
    std::string fusion_mode = "decision"; // "decision" | "position"
    int codebook_patterns = 12;
};

// Defaults reproduce the evaluation parameter set; missing keys keep them.
PipelineConfig load_pipeline_config(const std::string &path);
PipelineConfig parse_pipeline_config(const std::string &text, const std::string &origin);
void save_pipeline_config(const std::string &path, const PipelineConfig &cfg);

} // namespace aysense::io
