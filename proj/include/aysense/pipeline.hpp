// SPDX-License-Identifier: Apache-2.0
//
// Per-AP pipeline orchestration: background calibration, per-step detection,
// AoA, tracking and micro-Doppler window extraction, plus room-frame
// conversion and multi-AP combination helpers shared by the CLI and tests.
#pragma once

#include <cstdint>
#include <vector>

#include "aysense/fusion.hpp"
#include "aysense/microdoppler.hpp"
#include "aysense/scene_io.hpp"
#include "aysense/scenesim.hpp"
#include "aysense/track.hpp"
#include "aysense/waveform.hpp"

namespace aysense::pipeline {

// Frames of one AP for a whole scene: floor(duration / t_c) frames, the
// first calib_frames synthesized with subjects muted (background window).
std::vector<waveform::CirFrame> simulate_frames(const io::SceneFile &sf, const scenesim::Codebook &cb,
                                                const waveform::RadioConfig &rcfg, int ap_index,
                                                std::uint64_t seed);

// Tracking steps available after the calibration window, one per sigma frames.
long n_steps(long total_frames, int calib_frames, int sigma);

struct ApRunResult {
    int ap_id = 0;
    long steps_total = 0;
    // confirmed tracks after each step, AP-local coordinates
    std::vector<std::vector<track::Track>> steps;
    std::vector<microdoppler::Spectrogram> windows; // raw, not preprocessed
};

// Background from the first detect.k_static frames, then detect -> AoA ->
// EKF tracking every stft_sigma frames; optionally micro-Doppler windows.
ApRunResult run_ap(const std::vector<waveform::CirFrame> &frames, const scenesim::Codebook &cb,
                   const io::PipelineConfig &cfg, int ap_id, bool extract_md);

// Confirmed track positions per step mapped into the room frame.
std::vector<std::vector<fusion::TrackPoint>> room_tracks(const ApRunResult &run,
                                                         const fusion::ApRegistration &reg);

// Per-step combination of two APs' room-frame tracks: matched pairs are
// averaged (keeping the first AP's id), unmatched tracks pass through with
// the second AP's ids offset to stay unique.
std::vector<std::vector<fusion::TrackPoint>> fuse_room_tracks(
    const std::vector<std::vector<fusion::TrackPoint>> &a, const std::vector<std::vector<fusion::TrackPoint>> &b,
    double radius = 0.75);

// True torso positions per tracking step, aligned with ApRunResult::steps.
std::vector<std::vector<std::pair<double, double>>> ground_truth_positions(const io::SceneFile &sf,
                                                                           const waveform::RadioConfig &rcfg,
                                                                           int sigma, long steps);

} // namespace aysense::pipeline
