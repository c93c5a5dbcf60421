// SPDX-License-Identifier: Apache-2.0
#include "aysense/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include "aysense/aoa.hpp"
#include "aysense/detect.hpp"

namespace aysense::pipeline {

std::vector<waveform::CirFrame> simulate_frames(const io::SceneFile &sf, const scenesim::Codebook &cb,
                                                const waveform::RadioConfig &rcfg, int ap_index,
                                                std::uint64_t seed)
{
    const long total = static_cast<long>(std::floor(sf.scene.duration_s / rcfg.t_c));
    std::vector<waveform::CirFrame> frames;
    frames.reserve(static_cast<size_t>(total));
    for (long k = 0; k < total; ++k) {
        bool live = k >= sf.calib_frames;
        frames.push_back(scenesim::synth_cir_frame(sf.scene, ap_index, cb, rcfg, k, seed, live));
    }
    return frames;
}

long n_steps(long total_frames, int calib_frames, int sigma)
{
    const long sense = total_frames - calib_frames;
    if (sense <= 0)
        return 0;
    return (sense + sigma - 1) / sigma;
}

ApRunResult run_ap(const std::vector<waveform::CirFrame> &frames, const scenesim::Codebook &cb,
                   const io::PipelineConfig &cfg, int ap_id, bool extract_md)
{
    const int k_static = cfg.detect.k_static;
    if (static_cast<long>(frames.size()) <= k_static)
        throw std::invalid_argument("run_ap: capture shorter than the background window");

    std::vector<waveform::CirFrame> bg_window(frames.begin(), frames.begin() + k_static);
    auto bg = detect::estimate_background(bg_window);

    // slow-time sensing buffer, packet index 0 = first post-calibration frame
    std::vector<waveform::CirFrame> sense(frames.begin() + k_static, frames.end());

    const int sigma = cfg.stft_sigma;
    const double dt = sigma * cfg.radio.t_c;
    track::Tracker tracker(cfg.tracker, dt);
    auto scfg = microdoppler::make_stft_config(cfg.stft_m, sigma);
    microdoppler::Extractor extractor(cfg.radio, scfg, cfg.md, cb);

    std::vector<double> distances(static_cast<size_t>(cfg.radio.n_taps));
    for (int l = 0; l < cfg.radio.n_taps; ++l)
        distances[static_cast<size_t>(l)] = waveform::tap_to_distance(l, cfg.radio);

    ApRunResult out;
    out.ap_id = ap_id;
    out.steps_total = n_steps(static_cast<long>(frames.size()), k_static, sigma);
    for (long n = 0; n < out.steps_total; ++n) {
        const auto &frame = sense[static_cast<size_t>(n) * sigma];
        auto fg = detect::subtract_background(frame, bg);
        auto strengths = detect::path_strengths(fg, cfg.radio.n_taps, cfg.radio.n_patterns);
        auto cands = detect::detect_candidates(strengths, distances, fg, cfg.radio.n_patterns, cfg.detect);

        std::vector<track::Observation> obs;
        for (const auto &c : cands) {
            track::Observation o;
            o.d = c.distance;
            o.theta = aoa::estimate_aoa(c, cb);
            o.t = n;
            obs.push_back(o);
        }
        auto confirmed = tracker.step(obs, n);
        if (extract_md)
            extractor.step(sense, confirmed, n);
        out.steps.push_back(std::move(confirmed));
    }
    if (extract_md)
        out.windows = extractor.take_windows();
    return out;
}

std::vector<std::vector<fusion::TrackPoint>> room_tracks(const ApRunResult &run,
                                                         const fusion::ApRegistration &reg)
{
    std::vector<std::vector<fusion::TrackPoint>> out;
    out.reserve(run.steps.size());
    for (const auto &step : run.steps) {
        std::vector<fusion::TrackPoint> pts;
        for (const auto &trk : step) {
            auto [x, y] = fusion::to_room_frame(reg, trk.state.x(0), trk.state.x(1));
            pts.push_back({trk.id, x, y});
        }
        out.push_back(std::move(pts));
    }
    return out;
}

std::vector<std::vector<fusion::TrackPoint>> fuse_room_tracks(
    const std::vector<std::vector<fusion::TrackPoint>> &a, const std::vector<std::vector<fusion::TrackPoint>> &b,
    double radius)
{
    if (a.size() != b.size())
        throw std::invalid_argument("fuse_room_tracks: step count mismatch");
    constexpr int kBOffset = 1 << 20; // keeps unmatched second-AP ids unique
    std::vector<std::vector<fusion::TrackPoint>> out(a.size());
    for (size_t t = 0; t < a.size(); ++t) {
        auto pairs = fusion::cross_ap_match(a[t], b[t], radius);
        std::vector<bool> used_a(a[t].size(), false), used_b(b[t].size(), false);
        for (auto [ia, ib] : pairs) {
            size_t pa = 0, pb = 0;
            for (size_t i = 0; i < a[t].size(); ++i)
                if (a[t][i].id == ia && !used_a[i]) {
                    pa = i;
                    break;
                }
            for (size_t i = 0; i < b[t].size(); ++i)
                if (b[t][i].id == ib && !used_b[i]) {
                    pb = i;
                    break;
                }
            used_a[pa] = used_b[pb] = true;
            auto [x, y] = fusion::fuse_positions({{a[t][pa].x, a[t][pa].y}, {b[t][pb].x, b[t][pb].y}});
            out[t].push_back({ia, x, y});
        }
        for (size_t i = 0; i < a[t].size(); ++i)
            if (!used_a[i])
                out[t].push_back(a[t][i]);
        for (size_t i = 0; i < b[t].size(); ++i)
            if (!used_b[i])
                out[t].push_back({b[t][i].id + kBOffset, b[t][i].x, b[t][i].y});
    }
    return out;
}

std::vector<std::vector<std::pair<double, double>>> ground_truth_positions(const io::SceneFile &sf,
                                                                           const waveform::RadioConfig &rcfg,
                                                                           int sigma, long steps)
{
    std::vector<std::vector<std::pair<double, double>>> out;
    out.reserve(static_cast<size_t>(steps));
    for (long n = 0; n < steps; ++n) {
        long k = sf.calib_frames + n * sigma;
        out.push_back(scenesim::subject_positions(sf.scene, rcfg.t_c, k));
    }
    return out;
}

} // namespace aysense::pipeline
