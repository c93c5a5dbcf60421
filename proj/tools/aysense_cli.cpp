// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: scene simulation to capture files, tracking,
// micro-Doppler export, classifier training/evaluation and the end-to-end
// sensing pipeline.
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aysense/capture.hpp"
#include "aysense/classify.hpp"
#include "aysense/pipeline.hpp"
#include "aysense/scene_io.hpp"

using namespace aysense;

namespace {

io::PipelineConfig load_config_or_default(const std::string &path)
{
    if (path.empty())
        return io::PipelineConfig{};
    return io::load_pipeline_config(path);
}

scenesim::Codebook make_codebook(const io::PipelineConfig &cfg)
{
    return scenesim::synth_codebook(cfg.codebook_patterns);
}

std::ofstream open_out(const std::string &path)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open output file: " + path);
    f.precision(10);
    return f;
}

void write_pgm(const std::string &path, const microdoppler::Spectrogram &sp)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open output file: " + path);
    f << "P5\n" << sp.cols << " " << sp.rows << "\n255\n";
    // top row = highest velocity
    for (int r = sp.rows - 1; r >= 0; --r)
        for (int c = 0; c < sp.cols; ++c) {
            double v = std::clamp(sp.at(r, c), 0.0, 1.0);
            f.put(static_cast<char>(static_cast<int>(v * 255.0 + 0.5)));
        }
}

// Registrations from the config when present, otherwise from scene AP poses.
std::vector<fusion::ApRegistration> registrations(const io::PipelineConfig &cfg, const scenesim::Scene &scene)
{
    if (!cfg.aps.empty())
        return cfg.aps;
    std::vector<fusion::ApRegistration> regs;
    for (size_t i = 0; i < scene.ap_poses.size(); ++i)
        regs.push_back({static_cast<int>(i), scene.ap_poses[i].x, scene.ap_poses[i].y,
                        scene.ap_poses[i].boresight_deg});
    return regs;
}

int cmd_simulate(const std::string &scene_path, const std::string &config_path, std::uint64_t seed_override,
                 bool has_seed, const std::string &out)
{
    auto cfg = load_config_or_default(config_path);
    auto sf = io::load_scene(scene_path);
    std::uint64_t seed = has_seed ? seed_override : sf.scene.seed;
    auto cb = make_codebook(cfg);
    auto hash = capture::codebook_hash(cb);

    for (size_t ap = 0; ap < sf.scene.ap_poses.size(); ++ap) {
        auto frames = pipeline::simulate_frames(sf, cb, cfg.radio, static_cast<int>(ap), seed);
        auto header = capture::make_header(cfg.radio, static_cast<std::uint32_t>(ap), hash, frames.size());
        std::string path = out + "_ap" + std::to_string(ap) + ".aycir";
        capture::write_capture(path, header, frames);
        std::cout << "wrote " << path << " (" << frames.size() << " frames)\n";
    }

    // per-step torso ground truth for detection-rate scoring
    long total = static_cast<long>(std::floor(sf.scene.duration_s / cfg.radio.t_c));
    long steps = pipeline::n_steps(total, sf.calib_frames, cfg.stft_sigma);
    auto truth = pipeline::ground_truth_positions(sf, cfg.radio, cfg.stft_sigma, steps);
    auto f = open_out(out + "_gt.csv");
    f << "step,t_s,subject,x,y\n";
    for (long n = 0; n < steps; ++n) {
        double t = (sf.calib_frames + n * cfg.stft_sigma) * cfg.radio.t_c;
        for (size_t s = 0; s < truth[static_cast<size_t>(n)].size(); ++s) {
            auto [x, y] = truth[static_cast<size_t>(n)][s];
            f << n << ',' << t << ',' << sf.scene.subjects[s].id << ',' << x << ',' << y << '\n';
        }
    }
    std::cout << "wrote " << out << "_gt.csv\n";
    return 0;
}

struct LoadedCapture {
    capture::CaptureHeader header;
    std::vector<waveform::CirFrame> frames;
};

std::vector<LoadedCapture> load_captures(const std::vector<std::string> &paths, const io::PipelineConfig &cfg,
                                         const scenesim::Codebook &cb)
{
    auto hash = capture::codebook_hash(cb);
    std::vector<LoadedCapture> caps;
    for (const auto &p : paths) {
        auto [h, frames] = capture::read_capture(p);
        if (h.codebook_hash != hash)
            throw std::runtime_error("codebook hash mismatch in " + p +
                                     " (capture was produced with a different codebook)");
        if (h.n_taps != static_cast<std::uint32_t>(cfg.radio.n_taps) ||
            h.n_patterns != static_cast<std::uint32_t>(cfg.radio.n_patterns))
            throw std::runtime_error("capture dimensions do not match the configured radio: " + p);
        caps.push_back({h, std::move(frames)});
    }
    std::sort(caps.begin(), caps.end(),
              [](const LoadedCapture &a, const LoadedCapture &b) { return a.header.ap_id < b.header.ap_id; });
    return caps;
}

std::vector<std::vector<std::pair<double, double>>> load_gt(const std::string &path, long steps)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open ground truth: " + path);
    std::vector<std::vector<std::pair<double, double>>> truth(static_cast<size_t>(steps));
    std::string line;
    std::getline(f, line); // header
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (cells.size() != 5)
            throw std::runtime_error("bad ground-truth row: " + line);
        long step = std::stol(cells[0]);
        if (step >= 0 && step < steps)
            truth[static_cast<size_t>(step)].emplace_back(std::stod(cells[3]), std::stod(cells[4]));
    }
    return truth;
}

int cmd_track(const std::vector<std::string> &caps_paths, const std::string &config_path,
              const std::string &gt_path, const std::string &out)
{
    auto cfg = load_config_or_default(config_path);
    auto cb = make_codebook(cfg);
    auto caps = load_captures(caps_paths, cfg, cb);

    std::vector<pipeline::ApRunResult> runs;
    std::vector<std::vector<std::vector<fusion::TrackPoint>>> room;
    std::vector<fusion::ApRegistration> regs = cfg.aps;
    for (const auto &c : caps) {
        auto run = pipeline::run_ap(c.frames, cb, cfg, static_cast<int>(c.header.ap_id), false);
        fusion::ApRegistration reg{static_cast<int>(c.header.ap_id), 0.0, 0.0, 90.0};
        for (const auto &r : regs)
            if (r.ap_id == static_cast<int>(c.header.ap_id))
                reg = r;
        room.push_back(pipeline::room_tracks(run, reg));
        runs.push_back(std::move(run));
    }

    auto f = open_out(out + "_tracks.csv");
    f << "step,ap,track_id,x_local,y_local,x_room,y_room\n";
    for (size_t a = 0; a < runs.size(); ++a)
        for (size_t n = 0; n < runs[a].steps.size(); ++n)
            for (size_t i = 0; i < runs[a].steps[n].size(); ++i) {
                const auto &trk = runs[a].steps[n][i];
                const auto &pt = room[a][n][i];
                f << n << ',' << runs[a].ap_id << ',' << trk.id << ',' << trk.state.x(0) << ','
                  << trk.state.x(1) << ',' << pt.x << ',' << pt.y << '\n';
            }

    auto fused = room.size() >= 2 ? pipeline::fuse_room_tracks(room[0], room[1]) : room[0];
    auto ff = open_out(out + "_fused.csv");
    ff << "step,id,x,y\n";
    for (size_t n = 0; n < fused.size(); ++n)
        for (const auto &pt : fused[n])
            ff << n << ',' << pt.id << ',' << pt.x << ',' << pt.y << '\n';

    if (!gt_path.empty()) {
        auto truth = load_gt(gt_path, static_cast<long>(fused.size()));
        auto fr = open_out(out + "_rate.csv");
        fr << "scope,detection_rate\n";
        for (size_t a = 0; a < room.size(); ++a) {
            double r = fusion::detection_rate(room[a], truth);
            fr << "ap" << runs[a].ap_id << ',' << r << '\n';
            std::cout << "ap" << runs[a].ap_id << " detection rate: " << r << '\n';
        }
        double r = fusion::detection_rate(fused, truth);
        fr << "fused," << r << '\n';
        std::cout << "fused detection rate: " << r << '\n';
    }
    std::cout << "wrote " << out << "_tracks.csv and " << out << "_fused.csv\n";
    return 0;
}

int cmd_mud(const std::vector<std::string> &caps_paths, const std::string &config_path, const std::string &out)
{
    auto cfg = load_config_or_default(config_path);
    auto cb = make_codebook(cfg);
    auto caps = load_captures(caps_paths, cfg, cb);
    int written = 0;
    for (const auto &c : caps) {
        auto run = pipeline::run_ap(c.frames, cb, cfg, static_cast<int>(c.header.ap_id), true);
        std::map<int, int> per_track;
        for (const auto &w : run.windows) {
            auto sp = microdoppler::preprocess(w, cfg.md);
            int idx = per_track[w.subject]++;
            std::string base = out + "_ap" + std::to_string(run.ap_id) + "_trk" + std::to_string(w.subject) +
                               "_w" + std::to_string(idx);
            classify::save_spectrogram_csv(base + ".csv", sp.values, sp.rows, sp.cols, sp.velocity_axis);
            write_pgm(base + ".pgm", sp);
            ++written;
        }
    }
    std::cout << "wrote " << written << " spectrogram windows\n";
    return 0;
}

int cmd_train(const std::string &manifest, const std::string &config_path, std::uint64_t seed,
              const std::string &out)
{
    auto cfg = load_config_or_default(config_path);
    auto ds = classify::load_manifest(manifest);
    int n_classes = 0;
    for (int l : ds.labels)
        n_classes = std::max(n_classes, l + 1);

    classify::NetworkSpec spec;
    spec.in_h = ds.rows;
    spec.in_w = ds.cols;
    spec.n_classes = n_classes;
    classify::Network<float> net(spec, seed);
    auto tcfg = cfg.train;
    tcfg.seed = seed;
    auto history = net.train(ds, tcfg);
    net.save(out);
    std::cout << "epochs: " << history.size() << ", final loss: " << (history.empty() ? 0.0 : history.back())
              << ", train accuracy: " << net.accuracy(ds) << '\n';
    std::cout << "wrote " << out << '\n';
    return 0;
}

int cmd_eval(const std::string &manifest, const std::string &model, const std::string &out)
{
    auto ds = classify::load_manifest(manifest);
    auto net = classify::Network<float>::load(model);
    const int nc = net.spec().n_classes;
    std::vector<std::vector<long>> confusion(static_cast<size_t>(nc), std::vector<long>(static_cast<size_t>(nc), 0));
    long ok = 0;
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        auto [label, conf] = net.predict(ds.samples[i], ds.rows, ds.cols);
        (void)conf;
        int truth = ds.labels[i];
        if (truth >= 0 && truth < nc)
            ++confusion[static_cast<size_t>(truth)][static_cast<size_t>(label)];
        if (label == truth)
            ++ok;
    }
    double acc = static_cast<double>(ok) / static_cast<double>(ds.samples.size());
    std::cout << "accuracy: " << acc << '\n';
    if (!out.empty()) {
        auto f = open_out(out);
        f << "truth\\pred";
        for (int j = 0; j < nc; ++j)
            f << ',' << j;
        f << '\n';
        for (int i = 0; i < nc; ++i) {
            f << i;
            for (int j = 0; j < nc; ++j)
                f << ',' << confusion[static_cast<size_t>(i)][static_cast<size_t>(j)];
            f << '\n';
        }
        std::cout << "wrote " << out << '\n';
    }
    return 0;
}

int cmd_e2e(const std::string &scene_path, const std::string &config_path, const std::string &model,
            std::uint64_t seed_override, bool has_seed, const std::string &out)
{
    auto cfg = load_config_or_default(config_path);
    auto sf = io::load_scene(scene_path);
    std::uint64_t seed = has_seed ? seed_override : sf.scene.seed;
    auto cb = make_codebook(cfg);
    auto net = classify::Network<float>::load(model);
    auto regs = registrations(cfg, sf.scene);

    struct Classified {
        long t0;
        int ap;
        int track;
        std::vector<double> probs;
    };
    std::vector<Classified> results;
    std::vector<std::vector<std::vector<fusion::TrackPoint>>> room;
    for (size_t ap = 0; ap < sf.scene.ap_poses.size(); ++ap) {
        auto frames = pipeline::simulate_frames(sf, cb, cfg.radio, static_cast<int>(ap), seed);
        auto run = pipeline::run_ap(frames, cb, cfg, static_cast<int>(ap), true);
        room.push_back(pipeline::room_tracks(run, regs[ap]));
        for (const auto &w : run.windows) {
            auto sp = microdoppler::preprocess(w, cfg.md);
            if (sp.rows != net.spec().in_h || sp.cols != net.spec().in_w)
                throw std::runtime_error("spectrogram shape does not match the model input");
            auto probs = net.forward(
                [&] {
                    classify::Batch<float> in;
                    in.resize(1, sp.rows, sp.cols, 1);
                    for (size_t i = 0; i < sp.values.size(); ++i)
                        in.v[i] = static_cast<float>(sp.values[i]);
                    return in;
                }(),
                classify::Network<float>::eval_mode());
            results.push_back({w.t0, static_cast<int>(ap), w.subject,
                               std::vector<double>(probs.begin(), probs.end())});
        }
    }

    // Map each (ap, track, t0) onto a fused subject key: the first AP's track
    // id when the track is paired at step t0, a disambiguated id otherwise.
    auto fused_key = [&](const Classified &c) -> long {
        if (room.size() < 2)
            return c.track;
        size_t step = static_cast<size_t>(std::min<long>(c.t0, static_cast<long>(room[0].size()) - 1));
        auto pairs = fusion::cross_ap_match(room[0][step], room[1][step]);
        for (auto [ia, ib] : pairs) {
            if (c.ap == 0 && c.track == ia)
                return ia;
            if (c.ap == 1 && c.track == ib)
                return ia;
        }
        return c.ap == 0 ? c.track : c.track + (1L << 20);
    };

    // group per (fused subject, window start) and apply decision fusion
    std::map<std::pair<long, long>, std::vector<std::pair<int, std::vector<double>>>> groups;
    std::map<std::pair<long, long>, std::vector<int>> group_tracks;
    for (const auto &c : results) {
        auto key = std::make_pair(fused_key(c), c.t0);
        groups[key].emplace_back(c.ap, c.probs);
        group_tracks[key].push_back(c.track);
    }

    auto f = open_out(out + "_timeline.csv");
    f << "subject,window_start_step,label,confidence,source_ap\n";
    for (const auto &[key, per_ap] : groups) {
        auto d = fusion::fuse_decisions(per_ap);
        f << key.first << ',' << key.second << ',' << d.label << ',' << d.confidence << ',' << d.source_ap
          << '\n';
    }
    std::cout << "wrote " << out << "_timeline.csv (" << groups.size() << " fused windows)\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"802.11ay joint communication-and-sensing pipeline"};
    app.require_subcommand(1);

    std::string scene, config, out = "aysense_out", gt, manifest, model;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::vector<std::string> captures;

    auto add_seed = [&](CLI::App *cmd) {
        cmd->add_option("--seed", seed, "root seed (overrides the scene seed)")->each([&](const std::string &) {
            has_seed = true;
        });
    };

    auto *sim = app.add_subcommand("simulate", "synthesize capture files from a scene description");
    sim->add_option("--scene", scene, "scene JSON")->required();
    sim->add_option("--config", config, "pipeline config JSON");
    sim->add_option("--out", out, "output path prefix");
    add_seed(sim);

    auto *trk = app.add_subcommand("track", "detect, localize and track subjects in captures");
    trk->add_option("captures", captures, "capture files, one per AP")->required();
    trk->add_option("--config", config, "pipeline config JSON");
    trk->add_option("--gt", gt, "ground-truth CSV for detection-rate scoring");
    trk->add_option("--out", out, "output path prefix");

    auto *mud = app.add_subcommand("mud", "export micro-Doppler spectrogram windows per track");
    mud->add_option("captures", captures, "capture files, one per AP")->required();
    mud->add_option("--config", config, "pipeline config JSON");
    mud->add_option("--out", out, "output path prefix");

    auto *train = app.add_subcommand("train", "train the activity classifier");
    train->add_option("--manifest", manifest, "dataset manifest")->required();
    train->add_option("--config", config, "pipeline config JSON");
    train->add_option("--out", out, "checkpoint path");
    train->add_option("--seed", seed, "training seed");

    auto *ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    ev->add_option("--manifest", manifest, "dataset manifest")->required();
    ev->add_option("--model", model, "checkpoint path")->required();
    ev->add_option("--out", out, "confusion matrix CSV");

    auto *e2e = app.add_subcommand("e2e", "simulate, track, extract and classify in one pass");
    e2e->add_option("--scene", scene, "scene JSON")->required();
    e2e->add_option("--config", config, "pipeline config JSON");
    e2e->add_option("--model", model, "checkpoint path")->required();
    e2e->add_option("--out", out, "output path prefix");
    add_seed(e2e);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(scene, config, seed, has_seed, out);
        if (trk->parsed())
            return cmd_track(captures, config, gt, out);
        if (mud->parsed())
            return cmd_mud(captures, config, out);
        if (train->parsed())
            return cmd_train(manifest, config, seed, out);
        if (ev->parsed())
            return cmd_eval(manifest, model, out);
        if (e2e->parsed())
            return cmd_e2e(scene, config, model, seed, has_seed, out);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
