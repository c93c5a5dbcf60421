// SPDX-License-Identifier: Apache-2.0
#include "aysense/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aysense::detect {

BackgroundProfile estimate_background(const std::vector<waveform::CirFrame> &frames)
{
    if (frames.empty())
        throw std::invalid_argument("estimate_background: no frames");
    const int nt = frames[0].n_taps;
    const int np = frames[0].n_patterns;
    BackgroundProfile bg;
    bg.n_taps = nt;
    bg.n_patterns = np;
    bg.mean_amp.assign(static_cast<size_t>(nt) * np, 0.0);
    for (const auto &f : frames) {
        if (f.n_taps != nt || f.n_patterns != np)
            throw std::invalid_argument("estimate_background: frame dimension mismatch");
        for (size_t i = 0; i < f.h.size(); ++i)
            bg.mean_amp[i] += std::abs(f.h[i]);
    }
    const double inv = 1.0 / static_cast<double>(frames.size());
    for (auto &v : bg.mean_amp)
        v *= inv;
    return bg;
}

std::vector<double> subtract_background(const waveform::CirFrame &frame, const BackgroundProfile &bg)
{
    if (frame.n_taps != bg.n_taps || frame.n_patterns != bg.n_patterns)
        throw std::invalid_argument("subtract_background: dimension mismatch");
    std::vector<double> fg(frame.h.size());
    for (size_t i = 0; i < frame.h.size(); ++i)
        fg[i] = std::max(std::abs(frame.h[i]) - bg.mean_amp[i], 0.0);
    return fg;
}

std::vector<double> path_strengths(const std::vector<double> &foreground, int n_taps, int n_patterns)
{
    std::vector<double> h(static_cast<size_t>(n_taps));
    for (int l = 0; l < n_taps; ++l) {
        double s = 0.0;
        for (int p = 0; p < n_patterns; ++p) {
            double v = foreground[static_cast<size_t>(l) * n_patterns + p];
            s += v * v;
        }
        h[static_cast<size_t>(l)] = std::sqrt(s);
    }
    return h;
}

std::vector<int> local_maxima(const std::vector<double> &h)
{
    std::vector<int> peaks;
    const int n = static_cast<int>(h.size());
    for (int i = 1; i < n - 1; ++i) {
        if (!(h[static_cast<size_t>(i)] > h[static_cast<size_t>(i) - 1]))
            continue;
        // walk a possible plateau; the leftmost tap represents it
        int j = i;
        while (j + 1 < n && h[static_cast<size_t>(j) + 1] == h[static_cast<size_t>(i)])
            ++j;
        if (j + 1 < n && h[static_cast<size_t>(j) + 1] < h[static_cast<size_t>(i)])
            peaks.push_back(i);
        i = j;
    }
    return peaks;
}

std::vector<Candidate> detect_candidates(const std::vector<double> &h, const std::vector<double> &distances,
                                         const std::vector<double> &foreground, int n_patterns,
                                         const DetectConfig &cfg)
{
    if (h.size() < 3)
        throw std::invalid_argument("detect_candidates: need at least 3 taps");

    const auto peaks = local_maxima(h);
    std::vector<Candidate> out;
    if (peaks.empty())
        return out;

    double pmax = 0.0, psum = 0.0;
    for (int i : peaks) {
        pmax = std::max(pmax, h[static_cast<size_t>(i)]);
        psum += h[static_cast<size_t>(i)];
    }
    const double pmean = psum / static_cast<double>(peaks.size());
    const double a_th = std::max({cfg.alpha_max * pmax, cfg.alpha_mean * pmean, cfg.alpha_abs});

    for (int i : peaks) {
        if (h[static_cast<size_t>(i)] < a_th)
            continue;
        Candidate c;
        c.tap = i;
        c.distance = distances[static_cast<size_t>(i)];
        c.strength = h[static_cast<size_t>(i)];
        if (!foreground.empty()) {
            c.foreground_sq.resize(static_cast<size_t>(n_patterns));
            for (int p = 0; p < n_patterns; ++p) {
                double v = foreground[static_cast<size_t>(i) * n_patterns + p];
                c.foreground_sq[static_cast<size_t>(p)] = v * v;
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace aysense::detect
