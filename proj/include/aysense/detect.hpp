// SPDX-License-Identifier: Apache-2.0
//
// Background estimation/subtraction and per-frame candidate detection.
#pragma once

#include <vector>

#include "aysense/waveform.hpp"

namespace aysense::detect {

// Entrywise mean CIR amplitude over a static window, taps x patterns.
struct BackgroundProfile {
    int n_taps = 0;
    int n_patterns = 0;
    std::vector<double> mean_amp; // row-major

    double &at(int tap, int p) { return mean_amp[static_cast<size_t>(tap) * n_patterns + p]; }
    double at(int tap, int p) const { return mean_amp[static_cast<size_t>(tap) * n_patterns + p]; }
};

struct DetectConfig {
    double alpha_max = 0.25;
    double alpha_mean = 2.0;
    double alpha_abs = 2.5e-3;
    int k_static = 128;
};

struct Candidate {
    int tap = 0;
    double distance = 0.0; // m
    double strength = 0.0; // L2 norm across patterns
    std::vector<double> foreground_sq; // squared foreground amplitudes per pattern
};

BackgroundProfile estimate_background(const std::vector<waveform::CirFrame> &frames);

// max(|h| - bg, 0) entrywise; taps x patterns row-major.
std::vector<double> subtract_background(const waveform::CirFrame &frame, const BackgroundProfile &bg);

// L2 norm across the pattern dimension of each tap row.
std::vector<double> path_strengths(const std::vector<double> &foreground, int n_taps, int n_patterns);

// Strict local maxima of h above the dynamic threshold
// A_th = max(alpha_max * max_i h'_i, alpha_mean * mean_i h'_i, alpha_abs),
// where h'_i ranges over the local maxima. Plateaus keep the leftmost tap;
// boundary taps are excluded.
std::vector<Candidate> detect_candidates(const std::vector<double> &h, const std::vector<double> &distances,
                                         const std::vector<double> &foreground, int n_patterns,
                                         const DetectConfig &cfg);

// Peak indices only (shared by detect_candidates and test oracles).
std::vector<int> local_maxima(const std::vector<double> &h);

} // namespace aysense::detect
