// SPDX-License-Identifier: Apache-2.0
//
// Golay complementary sequences, TRN field assembly and correlation-based
// monostatic CIR estimation with tap-to-distance mapping.
#pragma once

#include <vector>

#include "aysense/common.hpp"

namespace aysense::waveform {

// Complementary pair: the aperiodic autocorrelations of ga and gb sum to
// 2N at lag 0 and cancel exactly at every other lag.
struct GolayPair {
    std::vector<int> ga;
    std::vector<int> gb;
};

// One in-packet training unit: six Golay blocks {+Ga, -Gb, +Ga, +Gb, +Ga, -Gb}.
struct TrnUnit {
    std::vector<double> samples;
};

struct RadioConfig {
    double f_o = 60.48e9;           // carrier, Hz
    double bandwidth = 1.76e9;      // Hz
    double t_c = 0.27e-3;           // inter-packet interval, s
    int samples_per_symbol = 2;     // 3.52 GSPS at default bandwidth
    int n_taps = 256;               // CIR length L
    int n_patterns = 12;            // beam patterns per scan N_p
};

// One CIR scan: n_taps x n_patterns complex gains at slow-time index k.
struct CirFrame {
    long k = 0;
    int n_taps = 0;
    int n_patterns = 0;
    std::vector<cxd> h; // row-major, h[tap * n_patterns + pattern]

    cxd &at(int tap, int pattern) { return h[static_cast<size_t>(tap) * n_patterns + pattern]; }
    const cxd &at(int tap, int pattern) const { return h[static_cast<size_t>(tap) * n_patterns + pattern]; }
};

inline CirFrame make_frame(long k, int n_taps, int n_patterns)
{
    return CirFrame{k, n_taps, n_patterns, std::vector<cxd>(static_cast<size_t>(n_taps) * n_patterns)};
}

// Recursive doubling a' = (a|b), b' = (a|-b) from the seed pair ([1], [1]).
// Throws std::invalid_argument if n is not a power of two.
GolayPair golay_pair(int n);

TrnUnit build_trn_unit(const GolayPair &pair);

// Complementary-pair combining correlator. rx must hold at least 6N + n_taps
// samples. The returned vector recovers any channel of up to N taps exactly
// in the noiseless case.
std::vector<cxd> estimate_cir(const std::vector<cxd> &rx, const GolayPair &pair, int n_taps);

// d_l = c*l / (4B); the tap index is a sample count at 2x oversampling.
double tap_to_distance(int tap, const RadioConfig &cfg);

// Tap spacing c/(4B) in meters.
double tap_spacing(const RadioConfig &cfg);

// Nearest tap for a given one-way distance in meters.
int distance_to_tap(double d, const RadioConfig &cfg);

} // namespace aysense::waveform
