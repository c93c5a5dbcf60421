// SPDX-License-Identifier: Apache-2.0
#include "aysense/waveform.hpp"

#include <cmath>
#include <stdexcept>

namespace aysense::waveform {

GolayPair golay_pair(int n)
{
    if (n < 1 || (n & (n - 1)) != 0)
        throw std::invalid_argument("golay_pair: length must be a power of two");

    std::vector<int> a{1}, b{1};
    while (static_cast<int>(a.size()) < n) {
        std::vector<int> a2(a), b2(a);
        a2.insert(a2.end(), b.begin(), b.end());
        for (int v : b)
            b2.push_back(-v);
        a = std::move(a2);
        b = std::move(b2);
    }
    return GolayPair{std::move(a), std::move(b)};
}

TrnUnit build_trn_unit(const GolayPair &pair)
{
    const auto &a = pair.ga;
    const auto &b = pair.gb;
    TrnUnit u;
    u.samples.reserve(6 * a.size());
    const int signs_b[3] = {-1, +1, -1};
    for (int blk = 0; blk < 3; ++blk) {
        for (int v : a)
            u.samples.push_back(static_cast<double>(v));
        for (int v : b)
            u.samples.push_back(static_cast<double>(signs_b[blk] * v));
    }
    return u;
}

namespace {

// Correlation of rx with a +/-1 template at a single offset:
// sum_m tmpl[m] * rx[offset + m].
cxd correlate_at(const std::vector<cxd> &rx, const std::vector<int> &tmpl, size_t offset)
{
    cxd acc = 0.0;
    for (size_t m = 0; m < tmpl.size(); ++m)
        acc += static_cast<double>(tmpl[m]) * rx[offset + m];
    return acc;
}

} // namespace

std::vector<cxd> estimate_cir(const std::vector<cxd> &rx, const GolayPair &pair, int n_taps)
{
    const size_t n = pair.ga.size();
    if (n_taps < 1)
        throw std::invalid_argument("estimate_cir: n_taps must be positive");
    if (rx.size() < 6 * n + static_cast<size_t>(n_taps))
        throw std::invalid_argument("estimate_cir: rx shorter than TRN length + n_taps");

    // TRN blocks: 0:+a 1:-b 2:+a 3:+b 4:+a 5:-b.
    // Anchoring the Ga correlator at blocks 2 and 4 makes the leakage from
    // the neighbouring b blocks (-b/+b around block 2, +b/-b around block 4)
    // cancel, leaving 2*R_aa(lag). Likewise Gb at block 3 minus Gb at
    // block 1 leaves 2*R_bb(lag). The sum is 4N * delta(lag) by
    // complementarity, so each tap divides by 4N.
    std::vector<cxd> taps(static_cast<size_t>(n_taps));
    const double scale = 1.0 / (4.0 * static_cast<double>(n));
    for (int l = 0; l < n_taps; ++l) {
        cxd c = correlate_at(rx, pair.ga, 2 * n + l) + correlate_at(rx, pair.ga, 4 * n + l) +
                correlate_at(rx, pair.gb, 3 * n + l) - correlate_at(rx, pair.gb, 1 * n + l);
        taps[static_cast<size_t>(l)] = c * scale;
    }
    return taps;
}

double tap_spacing(const RadioConfig &cfg)
{
    return kSpeedOfLight / (4.0 * cfg.bandwidth);
}

double tap_to_distance(int tap, const RadioConfig &cfg)
{
    return static_cast<double>(tap) * tap_spacing(cfg);
}

int distance_to_tap(double d, const RadioConfig &cfg)
{
    long t = std::lround(d / tap_spacing(cfg));
    if (t < 0)
        t = 0;
    return static_cast<int>(t);
}

} // namespace aysense::waveform
