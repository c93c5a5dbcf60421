// SPDX-License-Identifier: Apache-2.0
#include "aysense/fusion.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aysense/common.hpp"

namespace aysense::fusion {

std::pair<double, double> to_room_frame(const ApRegistration &reg, double local_x, double local_y)
{
    double b = deg2rad(reg.boresight_deg);
    double c = std::cos(b), s = std::sin(b);
    return {reg.x + c * local_x - s * local_y, reg.y + s * local_x + c * local_y};
}

FusedDecision fuse_decisions(const std::vector<std::pair<int, std::vector<double>>> &per_ap)
{
    if (per_ap.empty())
        throw std::invalid_argument("fuse_decisions: empty input");
    const size_t n = per_ap.front().second.size();
    FusedDecision best;
    best.confidence = -1.0;
    for (const auto &[ap, probs] : per_ap) {
        if (probs.size() != n)
            throw std::invalid_argument("fuse_decisions: probability vector length mismatch");
        for (size_t j = 0; j < probs.size(); ++j) {
            if (probs[j] > best.confidence) {
                best.confidence = probs[j];
                best.label = static_cast<int>(j);
                best.source_ap = ap;
            }
        }
    }
    return best;
}

std::pair<double, double> fuse_positions(const std::vector<std::pair<double, double>> &per_ap)
{
    if (per_ap.empty())
        throw std::invalid_argument("fuse_positions: empty input");
    double sx = 0.0, sy = 0.0;
    for (auto [x, y] : per_ap) {
        sx += x;
        sy += y;
    }
    double n = static_cast<double>(per_ap.size());
    return {sx / n, sy / n};
}

std::vector<std::pair<int, int>> cross_ap_match(const std::vector<TrackPoint> &tracks_a,
                                                const std::vector<TrackPoint> &tracks_b, double radius)
{
    std::vector<std::pair<int, int>> pairs;
    std::vector<bool> used_a(tracks_a.size(), false), used_b(tracks_b.size(), false);
    const double inf = std::numeric_limits<double>::infinity();
    while (true) {
        double best = inf;
        size_t bi = 0, bj = 0;
        bool found = false;
        for (size_t i = 0; i < tracks_a.size(); ++i) {
            if (used_a[i])
                continue;
            for (size_t j = 0; j < tracks_b.size(); ++j) {
                if (used_b[j])
                    continue;
                double d = std::hypot(tracks_a[i].x - tracks_b[j].x, tracks_a[i].y - tracks_b[j].y);
                if (d <= radius && d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        if (!found)
            break;
        used_a[bi] = used_b[bj] = true;
        pairs.emplace_back(tracks_a[bi].id, tracks_b[bj].id);
    }
    return pairs;
}

double detection_rate(const std::vector<std::vector<TrackPoint>> &tracks,
                      const std::vector<std::vector<std::pair<double, double>>> &truth, double cap)
{
    if (tracks.size() != truth.size())
        throw std::invalid_argument("detection_rate: step count mismatch");
    long total = 0, hit = 0;
    for (size_t t = 0; t < truth.size(); ++t) {
        for (auto [gx, gy] : truth[t]) {
            ++total;
            for (const auto &trk : tracks[t]) {
                if (std::hypot(trk.x - gx, trk.y - gy) <= cap) {
                    ++hit;
                    break;
                }
            }
        }
    }
    return total > 0 ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

} // namespace aysense::fusion
