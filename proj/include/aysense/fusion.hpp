// SPDX-License-Identifier: Apache-2.0
//
// Multi-AP combination: decision fusion, position averaging, cross-AP track
// matching and detection-rate scoring against simulator ground truth.
#pragma once

#include <utility>
#include <vector>

namespace aysense::fusion {

struct ApRegistration {
    int ap_id = 0;
    double x = 0.0;
    double y = 0.0;
    double boresight_deg = 90.0;
};

// AP-local track coordinates (x along boresight) to the room frame.
std::pair<double, double> to_room_frame(const ApRegistration &reg, double local_x, double local_y);

struct FusedDecision {
    int label = 0;
    double confidence = 0.0;
    int source_ap = 0;
};

// Highest probability across all (ap, class) entries decides; ties break to
// the smaller ap id, then the smaller label.
FusedDecision fuse_decisions(const std::vector<std::pair<int, std::vector<double>>> &per_ap);

// Arithmetic mean of the supplied room-frame positions.
std::pair<double, double> fuse_positions(const std::vector<std::pair<double, double>> &per_ap);

struct TrackPoint {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
};

// Greedy nearest pairing under a distance cap; unpaired tracks remain
// single-AP subjects.
std::vector<std::pair<int, int>> cross_ap_match(const std::vector<TrackPoint> &tracks_a,
                                                const std::vector<TrackPoint> &tracks_b, double radius = 0.75);

// Fraction of (step, subject) pairs with a confirmed track within 0.5 m of
// the true torso position. tracks[t] and truth[t] are per-step lists.
double detection_rate(const std::vector<std::vector<TrackPoint>> &tracks,
                      const std::vector<std::vector<std::pair<double, double>>> &truth, double cap = 0.5);

} // namespace aysense::fusion
