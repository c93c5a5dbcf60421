// SPDX-License-Identifier: Apache-2.0
//
// Multi-target tracking: one EKF per track with a constant-velocity model,
// polar (range, azimuth) measurements, gated global-nearest-neighbor
// association and tentative/confirmed/dead lifecycle management.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace aysense::track {

struct Observation {
    double d = 0.0;     // m
    double theta = 0.0; // degrees
    long t = 0;         // tracking step index
};

struct TrackState {
    Eigen::Vector4d x = Eigen::Vector4d::Zero(); // [x, y, vx, vy]
    Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
};

enum class Status { tentative, confirmed, dead };

struct Track {
    int id = 0;
    TrackState state;
    int hits = 0;   // consecutive updates
    int misses = 0; // consecutive misses
    Status status = Status::tentative;
};

struct TrackerConfig {
    double q = 0.5;         // process noise intensity, m^2/s^3
    double r_d = 0.1;       // range std, m
    double r_theta = 2.0;   // angle std, degrees
    double gate = 9.21;     // chi^2 99%, 2 dof
    int confirm_hits = 3;
    int kill_misses = 10;
    double init_pos_std = 0.5;  // new-track position std, m
    double init_vel_std = 2.0;  // new-track velocity std, m/s
    double spawn_radius = 0.6;  // no new track within this range of a live one, m
};

// Polar measurement [sqrt(x^2+y^2), atan2(y, x) deg] and its Jacobian.
Eigen::Vector2d measure(const Eigen::Vector4d &x);
Eigen::Matrix<double, 2, 4> measure_jacobian(const Eigen::Vector4d &x);

double wrap_deg(double a); // to (-180, 180]

void predict(Track &trk, double dt, const TrackerConfig &cfg);
void update(Track &trk, const Observation &obs, const TrackerConfig &cfg);

struct Association {
    std::vector<std::pair<int, int>> matches; // (track index, observation index)
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_observations;
};

// Greedy global-nearest-neighbor on Mahalanobis distance in measurement
// space, gated by cfg.gate.
Association associate(const std::vector<Track> &tracks, const std::vector<Observation> &observations,
                      const TrackerConfig &cfg);

class Tracker {
  public:
    Tracker(TrackerConfig cfg, double dt) : cfg_(cfg), dt_(dt) {}

    // Predict, associate, update, manage lifecycle; returns snapshots of the
    // confirmed tracks. t must be strictly increasing across calls.
    std::vector<Track> step(const std::vector<Observation> &observations, long t);

    const std::vector<Track> &tracks() const { return tracks_; }
    const TrackerConfig &config() const { return cfg_; }
    double dt() const { return dt_; }

  private:
    TrackerConfig cfg_;
    double dt_;
    std::vector<Track> tracks_;
    int next_id_ = 0;
    std::optional<long> last_t_;
};

} // namespace aysense::track
