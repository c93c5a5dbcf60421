// SPDX-License-Identifier: Apache-2.0
//
// Synthetic CIR frame generation: moving human subjects modelled as small
// scatterer clusters, static reflectors, beam-pattern codebooks, path loss,
// occlusion, noise and a per-capture carrier frequency offset.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aysense/common.hpp"
#include "aysense/waveform.hpp"

namespace aysense::scenesim {

// Normalized gain curve over a uniform azimuth grid.
struct BeamPattern {
    std::vector<double> gains; // in [0,1], max 1
};

struct Codebook {
    std::vector<BeamPattern> patterns;
    std::vector<double> steering_deg;
    double fov_min_deg = -45.0;
    double fov_max_deg = 45.0;

    int grid_size() const { return patterns.empty() ? 0 : static_cast<int>(patterns[0].gains.size()); }
    double grid_angle(int i) const
    {
        int n = grid_size();
        return fov_min_deg + (fov_max_deg - fov_min_deg) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    // Gain of pattern p at an arbitrary azimuth, linearly interpolated on the
    // grid and clamped to the FoV edges.
    double gain(int p, double theta_deg) const;
};

// Raised-cosine mainlobes on a 0.05 sidelobe floor, steered uniformly over
// the field of view. Stand-in for measured array patterns.
Codebook synth_codebook(int n_p, double fov_deg = 90.0, double beamwidth_deg = 15.0, int grid_points = 181);

enum class Role { torso, limb };

struct Scatterer {
    double offset_x = 0.0; // body frame, m
    double offset_y = 0.0;
    double reflectivity = 0.0;
    Role role = Role::torso;
    double osc_amp = 0.0;   // radial oscillation peak speed, m/s
    double osc_freq = 0.0;  // Hz
    double osc_phase = 0.0; // rad
    // Oscillation gating in whole oscillation cycles (0 = always on).
    int duty_on_cycles = 0;
    int duty_off_cycles = 0;
};

enum class Activity { walking, running, sitting, waving };

Activity activity_from_string(const std::string &s);
std::string activity_to_string(Activity a);

// Default scatterer cluster (1 torso + 4 limbs) for an activity.
std::vector<Scatterer> activity_scatterers(Activity a);

struct Waypoint {
    double t = 0.0; // seconds
    double x = 0.0;
    double y = 0.0;
};

// Activity change at a given scene time; oscillation clocks restart at t.
struct ActivityPhase {
    double t = 0.0;
    Activity activity = Activity::walking;
};

struct Subject {
    int id = 0;
    std::vector<Waypoint> trajectory; // times strictly increasing
    Activity activity = Activity::walking;
    std::vector<Scatterer> scatterers;
    std::vector<ActivityPhase> phases; // optional; empty = single activity
};

Subject make_subject(int id, Activity act, std::vector<Waypoint> trajectory);

struct StaticReflector {
    double x = 0.0;
    double y = 0.0;
    double reflectivity = 0.0;
};

struct ApPose {
    double x = 0.0;
    double y = 0.0;
    double boresight_deg = 90.0; // room-frame azimuth of the array normal
};

struct Scene {
    double room_w = 6.1;
    double room_h = 7.7;
    std::vector<Subject> subjects;
    std::vector<StaticReflector> reflectors;
    std::vector<ApPose> ap_poses;
    double noise_std = 0.0;      // per real/imag component
    double cfo_range_hz = 40.0;  // per-capture uniform draw bound
    std::uint64_t seed = 1;
    double duration_s = 5.0;
};

struct ScattererState {
    int subject_id = -1; // -1 for static reflectors
    double x = 0.0;      // world position, m
    double y = 0.0;
    double vx = 0.0; // translation velocity, m/s
    double vy = 0.0;
    double reflectivity = 0.0;
    Role role = Role::torso;
    double osc_v = 0.0;    // instantaneous radial oscillation speed, m/s
    double osc_disp = 0.0; // integrated radial oscillation displacement, m
};

// Subject kinematics at packet index k (time k * t_c). Subjects hold their
// final waypoint with zero velocity once the trajectory ends.
std::vector<ScattererState> scene_step(const Scene &scene, double t_c, long k);

// Torso world positions per subject, same order as scene.subjects.
std::vector<std::pair<double, double>> subject_positions(const Scene &scene, double t_c, long k);

// Signed radial velocity of a scatterer as seen from an AP; moving away from
// the AP is positive. Includes the oscillatory component.
double radial_velocity(const ScattererState &s, const ApPose &ap);

// Azimuth of a world point relative to the AP boresight, degrees.
double azimuth_from_ap(const ApPose &ap, double x, double y);

// Whether the AP->target segment crosses the 0.3 m torso disc of a subject
// other than owner_id.
bool occluded(const Scene &scene, double t_c, long k, const ApPose &ap, double tx, double ty, int owner_id);

// Synthesize the CIR frame of one AP at packet k. Deterministic in
// (rng_seed, ap_index, k); the CFO is a per-(seed, ap) constant frequency
// offset applied as a common rotation exp(j 2 pi cfo k t_c).
waveform::CirFrame synth_cir_frame(const Scene &scene, int ap_index, const Codebook &cb,
                                   const waveform::RadioConfig &cfg, long k, std::uint64_t rng_seed,
                                   bool include_subjects = true);

} // namespace aysense::scenesim
