// SPDX-License-Identifier: Apache-2.0
#include "aysense/scenesim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aysense::scenesim {

double Codebook::gain(int p, double theta_deg) const
{
    const auto &g = patterns[static_cast<size_t>(p)].gains;
    const int n = static_cast<int>(g.size());
    const double step = (fov_max_deg - fov_min_deg) / static_cast<double>(n - 1);
    double u = (theta_deg - fov_min_deg) / step;
    if (u <= 0.0)
        return g.front();
    if (u >= static_cast<double>(n - 1))
        return g.back();
    int i = static_cast<int>(u);
    double f = u - static_cast<double>(i);
    return g[static_cast<size_t>(i)] * (1.0 - f) + g[static_cast<size_t>(i) + 1] * f;
}

Codebook synth_codebook(int n_p, double fov_deg, double beamwidth_deg, int grid_points)
{
    if (n_p < 2)
        throw std::invalid_argument("synth_codebook: need at least 2 patterns");
    if (beamwidth_deg <= 0.0)
        throw std::invalid_argument("synth_codebook: beamwidth must be positive");

    constexpr double kFloor = 0.05;
    Codebook cb;
    cb.fov_min_deg = -fov_deg / 2.0;
    cb.fov_max_deg = fov_deg / 2.0;
    for (int p = 0; p < n_p; ++p) {
        double steer = cb.fov_min_deg + fov_deg * static_cast<double>(p) / static_cast<double>(n_p - 1);
        cb.steering_deg.push_back(steer);
        BeamPattern bp;
        bp.gains.resize(static_cast<size_t>(grid_points));
        for (int i = 0; i < grid_points; ++i) {
            double theta = cb.fov_min_deg + fov_deg * static_cast<double>(i) / static_cast<double>(grid_points - 1);
            double d = std::abs(theta - steer);
            double g = kFloor;
            if (d < beamwidth_deg)
                g = kFloor + (1.0 - kFloor) * 0.5 * (1.0 + std::cos(kPi * d / beamwidth_deg));
            bp.gains[static_cast<size_t>(i)] = g;
        }
        cb.patterns.push_back(std::move(bp));
    }
    return cb;
}

Activity activity_from_string(const std::string &s)
{
    if (s == "walking")
        return Activity::walking;
    if (s == "running")
        return Activity::running;
    if (s == "sitting")
        return Activity::sitting;
    if (s == "waving")
        return Activity::waving;
    throw std::invalid_argument("unknown activity: " + s);
}

std::string activity_to_string(Activity a)
{
    switch (a) {
    case Activity::walking:
        return "walking";
    case Activity::running:
        return "running";
    case Activity::sitting:
        return "sitting";
    case Activity::waving:
        return "waving";
    }
    return "?";
}

std::vector<Scatterer> activity_scatterers(Activity a)
{
    // 1 torso + 4 limbs. Limb radial speeds stay below 4.5 m/s.
    std::vector<Scatterer> v;
    auto limb = [](double ox, double oy, double refl, double amp, double freq, double phase) {
        Scatterer s;
        s.offset_x = ox;
        s.offset_y = oy;
        s.reflectivity = refl;
        s.role = Role::limb;
        s.osc_amp = amp;
        s.osc_freq = freq;
        s.osc_phase = phase;
        return s;
    };
    Scatterer torso;
    torso.reflectivity = 0.5;

    // Counter-swinging limb pairs are deliberately unequal in return strength
    // and peak speed (near vs far side of the body), so the power-weighted
    // mean Doppler oscillates at the gait frequency instead of cancelling.
    switch (a) {
    case Activity::walking: {
        v.push_back(torso);
        v.push_back(limb(0.20, 0.10, 0.20, 2.5, 1.5, 0.0));
        v.push_back(limb(-0.20, 0.10, 0.12, 2.2, 1.5, kPi));
        v.push_back(limb(0.15, -0.10, 0.15, 1.5, 1.5, kPi / 2.0));
        v.push_back(limb(-0.15, -0.10, 0.10, 1.2, 1.5, 3.0 * kPi / 2.0));
        break;
    }
    case Activity::running: {
        v.push_back(torso);
        v.push_back(limb(0.20, 0.10, 0.20, 3.5, 2.5, 0.0));
        v.push_back(limb(-0.20, 0.10, 0.12, 3.1, 2.5, kPi));
        v.push_back(limb(0.15, -0.10, 0.15, 2.2, 2.5, kPi / 2.0));
        v.push_back(limb(-0.15, -0.10, 0.10, 1.8, 2.5, 3.0 * kPi / 2.0));
        break;
    }
    case Activity::sitting: {
        // Intermittent torso bob, quiet limbs.
        torso.osc_amp = 0.3;
        torso.osc_freq = 0.5;
        torso.duty_on_cycles = 1;
        torso.duty_off_cycles = 1;
        v.push_back(torso);
        v.push_back(limb(0.20, 0.10, 0.15, 0.15, 0.5, 0.0));
        v.push_back(limb(-0.20, 0.10, 0.12, 0.15, 0.5, kPi));
        v.push_back(limb(0.15, -0.10, 0.15, 0.0, 0.0, 0.0));
        v.push_back(limb(-0.15, -0.10, 0.15, 0.0, 0.0, 0.0));
        break;
    }
    case Activity::waving: {
        // Arms only; torso does not translate or bob.
        v.push_back(torso);
        v.push_back(limb(0.25, 0.05, 0.20, 1.5, 2.0, 0.0));
        v.push_back(limb(-0.25, 0.05, 0.12, 1.3, 2.0, kPi));
        v.push_back(limb(0.15, -0.10, 0.15, 0.0, 0.0, 0.0));
        v.push_back(limb(-0.15, -0.10, 0.15, 0.0, 0.0, 0.0));
        break;
    }
    }
    return v;
}

Subject make_subject(int id, Activity act, std::vector<Waypoint> trajectory)
{
    Subject s;
    s.id = id;
    s.activity = act;
    s.trajectory = std::move(trajectory);
    s.scatterers = activity_scatterers(act);
    return s;
}

namespace {

struct TrajSample {
    double x, y, vx, vy;
};

TrajSample sample_trajectory(const std::vector<Waypoint> &wp, double t)
{
    if (wp.empty())
        throw std::invalid_argument("subject has an empty trajectory");
    if (t <= wp.front().t)
        return {wp.front().x, wp.front().y, 0.0, 0.0};
    if (t >= wp.back().t)
        return {wp.back().x, wp.back().y, 0.0, 0.0};
    size_t i = 1;
    while (wp[i].t < t)
        ++i;
    const Waypoint &a = wp[i - 1];
    const Waypoint &b = wp[i];
    double dt = b.t - a.t;
    double f = (t - a.t) / dt;
    return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f, (b.x - a.x) / dt, (b.y - a.y) / dt};
}

struct Osc {
    double v = 0.0;
    double disp = 0.0;
};

// Gated sinusoidal oscillation. Gating happens on whole-cycle boundaries so
// the displacement integral returns to zero at the end of each on-cycle,
// which keeps this a pure function of t.
Osc oscillation(const Scatterer &s, double t)
{
    if (s.osc_amp == 0.0 || s.osc_freq <= 0.0 || t < 0.0)
        return {};
    if (s.duty_on_cycles > 0 && s.duty_off_cycles > 0) {
        long cycle = static_cast<long>(std::floor(t * s.osc_freq));
        long period = s.duty_on_cycles + s.duty_off_cycles;
        if ((cycle % period) >= s.duty_on_cycles)
            return {};
    }
    double w = 2.0 * kPi * s.osc_freq;
    double arg = w * t + s.osc_phase;
    Osc o;
    o.v = s.osc_amp * std::sin(arg);
    o.disp = s.osc_amp / w * (std::cos(s.osc_phase) - std::cos(arg));
    return o;
}

const std::vector<Scatterer> &active_scatterers(const Subject &sub, double t, double &phase_t0,
                                                std::vector<Scatterer> &storage)
{
    phase_t0 = 0.0;
    if (sub.phases.empty())
        return sub.scatterers;
    const ActivityPhase *act = nullptr;
    for (const auto &p : sub.phases)
        if (p.t <= t)
            act = &p;
    if (!act)
        return sub.scatterers;
    phase_t0 = act->t;
    storage = activity_scatterers(act->activity);
    return storage;
}

} // namespace

std::vector<ScattererState> scene_step(const Scene &scene, double t_c, long k)
{
    if (k < 0)
        throw std::invalid_argument("scene_step: k must be nonnegative");
    double t = static_cast<double>(k) * t_c;

    std::vector<ScattererState> out;
    std::vector<Scatterer> storage;
    for (const auto &sub : scene.subjects) {
        TrajSample ts = sample_trajectory(sub.trajectory, t);
        double t0 = 0.0;
        const auto &scs = active_scatterers(sub, t, t0, storage);
        for (const auto &sc : scs) {
            Osc o = oscillation(sc, t - t0);
            ScattererState st;
            st.subject_id = sub.id;
            st.x = ts.x + sc.offset_x;
            st.y = ts.y + sc.offset_y;
            st.vx = ts.vx;
            st.vy = ts.vy;
            st.reflectivity = sc.reflectivity;
            st.role = sc.role;
            st.osc_v = o.v;
            st.osc_disp = o.disp;
            out.push_back(st);
        }
    }
    return out;
}

std::vector<std::pair<double, double>> subject_positions(const Scene &scene, double t_c, long k)
{
    double t = static_cast<double>(k) * t_c;
    std::vector<std::pair<double, double>> out;
    for (const auto &sub : scene.subjects) {
        TrajSample ts = sample_trajectory(sub.trajectory, t);
        out.emplace_back(ts.x, ts.y);
    }
    return out;
}

double radial_velocity(const ScattererState &s, const ApPose &ap)
{
    double dx = s.x - ap.x;
    double dy = s.y - ap.y;
    double d = std::hypot(dx, dy);
    double v_t = 0.0;
    if (d > 1e-12)
        v_t = (s.vx * dx + s.vy * dy) / d;
    return v_t + s.osc_v;
}

double azimuth_from_ap(const ApPose &ap, double x, double y)
{
    double az = rad2deg(std::atan2(y - ap.y, x - ap.x));
    double rel = az - ap.boresight_deg;
    while (rel > 180.0)
        rel -= 360.0;
    while (rel <= -180.0)
        rel += 360.0;
    return rel;
}

bool occluded(const Scene &scene, double t_c, long k, const ApPose &ap, double tx, double ty, int owner_id)
{
    constexpr double kBodyRadius = 0.3;
    double t = static_cast<double>(k) * t_c;
    double ax = ap.x, ay = ap.y;
    double dx = tx - ax, dy = ty - ay;
    double len2 = dx * dx + dy * dy;
    for (const auto &sub : scene.subjects) {
        if (sub.id == owner_id)
            continue;
        TrajSample ts = sample_trajectory(sub.trajectory, t);
        double px = ts.x - ax, py = ts.y - ay;
        double u = len2 > 0.0 ? std::clamp((px * dx + py * dy) / len2, 0.0, 1.0) : 0.0;
        double cx = u * dx - px, cy = u * dy - py;
        if (cx * cx + cy * cy < kBodyRadius * kBodyRadius)
            return true;
    }
    return false;
}

waveform::CirFrame synth_cir_frame(const Scene &scene, int ap_index, const Codebook &cb,
                                   const waveform::RadioConfig &cfg, long k, std::uint64_t rng_seed,
                                   bool include_subjects)
{
    if (ap_index < 0 || ap_index >= static_cast<int>(scene.ap_poses.size()))
        throw std::invalid_argument("synth_cir_frame: bad ap_index");
    const ApPose &ap = scene.ap_poses[static_cast<size_t>(ap_index)];
    const double spacing = waveform::tap_spacing(cfg);
    const double phase_scale = 4.0 * kPi * cfg.f_o / kSpeedOfLight;

    waveform::CirFrame frame = waveform::make_frame(k, cfg.n_taps, cfg.n_patterns);

    auto add_path = [&](double d_eff, double d0, double theta, double refl) {
        if (d_eff < 0.0)
            return;
        int tap = static_cast<int>(std::lround(d_eff / spacing));
        if (tap < 0 || tap >= cfg.n_taps)
            return;
        // Amplitude: reflectivity, beam gain, inverse-square path loss with a
        // 0.5 m clamp. Phase: -4 pi f_o d0 / c plus the accumulated radial
        // displacement (d_eff - d0), positive when moving away from the AP.
        double amp = refl / std::pow(std::max(d_eff, 0.5), 2.0);
        double phi = phase_scale * (d_eff - 2.0 * d0);
        cxd ph = std::polar(amp, phi);
        for (int p = 0; p < cfg.n_patterns; ++p)
            frame.at(tap, p) += ph * cb.gain(p, theta);
    };

    if (include_subjects) {
        auto states = scene_step(scene, cfg.t_c, k);
        auto states0 = scene_step(scene, cfg.t_c, 0);
        for (size_t i = 0; i < states.size(); ++i) {
            const auto &s = states[i];
            if (occluded(scene, cfg.t_c, k, ap, s.x, s.y, s.subject_id))
                continue;
            double d = std::hypot(s.x - ap.x, s.y - ap.y) + s.osc_disp;
            double d0 = std::hypot(states0[i].x - ap.x, states0[i].y - ap.y);
            double theta = azimuth_from_ap(ap, s.x, s.y);
            add_path(d, d0, theta, s.reflectivity);
        }
    }
    for (const auto &r : scene.reflectors) {
        if (occluded(scene, cfg.t_c, k, ap, r.x, r.y, -1))
            continue;
        double d = std::hypot(r.x - ap.x, r.y - ap.y);
        double theta = azimuth_from_ap(ap, r.x, r.y);
        add_path(d, d, theta, r.reflectivity);
    }

    if (scene.noise_std > 0.0) {
        auto rng = make_rng(rng_seed, 0x6e6f6973ULL + static_cast<std::uint64_t>(ap_index),
                            static_cast<std::uint64_t>(k));
        std::normal_distribution<double> nd(0.0, scene.noise_std);
        for (auto &v : frame.h)
            v += cxd(nd(rng), nd(rng));
    }

    if (scene.cfo_range_hz > 0.0) {
        // One CFO value per (seed, ap) capture, as a common rotation.
        auto rng = make_rng(rng_seed, 0x63666fULL, static_cast<std::uint64_t>(ap_index));
        std::uniform_real_distribution<double> ud(-scene.cfo_range_hz, scene.cfo_range_hz);
        double cfo = ud(rng);
        cxd rot = std::polar(1.0, 2.0 * kPi * cfo * static_cast<double>(k) * cfg.t_c);
        for (auto &v : frame.h)
            v *= rot;
    }

    return frame;
}

} // namespace aysense::scenesim
