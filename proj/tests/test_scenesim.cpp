// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aysense/scenesim.hpp"

using namespace aysense;
using namespace aysense::scenesim;
using aysense::waveform::RadioConfig;

namespace {

Scene single_scatterer_scene(double x, double y, double refl)
{
    // one "subject" with only a torso scatterer, so there is a single path
    Scene sc;
    Subject s;
    s.id = 0;
    s.trajectory = {{0.0, x, y}, {1000.0, x, y}};
    Scatterer torso;
    torso.reflectivity = refl;
    s.scatterers = {torso};
    sc.subjects.push_back(s);
    sc.ap_poses.push_back({0.0, 0.0, 0.0}); // boresight along +x
    sc.noise_std = 0.0;
    sc.cfo_range_hz = 0.0;
    return sc;
}

} // namespace

TEST_CASE("synthetic codebook steering and gains")
{
    auto cb = synth_codebook(12);
    REQUIRE(cb.patterns.size() == 12);
    CHECK(cb.steering_deg.front() == doctest::Approx(-45.0));
    CHECK(cb.steering_deg.back() == doctest::Approx(45.0));
    double spacing = cb.steering_deg[1] - cb.steering_deg[0];
    for (size_t p = 1; p < cb.steering_deg.size(); ++p)
        CHECK(cb.steering_deg[p] - cb.steering_deg[p - 1] == doctest::Approx(spacing).epsilon(1e-9));

    for (size_t p = 0; p < cb.patterns.size(); ++p) {
        double mx = 0.0;
        for (double g : cb.patterns[p].gains) {
            CHECK(g >= 0.0);
            CHECK(g <= 1.0);
            mx = std::max(mx, g);
        }
        // steering angles need not land on the 0.5 degree grid exactly
        CHECK(mx > 0.99);
        CHECK(cb.gain(static_cast<int>(p), cb.steering_deg[p]) > 0.99);
    }

    // pattern steered at 0 deg (odd-size codebook) hits the sidelobe floor at the FoV edges
    auto cb13 = synth_codebook(13);
    int center = 6;
    CHECK(cb13.steering_deg[static_cast<size_t>(center)] == doctest::Approx(0.0));
    CHECK(cb13.gain(center, 0.0) == doctest::Approx(1.0));
    CHECK(cb13.gain(center, 45.0) == doctest::Approx(0.05));
    CHECK(cb13.gain(center, -45.0) == doctest::Approx(0.05));

    CHECK_THROWS_AS(synth_codebook(1), std::invalid_argument);
}

TEST_CASE("codebook gain clamps outside the field of view")
{
    auto cb = synth_codebook(12);
    CHECK(cb.gain(0, -60.0) == doctest::Approx(cb.patterns[0].gains.front()));
    CHECK(cb.gain(0, 60.0) == doctest::Approx(cb.patterns[0].gains.back()));
}

TEST_CASE("kinematics: stationary, receding, oscillating")
{
    ApPose ap{0.0, 0.0, 0.0};

    // stationary subject: torso radial velocity 0
    auto sc = single_scatterer_scene(3.0, 0.0, 0.5);
    auto st = scene_step(sc, 0.27e-3, 1000);
    REQUIRE(st.size() == 1);
    CHECK(radial_velocity(st[0], ap) == doctest::Approx(0.0));

    // moving straight away from the AP at 1 m/s
    Scene mv = single_scatterer_scene(2.0, 0.0, 0.5);
    mv.subjects[0].trajectory = {{0.0, 2.0, 0.0}, {2.0, 4.0, 0.0}};
    auto stm = scene_step(mv, 0.27e-3, 3704); // t ~ 1.0 s, mid-trajectory
    CHECK(radial_velocity(stm[0], ap) == doctest::Approx(1.0).epsilon(1e-9));

    // limb with 3 m/s amplitude at 1.5 Hz, phase 0: at t = 1/(4*1.5) the sine peaks
    Scene osc = single_scatterer_scene(3.0, 0.0, 0.5);
    osc.subjects[0].scatterers[0].role = Role::limb;
    osc.subjects[0].scatterers[0].osc_amp = 3.0;
    osc.subjects[0].scatterers[0].osc_freq = 1.5;
    double t_peak = 1.0 / (4.0 * 1.5);
    double t_c = 1e-6;
    auto sto = scene_step(osc, t_c, static_cast<long>(std::llround(t_peak / t_c)));
    CHECK(radial_velocity(sto[0], ap) == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("subjects hold the final waypoint with zero velocity")
{
    Scene mv = single_scatterer_scene(2.0, 0.0, 0.5);
    mv.subjects[0].trajectory = {{0.0, 2.0, 0.0}, {1.0, 3.0, 0.0}};
    auto st = scene_step(mv, 0.27e-3, 100000); // t = 27 s, far past the end
    CHECK(st[0].x == doctest::Approx(3.0));
    CHECK(st[0].vx == doctest::Approx(0.0));
    CHECK(st[0].vy == doctest::Approx(0.0));
}

TEST_CASE("empty scene synthesizes an all-zero noiseless frame")
{
    Scene sc;
    sc.ap_poses.push_back({0.0, 0.0, 0.0});
    sc.noise_std = 0.0;
    sc.cfo_range_hz = 0.0;
    RadioConfig cfg;
    auto f = synth_cir_frame(sc, 0, synth_codebook(12), cfg, 3, 1);
    for (const auto &v : f.h)
        CHECK(v == cxd(0.0, 0.0));
}

TEST_CASE("static reflector freezes the frame across k")
{
    Scene sc;
    sc.ap_poses.push_back({0.0, 0.0, 0.0});
    sc.reflectors.push_back({3.0, 0.5, 0.8});
    sc.noise_std = 0.0;
    sc.cfo_range_hz = 0.0;
    RadioConfig cfg;
    auto cb = synth_codebook(12);
    auto f0 = synth_cir_frame(sc, 0, cb, cfg, 0, 1);
    auto f1 = synth_cir_frame(sc, 0, cb, cfg, 100, 1);
    REQUIRE(f0.h.size() == f1.h.size());
    for (size_t i = 0; i < f0.h.size(); ++i)
        CHECK(f0.h[i] == f1.h[i]);
}

TEST_CASE("constant radial velocity produces the paper's per-packet phase step")
{
    RadioConfig cfg;
    Scene mv = single_scatterer_scene(3.0, 0.0, 0.5);
    mv.subjects[0].trajectory = {{0.0, 3.0, 0.0}, {10.0, 8.0, 0.0}}; // 0.5 m/s away
    auto cb = synth_codebook(12);

    const double v = 0.5;
    const double expected = 4.0 * kPi * cfg.f_o * v * cfg.t_c / kSpeedOfLight;

    auto f0 = synth_cir_frame(mv, 0, cb, cfg, 100, 1);
    auto f1 = synth_cir_frame(mv, 0, cb, cfg, 101, 1);
    int tap = waveform::distance_to_tap(3.0 + 100 * cfg.t_c * v, cfg);
    cxd a = f0.at(tap, 6), b = f1.at(tap, 6);
    REQUIRE(std::abs(a) > 0.0);
    double dphi = std::arg(b * std::conj(a));
    CHECK(dphi == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("unwrapped phase derivative recovers radial velocity within 0.01 m/s")
{
    RadioConfig cfg;
    Scene mv = single_scatterer_scene(3.0, 0.0, 0.5);
    mv.subjects[0].scatterers[0].osc_amp = 1.0;
    mv.subjects[0].scatterers[0].osc_freq = 1.0;
    auto cb = synth_codebook(12);
    ApPose ap{0.0, 0.0, 0.0};

    const double scale = 4.0 * kPi * cfg.f_o * cfg.t_c / kSpeedOfLight;
    for (long k = 50; k < 60; ++k) {
        auto f0 = synth_cir_frame(mv, 0, cb, cfg, k, 1);
        auto f1 = synth_cir_frame(mv, 0, cb, cfg, k + 1, 1);
        auto st = scene_step(mv, cfg.t_c, k);
        int tap = 70; // 2.98 m; tap of the scatterer (displacement < half a tap here)
        double dphi = std::arg(f1.at(tap, 6) * std::conj(f0.at(tap, 6)));
        double v_est = dphi / scale;
        CHECK(std::abs(v_est - radial_velocity(st[0], ap)) < 0.01);
    }
}

TEST_CASE("reflectivity scales amplitude linearly")
{
    RadioConfig cfg;
    auto cb = synth_codebook(12);
    auto s1 = single_scatterer_scene(3.0, 0.4, 0.4);
    auto s2 = single_scatterer_scene(3.0, 0.4, 0.8);
    auto f1 = synth_cir_frame(s1, 0, cb, cfg, 5, 1);
    auto f2 = synth_cir_frame(s2, 0, cb, cfg, 5, 1);
    int tap = waveform::distance_to_tap(std::hypot(3.0, 0.4), cfg);
    CHECK(std::abs(f2.at(tap, 4)) == doctest::Approx(2.0 * std::abs(f1.at(tap, 4))).epsilon(1e-12));
}

TEST_CASE("angular selectivity matches the codebook argmax")
{
    RadioConfig cfg;
    auto cb = synth_codebook(12);
    for (double theta : {-40.0, -12.5, 0.0, 8.0, 33.0}) {
        double r = 3.0;
        auto sc = single_scatterer_scene(r * std::cos(deg2rad(theta)), r * std::sin(deg2rad(theta)), 0.5);
        auto f = synth_cir_frame(sc, 0, cb, cfg, 0, 1);
        int tap = waveform::distance_to_tap(r, cfg);
        int best_p = 0, best_g = 0;
        double bp = -1.0, bg = -1.0;
        for (int p = 0; p < cfg.n_patterns; ++p) {
            if (std::abs(f.at(tap, p)) > bp) {
                bp = std::abs(f.at(tap, p));
                best_p = p;
            }
            if (cb.gain(p, theta) > bg) {
                bg = cb.gain(p, theta);
                best_g = p;
            }
        }
        CHECK(best_p == best_g);
    }
}

TEST_CASE("occlusion: a subject between AP and target shadows it")
{
    Scene sc = single_scatterer_scene(4.0, 0.0, 0.5);
    Subject blocker;
    blocker.id = 1;
    blocker.trajectory = {{0.0, 2.0, 0.0}, {10.0, 2.0, 0.0}};
    Scatterer torso;
    torso.reflectivity = 0.5;
    blocker.scatterers = {torso};
    sc.subjects.push_back(blocker);

    CHECK(occluded(sc, 0.27e-3, 0, sc.ap_poses[0], 4.0, 0.0, 0));
    CHECK_FALSE(occluded(sc, 0.27e-3, 0, sc.ap_poses[0], 2.0, 0.0, 1)); // own disc ignored
    CHECK_FALSE(occluded(sc, 0.27e-3, 0, sc.ap_poses[0], 4.0, 2.0, 0)); // off-axis target clear

    RadioConfig cfg;
    auto cb = synth_codebook(12);
    auto f = synth_cir_frame(sc, 0, cb, cfg, 0, 1);
    int tap_far = waveform::distance_to_tap(4.0, cfg);
    int tap_near = waveform::distance_to_tap(2.0, cfg);
    CHECK(std::abs(f.at(tap_far, 6)) == 0.0);
    CHECK(std::abs(f.at(tap_near, 6)) > 0.0);
}

TEST_CASE("identical seeds give bit-identical frames; different seeds differ")
{
    Scene sc = single_scatterer_scene(3.0, 0.5, 0.5);
    sc.noise_std = 1e-3;
    sc.cfo_range_hz = 40.0;
    RadioConfig cfg;
    auto cb = synth_codebook(12);
    auto a = synth_cir_frame(sc, 0, cb, cfg, 17, 99);
    auto b = synth_cir_frame(sc, 0, cb, cfg, 17, 99);
    auto c = synth_cir_frame(sc, 0, cb, cfg, 17, 100);
    REQUIRE(a.h.size() == b.h.size());
    bool all_eq = true, any_diff = false;
    for (size_t i = 0; i < a.h.size(); ++i) {
        all_eq = all_eq && a.h[i] == b.h[i];
        any_diff = any_diff || a.h[i] != c.h[i];
    }
    CHECK(all_eq);
    CHECK(any_diff);
}

TEST_CASE("activity scatterer clusters respect the speed bound")
{
    for (auto act : {Activity::walking, Activity::running, Activity::sitting, Activity::waving}) {
        auto v = activity_scatterers(act);
        REQUIRE(v.size() == 5);
        CHECK(v[0].role == Role::torso);
        for (const auto &s : v) {
            CHECK(s.reflectivity >= 0.0);
            CHECK(s.osc_amp <= 4.5);
        }
    }
    CHECK(activity_from_string("running") == Activity::running);
    CHECK(activity_to_string(Activity::waving) == "waving");
    CHECK_THROWS_AS(activity_from_string("flying"), std::invalid_argument);
}
