// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "aysense/microdoppler.hpp"

using namespace aysense;
using namespace aysense::microdoppler;

namespace {

// Independent O(n^2) DFT oracle.
std::vector<cxd> naive_dft(const std::vector<cxd> &x)
{
    const size_t n = x.size();
    std::vector<cxd> out(n);
    for (size_t k = 0; k < n; ++k) {
        cxd acc(0.0, 0.0);
        for (size_t j = 0; j < n; ++j)
            acc += x[j] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * j) / static_cast<double>(n));
        out[k] = acc;
    }
    return out;
}

} // namespace

TEST_CASE("Hann window shape and config validation")
{
    auto c = make_stft_config(8, 4);
    CHECK(c.window[0] == doctest::Approx(0.0));
    CHECK(c.window[4] == doctest::Approx(1.0));
    for (int i = 1; i < 8; ++i)
        CHECK(c.window[static_cast<size_t>(i)] ==
              doctest::Approx(0.5 * (1.0 - std::cos(2.0 * kPi * i / 8.0))));
    // periodic window: w[i] == w[m - i]
    for (int i = 1; i < 8; ++i)
        CHECK(c.window[static_cast<size_t>(i)] == doctest::Approx(c.window[static_cast<size_t>(8 - i)]));

    CHECK_THROWS_AS(make_stft_config(12, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_stft_config(8, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_stft_config(8, 9), std::invalid_argument);
}

TEST_CASE("Doppler axis resolution and span at the default radio config")
{
    waveform::RadioConfig rcfg;
    auto scfg = make_stft_config();
    auto ax = doppler_axis(rcfg, scfg);
    CHECK(std::abs(ax.dv - 0.1435) < 1e-3);
    CHECK(std::abs(ax.v_max - 4.59) < 1e-2);
    REQUIRE(static_cast<int>(ax.velocity.size()) == scfg.m);
    CHECK(ax.velocity[0] == doctest::Approx(-ax.v_max));
    CHECK(ax.velocity[static_cast<size_t>(scfg.m / 2)] == doctest::Approx(0.0));
    for (size_t i = 1; i < ax.velocity.size(); ++i)
        CHECK(ax.velocity[i] - ax.velocity[i - 1] == doctest::Approx(ax.dv));
}

TEST_CASE("beam selection picks the strongest pattern")
{
    auto cb = scenesim::synth_codebook(12);
    for (int p = 0; p < 12; ++p)
        CHECK(select_beam(cb.steering_deg[static_cast<size_t>(p)], cb) == p);
    CHECK(select_beam(-90.0, cb) == 0);  // clamped outside the FoV
    CHECK(select_beam(90.0, cb) == 11);
}

TEST_CASE("path selection rounds to the nearest tap, midpoint down")
{
    waveform::RadioConfig cfg;
    double sp = waveform::tap_spacing(cfg);
    CHECK(select_path(2.0, cfg) == 47); // 2.0 / 0.04258 = 46.97
    CHECK(select_path(0.0, cfg) == 0);
    CHECK(select_path(10.0 * sp, cfg) == 10);
    CHECK(select_path(1.5 * sp, cfg) == 1);   // exact midpoint -> smaller tap
    CHECK(select_path(1.51 * sp, cfg) == 2);
    CHECK(select_path(1e6, cfg) == cfg.n_taps - 1); // clamped
    CHECK_THROWS_AS(select_path(-0.1, cfg), std::invalid_argument);
}

TEST_CASE("fft matches a naive DFT and Parseval")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (size_t n : {8u, 64u}) {
        std::vector<cxd> x(n);
        for (auto &v : x)
            v = cxd(nd(rng), nd(rng));
        auto ref = naive_dft(x);
        auto y = x;
        fft(y);
        double e_time = 0.0, e_freq = 0.0;
        for (size_t i = 0; i < n; ++i) {
            CHECK(std::abs(y[i] - ref[i]) < 1e-9 * static_cast<double>(n));
            e_time += std::norm(x[i]);
            e_freq += std::norm(y[i]);
        }
        // unnormalized transform: sum |X|^2 = n * sum |x|^2
        CHECK(e_freq == doctest::Approx(static_cast<double>(n) * e_time).epsilon(1e-12));
    }

    std::vector<cxd> ones(16, cxd(1.0, 0.0));
    fft(ones);
    CHECK(std::abs(ones[0] - cxd(16.0, 0.0)) < 1e-12);
    for (size_t i = 1; i < 16; ++i)
        CHECK(std::abs(ones[i]) < 1e-12);
}

namespace {

// Slow-time buffer with a complex tone of `cycles` per m samples at one tap.
std::vector<waveform::CirFrame> tone_buffer(int frames, int n_taps, int n_patterns, int tap, int pattern,
                                            double cycles, int m)
{
    std::vector<waveform::CirFrame> buf;
    for (int k = 0; k < frames; ++k) {
        auto f = waveform::make_frame(k, n_taps, n_patterns);
        f.at(tap, pattern) = std::polar(1.0, 2.0 * kPi * cycles * static_cast<double>(k) / static_cast<double>(m));
        buf.push_back(std::move(f));
    }
    return buf;
}

} // namespace

TEST_CASE("stft column: tone lands on the expected velocity row")
{
    waveform::RadioConfig rcfg;
    rcfg.n_taps = 16;
    rcfg.n_patterns = 2;
    auto scfg = make_stft_config(64, 16);
    MdConfig mcfg;

    // +10 bins <-> velocity +10 * dv, row m/2 + 10
    auto buf = tone_buffer(64, 16, 2, 8, 1, 10.0, 64);
    auto col = stft_column(buf, 8, 1, 0, rcfg, scfg, mcfg);
    REQUIRE(col.has_value());
    REQUIRE(col->size() == 64);
    int argmax = 0;
    for (int r = 1; r < 64; ++r)
        if ((*col)[static_cast<size_t>(r)] > (*col)[static_cast<size_t>(argmax)])
            argmax = r;
    CHECK(argmax == 32 + 10);

    // static tone -> DC row m/2
    auto buf0 = tone_buffer(64, 16, 2, 8, 1, 0.0, 64);
    auto col0 = stft_column(buf0, 8, 1, 0, rcfg, scfg, mcfg);
    REQUIRE(col0.has_value());
    argmax = 0;
    for (int r = 1; r < 64; ++r)
        if ((*col0)[static_cast<size_t>(r)] > (*col0)[static_cast<size_t>(argmax)])
            argmax = r;
    CHECK(argmax == 32);

    // negative Doppler mirrors below DC
    auto bufn = tone_buffer(64, 16, 2, 8, 1, -7.0, 64);
    auto coln = stft_column(bufn, 8, 1, 0, rcfg, scfg, mcfg);
    REQUIRE(coln.has_value());
    argmax = 0;
    for (int r = 1; r < 64; ++r)
        if ((*coln)[static_cast<size_t>(r)] > (*coln)[static_cast<size_t>(argmax)])
            argmax = r;
    CHECK(argmax == 32 - 7);
}

TEST_CASE("stft column: total power obeys Parseval over the windowed segment")
{
    waveform::RadioConfig rcfg;
    rcfg.n_taps = 16;
    rcfg.n_patterns = 2;
    auto scfg = make_stft_config(64, 16);
    MdConfig mcfg; // q = 4, but only tap 8 is nonzero

    auto buf = tone_buffer(64, 16, 2, 8, 1, 10.0, 64);
    auto col = stft_column(buf, 8, 1, 0, rcfg, scfg, mcfg);
    REQUIRE(col.has_value());
    double total = 0.0;
    for (double v : *col)
        total += v;
    double wsum = 0.0;
    for (double w : scfg.window)
        wsum += w * w; // |tone| = 1
    CHECK(total == doctest::Approx(64.0 * wsum).epsilon(1e-9));
}

TEST_CASE("stft column: hop indexing and argument validation")
{
    waveform::RadioConfig rcfg;
    rcfg.n_taps = 16;
    rcfg.n_patterns = 2;
    auto scfg = make_stft_config(64, 16);
    MdConfig mcfg;

    auto buf = tone_buffer(80, 16, 2, 8, 1, 4.0, 64);
    CHECK(stft_column(buf, 8, 1, 1, rcfg, scfg, mcfg).has_value());   // needs 16 + 64 = 80
    CHECK_FALSE(stft_column(buf, 8, 1, 2, rcfg, scfg, mcfg).has_value());
    CHECK_FALSE(stft_column(buf, 8, 1, -1, rcfg, scfg, mcfg).has_value());
    CHECK_THROWS_AS(stft_column(buf, 1, 1, 0, rcfg, scfg, mcfg), std::invalid_argument);  // taps 0..3 clip low
    CHECK_THROWS_AS(stft_column(buf, 15, 1, 0, rcfg, scfg, mcfg), std::invalid_argument); // clip high
    CHECK_THROWS_AS(stft_column(buf, 8, 2, 0, rcfg, scfg, mcfg), std::invalid_argument);  // bad pattern
}

TEST_CASE("preprocess drops the static band and min-max scales columns")
{
    waveform::RadioConfig rcfg;
    auto scfg = make_stft_config();
    auto ax = doppler_axis(rcfg, scfg);

    Spectrogram sp;
    sp.rows = 64;
    sp.cols = 3;
    sp.velocity_axis = ax.velocity;
    sp.values.assign(static_cast<size_t>(64 * 3), 0.0);
    for (int r = 0; r < 64; ++r) {
        sp.at(r, 0) = static_cast<double>(r);       // ramp
        sp.at(r, 1) = 5.0;                          // constant
        sp.at(r, 2) = (r == 50) ? 2.0 : 1.0;        // single spike
    }

    MdConfig mcfg;
    auto out = preprocess(sp, mcfg);
    CHECK(out.rows == 59); // rows -2..+2 around DC removed at defaults
    CHECK(out.cols == 3);
    for (double v : out.velocity_axis)
        CHECK(std::abs(v) > mcfg.static_band);

    // ramp column: kept rows 0..29 and 35..63 -> min 0, max 63
    CHECK(out.at(0, 0) == doctest::Approx(0.0));
    CHECK(out.at(58, 0) == doctest::Approx(1.0));
    for (int r = 0; r < 59; ++r) {
        CHECK(out.at(r, 0) >= 0.0);
        CHECK(out.at(r, 0) <= 1.0);
        CHECK(out.at(r, 1) == 0.0); // constant column maps to zeros
    }
    // spike column: exactly one 1, rest 0
    int ones = 0;
    for (int r = 0; r < 59; ++r) {
        if (out.at(r, 2) == doctest::Approx(1.0))
            ++ones;
        else
            CHECK(out.at(r, 2) == doctest::Approx(0.0));
    }
    CHECK(ones == 1);
}

TEST_CASE("extractor assembles overlapping windows per track")
{
    waveform::RadioConfig rcfg;
    rcfg.n_taps = 16;
    rcfg.n_patterns = 2;
    auto scfg = make_stft_config(8, 4);
    MdConfig mcfg;
    mcfg.t_window = 6;
    mcfg.overlap = 3;
    auto cb = scenesim::synth_codebook(2);

    std::vector<waveform::CirFrame> frames;
    for (int k = 0; k < 60; ++k)
        frames.push_back(waveform::make_frame(k, 16, 2));

    track::Track trk;
    trk.id = 7;
    trk.status = track::Status::confirmed;
    trk.state.x << 0.3, 0.0, 0.0, 0.0; // tap clamps into the valid fast-time range

    Extractor ex(rcfg, scfg, mcfg, cb);
    for (long t = 0; t <= 13; ++t) // columns exist while 4t + 8 <= 60
        ex.step(frames, {trk}, t);
    auto wins = ex.take_windows();
    REQUIRE(wins.size() == 3); // 14 columns, stride 3: t0 = 0, 3, 6
    CHECK(wins[0].t0 == 0);
    CHECK(wins[1].t0 == 3);
    CHECK(wins[2].t0 == 6);
    for (const auto &w : wins) {
        CHECK(w.rows == 8);
        CHECK(w.cols == 6);
        CHECK(w.subject == 7);
    }
    CHECK(ex.take_windows().empty()); // drained
}

TEST_CASE("extractor restarts the run after a missed step")
{
    waveform::RadioConfig rcfg;
    rcfg.n_taps = 16;
    rcfg.n_patterns = 2;
    auto scfg = make_stft_config(8, 4);
    MdConfig mcfg;
    mcfg.t_window = 6;
    mcfg.overlap = 3;
    auto cb = scenesim::synth_codebook(2);

    std::vector<waveform::CirFrame> frames;
    for (int k = 0; k < 100; ++k)
        frames.push_back(waveform::make_frame(k, 16, 2));

    track::Track trk;
    trk.id = 1;
    trk.status = track::Status::confirmed;
    trk.state.x << 0.3, 0.0, 0.0, 0.0;

    Extractor ex(rcfg, scfg, mcfg, cb);
    for (long t = 0; t <= 5; ++t)
        ex.step(frames, {trk}, t);
    // skip t = 6: the stream restarts at t = 7
    for (long t = 7; t <= 12; ++t)
        ex.step(frames, {trk}, t);
    auto wins = ex.take_windows();
    REQUIRE(wins.size() == 2);
    CHECK(wins[0].t0 == 0);
    CHECK(wins[1].t0 == 7);
}
