// SPDX-License-Identifier: Apache-2.0
//
// Slow-time STFT micro-Doppler extraction: beam/path selection from track
// estimates, per-step Doppler power columns and spectrogram assembly.
#pragma once

#include <map>
#include <optional>
#include <vector>

#include "aysense/scenesim.hpp"
#include "aysense/track.hpp"
#include "aysense/waveform.hpp"

namespace aysense::microdoppler {

struct StftConfig {
    int m = 64;     // window length, power of two
    int sigma = 16; // hop in slow-time samples
    std::vector<double> window; // Hann coefficients, length m
};

// Periodic Hann window w(m) = 0.5 (1 - cos(2 pi m / M)).
StftConfig make_stft_config(int m = 64, int sigma = 16);

struct MdConfig {
    int q = 4;             // fast-time window size (q+1 taps)
    int t_window = 400;    // spectrogram columns
    int overlap = 300;     // columns shared by consecutive windows
    double static_band = 0.28; // m/s
};

struct DopplerAxis {
    std::vector<double> velocity; // m/s per row, ascending, DC centered
    double dv = 0.0;
    double v_max = 0.0;
};

// dv = c / (2 f_o M T_c), v_max = c / (4 f_o T_c); axis_i = -v_max + i*dv.
DopplerAxis doppler_axis(const waveform::RadioConfig &rcfg, const StftConfig &scfg);

// Pattern with maximal gain at theta_hat; ties to the smaller index.
int select_beam(double theta_hat_deg, const scenesim::Codebook &cb);

// Tap nearest to r_hat; ties to the smaller tap.
int select_path(double r_hat, const waveform::RadioConfig &cfg);

// In-place iterative radix-2 DFT (no normalization).
void fft(std::vector<cxd> &x);

// One micro-Doppler column: mu_i = sum over the fast-time window of
// |H_{l,p*}(n, i)|^2, rows reordered to the ascending velocity axis.
// Returns nullopt when the buffer does not yet hold n*sigma + m frames.
std::optional<std::vector<double>> stft_column(const std::vector<waveform::CirFrame> &buffer, int l_star,
                                               int p_star, long n, const waveform::RadioConfig &rcfg,
                                               const StftConfig &scfg, const MdConfig &mcfg);

struct Spectrogram {
    int rows = 0;
    int cols = 0;
    std::vector<double> values; // row-major rows x cols
    std::vector<double> velocity_axis;
    long t0 = 0;    // step index of the first column
    int subject = -1;

    double &at(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
};

// Drop the rows whose velocity bin overlaps the closed static band
// [-static_band, static_band] (5 rows at defaults), then min-max scale each
// column to [0, 1]; constant columns map to zeros.
Spectrogram preprocess(const Spectrogram &spec, const MdConfig &mcfg);

// Column streams per track id with window assembly. Steps must arrive in
// increasing order; a missed step starts a new run.
class Extractor {
  public:
    Extractor(waveform::RadioConfig rcfg, StftConfig scfg, MdConfig mcfg, scenesim::Codebook cb)
        : rcfg_(std::move(rcfg)), scfg_(std::move(scfg)), mcfg_(std::move(mcfg)), cb_(std::move(cb)),
          axis_(doppler_axis(rcfg_, scfg_))
    {
    }

    // Feed the confirmed tracks of step t (states in the AP frame). Emits one
    // column per track when enough slow-time history exists; completed
    // windows are appended to the output list.
    void step(const std::vector<waveform::CirFrame> &frames, const std::vector<track::Track> &confirmed, long t);

    std::vector<Spectrogram> take_windows();
    const DopplerAxis &axis() const { return axis_; }

  private:
    struct Run {
        long next_t = -1;
        long t0 = 0;
        std::vector<std::vector<double>> cols;
        long emitted = 0; // columns consumed by completed windows
    };

    waveform::RadioConfig rcfg_;
    StftConfig scfg_;
    MdConfig mcfg_;
    scenesim::Codebook cb_;
    DopplerAxis axis_;
    std::map<int, Run> runs_;
    std::vector<Spectrogram> done_;

    void harvest(int id, Run &run);
};

} // namespace aysense::microdoppler
