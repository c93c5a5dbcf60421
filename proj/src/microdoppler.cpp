// SPDX-License-Identifier: Apache-2.0
#include "aysense/microdoppler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aysense::microdoppler {

StftConfig make_stft_config(int m, int sigma)
{
    if (m < 2 || (m & (m - 1)) != 0)
        throw std::invalid_argument("make_stft_config: m must be a power of two");
    if (sigma < 1 || sigma > m)
        throw std::invalid_argument("make_stft_config: need 0 < sigma <= m");
    StftConfig c;
    c.m = m;
    c.sigma = sigma;
    c.window.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        c.window[static_cast<size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / m));
    return c;
}

DopplerAxis doppler_axis(const waveform::RadioConfig &rcfg, const StftConfig &scfg)
{
    DopplerAxis a;
    a.dv = kSpeedOfLight / (2.0 * rcfg.f_o * scfg.m * rcfg.t_c);
    a.v_max = kSpeedOfLight / (4.0 * rcfg.f_o * rcfg.t_c);
    a.velocity.resize(static_cast<size_t>(scfg.m));
    for (int i = 0; i < scfg.m; ++i)
        a.velocity[static_cast<size_t>(i)] = -a.v_max + i * a.dv;
    return a;
}

int select_beam(double theta_hat_deg, const scenesim::Codebook &cb)
{
    int best = 0;
    double bg = -1.0;
    for (int p = 0; p < static_cast<int>(cb.patterns.size()); ++p) {
        double g = cb.gain(p, theta_hat_deg);
        if (g > bg) {
            bg = g;
            best = p;
        }
    }
    return best;
}

int select_path(double r_hat, const waveform::RadioConfig &cfg)
{
    if (r_hat < 0.0)
        throw std::invalid_argument("select_path: negative distance");
    double spacing = waveform::tap_spacing(cfg);
    // ceil(x - 0.5) rounds exact midpoints down to the smaller tap
    int l = static_cast<int>(std::ceil(r_hat / spacing - 0.5));
    return std::min(std::max(l, 0), cfg.n_taps - 1);
}

void fft(std::vector<cxd> &x)
{
    const size_t n = x.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(x[i], x[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * kPi / static_cast<double>(len);
        cxd wl = std::polar(1.0, ang);
        for (size_t i = 0; i < n; i += len) {
            cxd w = 1.0;
            for (size_t k = 0; k < len / 2; ++k) {
                cxd u = x[i + k];
                cxd v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

std::optional<std::vector<double>> stft_column(const std::vector<waveform::CirFrame> &buffer, int l_star,
                                               int p_star, long n, const waveform::RadioConfig &rcfg,
                                               const StftConfig &scfg, const MdConfig &mcfg)
{
    const int m = scfg.m;
    const long start = n * scfg.sigma;
    if (n < 0 || static_cast<long>(buffer.size()) < start + m)
        return std::nullopt;
    const int half_q = mcfg.q / 2;
    if (l_star - half_q < 0 || l_star + half_q >= rcfg.n_taps)
        throw std::invalid_argument("stft_column: fast-time window out of range");
    if (p_star < 0 || p_star >= rcfg.n_patterns)
        throw std::invalid_argument("stft_column: bad beam pattern index");

    std::vector<double> mu(static_cast<size_t>(m), 0.0);
    std::vector<cxd> seg(static_cast<size_t>(m));
    for (int l = l_star - half_q; l <= l_star + half_q; ++l) {
        for (int i = 0; i < m; ++i)
            seg[static_cast<size_t>(i)] =
                buffer[static_cast<size_t>(start + i)].at(l, p_star) * scfg.window[static_cast<size_t>(i)];
        fft(seg);
        // DFT bin i maps to velocity row (i + m/2) mod m so the axis runs
        // [-v_max, +v_max) with DC in the center.
        for (int i = 0; i < m; ++i) {
            int row = (i + m / 2) % m;
            mu[static_cast<size_t>(row)] += std::norm(seg[static_cast<size_t>(i)]);
        }
    }
    return mu;
}

Spectrogram preprocess(const Spectrogram &spec, const MdConfig &mcfg)
{
    const int rows = spec.rows;
    double dv = rows > 1 ? spec.velocity_axis[1] - spec.velocity_axis[0] : 0.0;
    std::vector<int> keep;
    for (int r = 0; r < rows; ++r) {
        // drop rows whose bin [v - dv/2, v + dv/2] overlaps the static band
        if (std::abs(spec.velocity_axis[static_cast<size_t>(r)]) <= mcfg.static_band + dv / 2.0)
            continue;
        keep.push_back(r);
    }

    Spectrogram out;
    out.rows = static_cast<int>(keep.size());
    out.cols = spec.cols;
    out.t0 = spec.t0;
    out.subject = spec.subject;
    out.values.resize(static_cast<size_t>(out.rows) * out.cols);
    for (int r = 0; r < out.rows; ++r)
        out.velocity_axis.push_back(spec.velocity_axis[static_cast<size_t>(keep[static_cast<size_t>(r)])]);

    for (int c = 0; c < out.cols; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int r : keep) {
            double v = spec.at(r, c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double span = hi - lo;
        for (int r = 0; r < out.rows; ++r) {
            double v = spec.at(keep[static_cast<size_t>(r)], c);
            out.at(r, c) = span > 0.0 ? (v - lo) / span : 0.0;
        }
    }
    return out;
}

void Extractor::harvest(int id, Run &run)
{
    const long stride = mcfg_.t_window - mcfg_.overlap;
    while (static_cast<long>(run.cols.size()) >= run.emitted + mcfg_.t_window) {
        Spectrogram sp;
        sp.rows = scfg_.m;
        sp.cols = mcfg_.t_window;
        sp.subject = id;
        sp.t0 = run.t0 + run.emitted;
        sp.velocity_axis = axis_.velocity;
        sp.values.resize(static_cast<size_t>(sp.rows) * sp.cols);
        for (int c = 0; c < sp.cols; ++c) {
            const auto &col = run.cols[static_cast<size_t>(run.emitted + c)];
            for (int r = 0; r < sp.rows; ++r)
                sp.at(r, c) = col[static_cast<size_t>(r)];
        }
        done_.push_back(std::move(sp));
        run.emitted += stride;
    }
}

void Extractor::step(const std::vector<waveform::CirFrame> &frames, const std::vector<track::Track> &confirmed,
                     long t)
{
    const int half_q = mcfg_.q / 2;
    for (const auto &trk : confirmed) {
        double xh = trk.state.x(0), yh = trk.state.x(1);
        double theta = rad2deg(std::atan2(yh, xh));
        double r_hat = std::hypot(xh, yh);
        int p_star = select_beam(theta, cb_);
        int l_star = std::clamp(select_path(r_hat, rcfg_), half_q, rcfg_.n_taps - 1 - half_q);
        auto col = stft_column(frames, l_star, p_star, t, rcfg_, scfg_, mcfg_);
        if (!col)
            continue;

        Run &run = runs_[trk.id];
        if (run.next_t != t) { // gap or brand-new run: restart the stream
            run.cols.clear();
            run.emitted = 0;
            run.t0 = t;
        }
        run.cols.push_back(std::move(*col));
        run.next_t = t + 1;
        harvest(trk.id, run);
    }
}

std::vector<Spectrogram> Extractor::take_windows()
{
    auto out = std::move(done_);
    done_.clear();
    return out;
}

} // namespace aysense::microdoppler
