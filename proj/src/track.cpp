// SPDX-License-Identifier: Apache-2.0
#include "aysense/track.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aysense/common.hpp"

namespace aysense::track {

Eigen::Vector2d measure(const Eigen::Vector4d &x)
{
    double d = std::hypot(x(0), x(1));
    return {d, rad2deg(std::atan2(x(1), x(0)))};
}

Eigen::Matrix<double, 2, 4> measure_jacobian(const Eigen::Vector4d &x)
{
    double d2 = x(0) * x(0) + x(1) * x(1);
    double d = std::sqrt(d2);
    if (d < 1e-9)
        throw std::invalid_argument("measure_jacobian: state at the origin is singular");
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = x(0) / d;
    H(0, 1) = x(1) / d;
    const double s = 180.0 / kPi;
    H(1, 0) = -s * x(1) / d2;
    H(1, 1) = s * x(0) / d2;
    return H;
}

double wrap_deg(double a)
{
    a = std::fmod(a, 360.0);
    if (a > 180.0)
        a -= 360.0;
    else if (a <= -180.0)
        a += 360.0;
    return a;
}

void predict(Track &trk, double dt, const TrackerConfig &cfg)
{
    if (dt <= 0.0)
        throw std::invalid_argument("predict: dt must be positive");
    Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
    F(0, 2) = dt;
    F(1, 3) = dt;

    // white-acceleration process noise
    const double dt2 = dt * dt, dt3 = dt2 * dt;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Q(0, 0) = Q(1, 1) = dt3 / 3.0;
    Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = dt2 / 2.0;
    Q(2, 2) = Q(3, 3) = dt;
    Q *= cfg.q;

    trk.state.x = F * trk.state.x;
    trk.state.P = F * trk.state.P * F.transpose() + Q;
}

namespace {

Eigen::Matrix2d meas_noise(const TrackerConfig &cfg)
{
    Eigen::Matrix2d R = Eigen::Matrix2d::Zero();
    R(0, 0) = cfg.r_d * cfg.r_d;
    R(1, 1) = cfg.r_theta * cfg.r_theta;
    return R;
}

} // namespace

void update(Track &trk, const Observation &obs, const TrackerConfig &cfg)
{
    auto &st = trk.state;
    Eigen::Vector2d z(obs.d, obs.theta);
    Eigen::Vector2d zp = measure(st.x);
    Eigen::Matrix<double, 2, 4> H = measure_jacobian(st.x);
    Eigen::Matrix2d R = meas_noise(cfg);

    Eigen::Vector2d nu = z - zp;
    nu(1) = wrap_deg(nu(1));

    Eigen::Matrix2d S = H * st.P * H.transpose() + R;
    Eigen::Matrix<double, 4, 2> K = st.P * H.transpose() * S.inverse();
    st.x += K * nu;

    // Joseph form, then symmetrize
    Eigen::Matrix4d IKH = Eigen::Matrix4d::Identity() - K * H;
    st.P = IKH * st.P * IKH.transpose() + K * R * K.transpose();
    st.P = 0.5 * (st.P + st.P.transpose()).eval();
}

Association associate(const std::vector<Track> &tracks, const std::vector<Observation> &observations,
                      const TrackerConfig &cfg)
{
    const int nt = static_cast<int>(tracks.size());
    const int no = static_cast<int>(observations.size());
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::Matrix2d R = meas_noise(cfg);

    std::vector<std::vector<double>> d2(static_cast<size_t>(nt), std::vector<double>(static_cast<size_t>(no), inf));
    for (int i = 0; i < nt; ++i) {
        const auto &st = tracks[static_cast<size_t>(i)].state;
        Eigen::Vector2d zp = measure(st.x);
        Eigen::Matrix<double, 2, 4> H = measure_jacobian(st.x);
        Eigen::Matrix2d Sinv = (H * st.P * H.transpose() + R).inverse();
        for (int j = 0; j < no; ++j) {
            Eigen::Vector2d nu(observations[static_cast<size_t>(j)].d - zp(0),
                               wrap_deg(observations[static_cast<size_t>(j)].theta - zp(1)));
            double m = nu.dot(Sinv * nu);
            if (m <= cfg.gate)
                d2[static_cast<size_t>(i)][static_cast<size_t>(j)] = m;
        }
    }

    Association out;
    std::vector<bool> used_t(static_cast<size_t>(nt), false), used_o(static_cast<size_t>(no), false);
    while (true) {
        double best = inf;
        int bi = -1, bj = -1;
        for (int i = 0; i < nt; ++i) {
            if (used_t[static_cast<size_t>(i)])
                continue;
            for (int j = 0; j < no; ++j) {
                if (used_o[static_cast<size_t>(j)])
                    continue;
                if (d2[static_cast<size_t>(i)][static_cast<size_t>(j)] < best) {
                    best = d2[static_cast<size_t>(i)][static_cast<size_t>(j)];
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0)
            break;
        used_t[static_cast<size_t>(bi)] = true;
        used_o[static_cast<size_t>(bj)] = true;
        out.matches.emplace_back(bi, bj);
    }
    for (int i = 0; i < nt; ++i)
        if (!used_t[static_cast<size_t>(i)])
            out.unmatched_tracks.push_back(i);
    for (int j = 0; j < no; ++j)
        if (!used_o[static_cast<size_t>(j)])
            out.unmatched_observations.push_back(j);
    return out;
}

std::vector<Track> Tracker::step(const std::vector<Observation> &observations, long t)
{
    if (last_t_ && t <= *last_t_)
        throw std::invalid_argument("Tracker::step: t must be strictly increasing");
    last_t_ = t;

    for (auto &trk : tracks_)
        predict(trk, dt_, cfg_);

    Association assoc = associate(tracks_, observations, cfg_);

    for (auto [ti, oi] : assoc.matches) {
        Track &trk = tracks_[static_cast<size_t>(ti)];
        update(trk, observations[static_cast<size_t>(oi)], cfg_);
        trk.hits += 1;
        trk.misses = 0;
        if (trk.status == Status::tentative && trk.hits >= cfg_.confirm_hits)
            trk.status = Status::confirmed;
    }
    for (int ti : assoc.unmatched_tracks) {
        Track &trk = tracks_[static_cast<size_t>(ti)];
        trk.misses += 1;
        trk.hits = 0;
        if (trk.misses >= cfg_.kill_misses)
            trk.status = Status::dead;
    }
    for (int oi : assoc.unmatched_observations) {
        const Observation &o = observations[static_cast<size_t>(oi)];
        double th = deg2rad(o.theta);
        double ox = o.d * std::cos(th), oy = o.d * std::sin(th);
        // initiation gating: secondary returns (limbs, sidelobes) next to an
        // already-tracked target must not seed duplicate tracks
        bool near_existing = false;
        for (const auto &ex : tracks_)
            if (ex.status != Status::dead &&
                std::hypot(ex.state.x(0) - ox, ex.state.x(1) - oy) < cfg_.spawn_radius) {
                near_existing = true;
                break;
            }
        if (near_existing)
            continue;
        Track trk;
        trk.id = next_id_++;
        trk.hits = 1;
        trk.state.x << ox, oy, 0.0, 0.0;
        trk.state.P = Eigen::Matrix4d::Zero();
        trk.state.P(0, 0) = trk.state.P(1, 1) = cfg_.init_pos_std * cfg_.init_pos_std;
        trk.state.P(2, 2) = trk.state.P(3, 3) = cfg_.init_vel_std * cfg_.init_vel_std;
        tracks_.push_back(std::move(trk));
    }

    std::erase_if(tracks_, [](const Track &trk) { return trk.status == Status::dead; });

    std::vector<Track> confirmed;
    for (const auto &trk : tracks_)
        if (trk.status == Status::confirmed)
            confirmed.push_back(trk);
    return confirmed;
}

} // namespace aysense::track
