// SPDX-License-Identifier: Apache-2.0
#include "aysense/capture.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace aysense::capture {

namespace {

constexpr char kMagic[6] = {'A', 'Y', 'C', 'I', 'R', '1'};

void fnv_mix(std::uint64_t &h, const void *data, size_t n)
{
    const auto *p = static_cast<const unsigned char *>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
}

template <typename T> void put(std::ofstream &f, T v) { f.write(reinterpret_cast<const char *>(&v), sizeof(v)); }

template <typename T> T get(std::ifstream &f, const std::string &path)
{
    T v{};
    f.read(reinterpret_cast<char *>(&v), sizeof(v));
    if (!f)
        throw std::runtime_error("truncated capture file: " + path);
    return v;
}

} // namespace

std::uint64_t codebook_hash(const scenesim::Codebook &cb)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto &p : cb.patterns)
        fnv_mix(h, p.gains.data(), p.gains.size() * sizeof(double));
    fnv_mix(h, cb.steering_deg.data(), cb.steering_deg.size() * sizeof(double));
    fnv_mix(h, &cb.fov_min_deg, sizeof(double));
    fnv_mix(h, &cb.fov_max_deg, sizeof(double));
    return h;
}

CaptureHeader make_header(const waveform::RadioConfig &cfg, std::uint32_t ap_id, std::uint64_t cb_hash,
                          std::uint64_t frame_count)
{
    CaptureHeader h;
    h.f_o = cfg.f_o;
    h.bandwidth = cfg.bandwidth;
    h.t_c = cfg.t_c;
    h.n_taps = static_cast<std::uint32_t>(cfg.n_taps);
    h.n_patterns = static_cast<std::uint32_t>(cfg.n_patterns);
    h.frame_count = frame_count;
    h.ap_id = ap_id;
    h.codebook_hash = cb_hash;
    return h;
}

void write_capture(const std::string &path, const CaptureHeader &header,
                   const std::vector<waveform::CirFrame> &frames)
{
    if (frames.size() != header.frame_count)
        throw std::invalid_argument("write_capture: frame count does not match header");
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open capture for writing: " + path);
    f.write(kMagic, sizeof(kMagic));
    put(f, header.version);
    put(f, header.f_o);
    put(f, header.bandwidth);
    put(f, header.t_c);
    put(f, header.n_taps);
    put(f, header.n_patterns);
    put(f, header.frame_count);
    put(f, header.ap_id);
    put(f, header.codebook_hash);
    for (const auto &fr : frames) {
        if (fr.n_taps != static_cast<int>(header.n_taps) || fr.n_patterns != static_cast<int>(header.n_patterns))
            throw std::invalid_argument("write_capture: frame shape does not match header");
        for (const cxd &v : fr.h) {
            float re = static_cast<float>(v.real()), im = static_cast<float>(v.imag());
            put(f, re);
            put(f, im);
        }
    }
    if (!f)
        throw std::runtime_error("write failure on capture: " + path);
}

std::pair<CaptureHeader, std::vector<waveform::CirFrame>> read_capture(const std::string &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open capture: " + path);
    char magic[6];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("bad capture magic: " + path);
    CaptureHeader h;
    h.version = get<std::uint32_t>(f, path);
    if (h.version != 1)
        throw std::runtime_error("unsupported capture version in " + path);
    h.f_o = get<double>(f, path);
    h.bandwidth = get<double>(f, path);
    h.t_c = get<double>(f, path);
    h.n_taps = get<std::uint32_t>(f, path);
    h.n_patterns = get<std::uint32_t>(f, path);
    h.frame_count = get<std::uint64_t>(f, path);
    h.ap_id = get<std::uint32_t>(f, path);
    h.codebook_hash = get<std::uint64_t>(f, path);

    std::vector<waveform::CirFrame> frames;
    frames.reserve(h.frame_count);
    for (std::uint64_t k = 0; k < h.frame_count; ++k) {
        auto fr = waveform::make_frame(static_cast<long>(k), static_cast<int>(h.n_taps),
                                       static_cast<int>(h.n_patterns));
        for (auto &v : fr.h) {
            float re = get<float>(f, path);
            float im = get<float>(f, path);
            v = cxd(re, im);
        }
        frames.push_back(std::move(fr));
    }
    return {h, std::move(frames)};
}

} // namespace aysense::capture
