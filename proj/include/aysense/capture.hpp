// SPDX-License-Identifier: Apache-2.0
//
// "AYCIR1" capture files: header + frames as little-endian float32
// interleaved real/imag, row-major taps x patterns per frame.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aysense/scenesim.hpp"
#include "aysense/waveform.hpp"

namespace aysense::capture {

struct CaptureHeader {
    std::uint32_t version = 1;
    double f_o = 0.0;
    double bandwidth = 0.0;
    double t_c = 0.0;
    std::uint32_t n_taps = 0;
    std::uint32_t n_patterns = 0;
    std::uint64_t frame_count = 0;
    std::uint32_t ap_id = 0;
    std::uint64_t codebook_hash = 0;
};

// FNV-1a over the codebook's gain and steering values.
std::uint64_t codebook_hash(const scenesim::Codebook &cb);

CaptureHeader make_header(const waveform::RadioConfig &cfg, std::uint32_t ap_id, std::uint64_t cb_hash,
                          std::uint64_t frame_count);

void write_capture(const std::string &path, const CaptureHeader &header,
                   const std::vector<waveform::CirFrame> &frames);

// Throws std::runtime_error on missing file, bad magic or truncation.
std::pair<CaptureHeader, std::vector<waveform::CirFrame>> read_capture(const std::string &path);

} // namespace aysense::capture
