// SPDX-License-Identifier: Apache-2.0
//
// Angle estimation by correlating a candidate's per-pattern power profile
// against the codebook gain curves.
#pragma once

#include "aysense/detect.hpp"
#include "aysense/scenesim.hpp"

namespace aysense::aoa {

// argmax over the codebook grid of sum_p g_p(theta) * s_p / ||s||_2, where
// s holds the squared foreground amplitudes. Ties break toward the smaller
// angle. Throws std::invalid_argument on an all-zero profile.
double estimate_aoa(const detect::Candidate &candidate, const scenesim::Codebook &codebook);

} // namespace aysense::aoa
