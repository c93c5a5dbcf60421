// SPDX-License-Identifier: Apache-2.0
#include "aysense/aoa.hpp"

#include <cmath>
#include <stdexcept>

namespace aysense::aoa {

double estimate_aoa(const detect::Candidate &candidate, const scenesim::Codebook &codebook)
{
    const auto &s = candidate.foreground_sq;
    const int n_p = static_cast<int>(codebook.patterns.size());
    if (static_cast<int>(s.size()) != n_p)
        throw std::invalid_argument("estimate_aoa: profile/codebook size mismatch");

    double norm = 0.0;
    for (double v : s)
        norm += v * v;
    norm = std::sqrt(norm);
    if (norm <= 0.0)
        throw std::invalid_argument("estimate_aoa: all-zero power profile");

    const int grid = codebook.grid_size();
    double best = -1.0;
    int best_i = 0;
    for (int i = 0; i < grid; ++i) {
        double corr = 0.0;
        for (int p = 0; p < n_p; ++p)
            corr += codebook.patterns[static_cast<size_t>(p)].gains[static_cast<size_t>(i)] *
                    s[static_cast<size_t>(p)] / norm;
        if (corr > best) { // strict: ties keep the smaller angle
            best = corr;
            best_i = i;
        }
    }
    return codebook.grid_angle(best_i);
}

} // namespace aysense::aoa
