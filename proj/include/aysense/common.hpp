// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace aysense {

using cxd = std::complex<double>;

constexpr double kSpeedOfLight = 299792458.0; // m/s
constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// splitmix64 finalizer, used to mix substream ids into a root seed so that
// per-(ap, packet) streams are independent and reproducible.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0)
{
    return mix64(mix64(root ^ mix64(a)) ^ mix64(b + 0x51ed2701ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0)
{
    return std::mt19937_64(derive_stream(root, a, b));
}

} // namespace aysense
