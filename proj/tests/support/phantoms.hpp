#ifndef MRIQ_TESTS_PHANTOMS_HPP
#define MRIQ_TESTS_PHANTOMS_HPP

#include <algorithm>
#include <cmath>

#include "mriq/rng.hpp"
#include "mriq/volume.hpp"

namespace mriq::testing {

// Gaussian-blob head phantom, min-max normalized to [lo, hi].
inline Volume smooth_phantom(int n, std::uint64_t seed, float lo = 0.0f,
                             float hi = 1.0f) {
    Volume v({n, n, n});
    Rng rng(seed);
    struct Blob {
        double x, y, z, r, a;
    };
    std::array<Blob, 5> blobs{};
    for (auto& b : blobs) {
        b.x = rng.uniform(0.25, 0.75) * n;
        b.y = rng.uniform(0.25, 0.75) * n;
        b.z = rng.uniform(0.25, 0.75) * n;
        b.r = rng.uniform(0.10, 0.25) * n;
        b.a = rng.uniform(0.3, 1.0);
    }
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                double val = 0.0;
                for (const auto& b : blobs) {
                    const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) +
                                      (z - b.z) * (z - b.z);
                    val += b.a * std::exp(-d2 / (2.0 * b.r * b.r));
                }
                v.at(x, y, z) = static_cast<float>(val);
            }
    const auto [mn, mx] = std::minmax_element(v.data.begin(), v.data.end());
    const float a = *mn, b = *mx;
    for (auto& x : v.data)
        x = lo + (hi - lo) * (x - a) / (b - a);
    return v;
}

// Band-structured phantom: 0.5 plus a few cosines with known (odd and even)
// frequencies along each axis. Its spectrum has a handful of large bins and
// machine-noise everywhere else, and its values keep a wide margin inside
// [0, 1], so k-space ratio oracles see no clipping and no near-threshold bins.
inline Volume cosine_phantom(int n) {
    Volume v({n, n, n});
    const double w = 2.0 * 3.14159265358979323846 / n;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double val = 0.5 + 0.10 * std::cos(w * 1 * x) +
                                   0.08 * std::cos(w * 3 * y) +
                                   0.06 * std::cos(w * 5 * z) +
                                   0.05 * std::cos(w * (2 * x + y)) +
                                   0.04 * std::cos(w * (x + 2 * z));
                v.at(x, y, z) = static_cast<float>(val);
            }
    return v;
}

// White noise around mid-gray; full spectral support, no clipping headroom
// issues for band-truncation fixtures.
inline Volume noise_band_phantom(int n, std::uint64_t seed, double amplitude = 0.2) {
    Volume v({n, n, n});
    Rng rng(seed);
    for (auto& x : v.data)
        x = static_cast<float>(0.5 + amplitude * rng.uniform(-1.0, 1.0));
    return v;
}

inline Volume random_volume(std::array<int, 3> dims, std::uint64_t seed) {
    Volume v(dims);
    Rng rng(seed);
    for (auto& x : v.data)
        x = static_cast<float>(rng.uniform());
    return v;
}

inline Volume ramp_volume(std::array<int, 3> dims, int axis = 0) {
    Volume v(dims);
    const int n = dims[axis];
    for (int z = 0; z < dims[2]; ++z)
        for (int y = 0; y < dims[1]; ++y)
            for (int x = 0; x < dims[0]; ++x) {
                const int i = (axis == 0) ? x : (axis == 1 ? y : z);
                v.at(x, y, z) = static_cast<float>(i) / static_cast<float>(n - 1);
            }
    return v;
}

inline Volume sphere_phantom(int n, double radius_frac, float inside,
                             float outside = 0.0f) {
    Volume v({n, n, n}, outside);
    const double c = (n - 1) / 2.0;
    const double r2 = radius_frac * n * radius_frac * n;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                if ((x - c) * (x - c) + (y - c) * (y - c) + (z - c) * (z - c) <= r2)
                    v.at(x, y, z) = inside;
    return v;
}

inline double max_abs_diff(const Volume& a, const Volume& b) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        best = std::max(best, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
    return best;
}

inline bool finite_in_unit_range(const Volume& v) {
    for (float x : v.data)
        if (!std::isfinite(x) || x < 0.0f || x > 1.0f)
            return false;
    return true;
}

} // namespace mriq::testing

#endif
