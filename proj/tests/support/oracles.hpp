#ifndef MRIQ_TESTS_ORACLES_HPP
#define MRIQ_TESTS_ORACLES_HPP

// Independent brute-force reference implementations used to freeze expected
// values. Deliberately written without reusing any library internals.

#include <complex>
#include <cstdint>
#include <vector>

#include "mriq/volume.hpp"

namespace mriq::testing {

// Direct O(N^2) centered 3D DFT: bin (kx,ky,kz) holds frequency
// (k - floor(dim/2)) per axis.
inline std::vector<std::complex<double>> naive_dft3_centered(const Volume& v) {
    const int nx = v.dims[0], ny = v.dims[1], nz = v.dims[2];
    const double tau = 2.0 * 3.14159265358979323846;
    std::vector<std::complex<double>> out(v.size());
    std::size_t o = 0;
    for (int kz = 0; kz < nz; ++kz)
        for (int ky = 0; ky < ny; ++ky)
            for (int kx = 0; kx < nx; ++kx, ++o) {
                const double fx = kx - nx / 2;
                const double fy = ky - ny / 2;
                const double fz = kz - nz / 2;
                std::complex<double> acc{0.0, 0.0};
                for (int z = 0; z < nz; ++z)
                    for (int y = 0; y < ny; ++y)
                        for (int x = 0; x < nx; ++x) {
                            const double phase =
                                -tau * (fx * x / nx + fy * y / ny + fz * z / nz);
                            acc += static_cast<double>(v.at(x, y, z)) *
                                   std::complex<double>(std::cos(phase), std::sin(phase));
                        }
                out[o] = acc;
            }
    return out;
}

// Two-pass population mean / standard deviation with long double accumulation.
struct MeanStd {
    double mean;
    double std_dev;
};

inline MeanStd naive_mean_std(const std::vector<float>& xs) {
    long double sum = 0.0L;
    for (float x : xs)
        sum += x;
    const long double mean = sum / static_cast<long double>(xs.size());
    long double ss = 0.0L;
    for (float x : xs) {
        const long double d = x - mean;
        ss += d * d;
    }
    return {static_cast<double>(mean),
            static_cast<double>(sqrtl(ss / static_cast<long double>(xs.size())))};
}

inline std::int64_t naive_hf_count(const std::vector<std::complex<double>>& bins,
                                   double fraction) {
    double max_mag = 0.0;
    for (const auto& z : bins)
        max_mag = std::max(max_mag, std::abs(z));
    if (max_mag == 0.0)
        return 0;
    std::int64_t n = 0;
    for (const auto& z : bins)
        if (std::abs(z) > fraction * max_mag)
            ++n;
    return n;
}

// Direct sliding-window SSIM: 11^3 Gaussian window (sigma 1.5), L = 1,
// K1 = 0.01, K2 = 0.03, mean over valid positions.
inline double naive_ssim3d(const Volume& a, const Volume& b) {
    constexpr int W = 11;
    double w1[W];
    double wsum = 0.0;
    for (int i = 0; i < W; ++i) {
        const double d = i - W / 2;
        w1[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        wsum += w1[i];
    }
    for (double& w : w1)
        w /= wsum;

    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0.0;
    std::int64_t count = 0;
    for (int z0 = 0; z0 + W <= a.dims[2]; ++z0)
        for (int y0 = 0; y0 + W <= a.dims[1]; ++y0)
            for (int x0 = 0; x0 + W <= a.dims[0]; ++x0) {
                double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
                for (int dz = 0; dz < W; ++dz)
                    for (int dy = 0; dy < W; ++dy)
                        for (int dx = 0; dx < W; ++dx) {
                            const double w = w1[dx] * w1[dy] * w1[dz];
                            const double xv = a.at(x0 + dx, y0 + dy, z0 + dz);
                            const double yv = b.at(x0 + dx, y0 + dy, z0 + dz);
                            mx += w * xv;
                            my += w * yv;
                            mxx += w * xv * xv;
                            myy += w * yv * yv;
                            mxy += w * xv * yv;
                        }
                const double vx = mxx - mx * mx;
                const double vy = myy - my * my;
                const double cov = mxy - mx * my;
                total += ((2 * mx * my + c1) * (2 * cov + c2)) /
                         ((mx * mx + my * my + c1) * (vx + vy + c2));
                ++count;
            }
    return total / static_cast<double>(count);
}

} // namespace mriq::testing

#endif
