// Writes a synthetic brain-like phantom volume, handy for trying the CLI
// without real scans: a soft ellipsoid head with a few internal blobs,
// normalized to [0, 1].

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "mriq/rng.hpp"
#include "mriq/volume.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic phantom volume generator"};
    std::string out_path;
    int size = 64;
    std::uint64_t seed = 0;
    app.add_option("--out", out_path, "output volume path")->required();
    app.add_option("--size", size, "cubic dimension (default 64)");
    app.add_option("--seed", seed, "blob placement seed");
    CLI11_PARSE(app, argc, argv);

    mriq::Volume v({size, size, size});
    mriq::Rng rng(seed);
    const double c = (size - 1) / 2.0;
    const double head_r = 0.42 * size;

    struct Blob {
        double x, y, z, r, a;
    };
    std::vector<Blob> blobs;
    for (int i = 0; i < 6; ++i)
        blobs.push_back({c + rng.uniform(-0.2, 0.2) * size,
                         c + rng.uniform(-0.2, 0.2) * size,
                         c + rng.uniform(-0.2, 0.2) * size,
                         rng.uniform(0.05, 0.15) * size, rng.uniform(0.2, 0.6)});

    for (int z = 0; z < size; ++z)
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double d = std::sqrt((x - c) * (x - c) + (y - c) * (y - c) +
                                           (z - c) * (z - c));
                double val = 0.55 / (1.0 + std::exp((d - head_r) / (0.02 * size)));
                for (const auto& b : blobs) {
                    const double bd2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) +
                                       (z - b.z) * (z - b.z);
                    val += b.a * std::exp(-bd2 / (2.0 * b.r * b.r));
                }
                v.at(x, y, z) = static_cast<float>(val);
            }

    const auto [mn, mx] = std::minmax_element(v.data.begin(), v.data.end());
    const float lo = *mn, hi = *mx;
    for (auto& x : v.data)
        x = (x - lo) / (hi - lo);

    mriq::save_volume(v, out_path);
    std::printf("wrote %dx%dx%d phantom to %s\n", size, size, size, out_path.c_str());
    return 0;
}
