#ifndef MRIQ_AUGMENT_HPP
#define MRIQ_AUGMENT_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "mriq/rng.hpp"
#include "mriq/volume.hpp"

namespace mriq {

struct ElasticParams {
    double sigma = 25.0; // smoothing sigma, [20, 30]
    double scale = 350.0; // displacement scale, [200, 500]
    std::uint64_t seed = 0;

    bool operator==(const ElasticParams&) const = default;
};

struct SkullStripParams {
    double threshold = 0.1; // absolute intensity threshold, (0, 1)
    int dilate_radius = 2;  // [1, 5]
    std::uint64_t seed = 0;

    bool operator==(const SkullStripParams&) const = default;
};

// Everything random_augment applied, in application order
// (skull strip -> elastic -> rotate -> translate -> flip).
struct AugmentSpec {
    std::optional<SkullStripParams> skull_strip;
    std::optional<ElasticParams> elastic;
    std::optional<std::array<double, 3>> rotation_deg; // [-10, 10] per axis
    std::optional<std::array<int, 3>> translation;     // [-10, 10] voxels
    std::vector<int> flip_axes;                        // subset of {0,1,2}

    bool operator==(const AugmentSpec&) const = default;
};

// Integer voxel shift with zero fill at exposed borders.
Volume translate(const Volume& v, const std::array<int, 3>& offsets);

// Rotation about the volume center, order x -> y -> z, trilinear resampling,
// zero outside.
Volume rotate(const Volume& v, const std::array<double, 3>& angles_deg);

// Exact index reversal along one axis.
Volume flip(const Volume& v, int axis);

// Per-voxel displacement drawn uniform in [-1, 1] per component, Gaussian
// smoothed (truncated at 4 sigma), scaled, added to the identity grid;
// resampled trilinearly with zero outside. scale 0 is permitted for testing.
Volume elastic_deform(const Volume& v, double sigma, double scale, Rng& rng);

struct SkullStripResult {
    Volume volume;
    bool mask_empty = false; // opening left nothing; input returned unchanged
};

// Threshold mask -> morphological opening (6-connected unit ball) -> largest
// 6-connected component -> dilation by `dilate_radius` -> masked copy.
SkullStripResult skull_strip_crop(const Volume& v, double threshold, int dilate_radius,
                                  Rng& rng);

struct AugmentResult {
    Volume volume;
    AugmentSpec spec;
};

// Applies each augmentation independently with probability 1/2, parameters
// uniform within the sampling ranges, fixed application order.
AugmentResult random_augment(const Volume& v, Rng& rng);

// Replays a recorded spec (same order as random_augment).
Volume apply_augment(const Volume& v, const AugmentSpec& spec);

} // namespace mriq

#endif
