#ifndef MRIQ_VOLUME_HPP
#define MRIQ_VOLUME_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mriq {

// Scalar type of the on-disk source a volume was loaded from. Drives the
// normalization rule: integer sources divide by the type maximum, real
// sources min-max rescale.
enum class ScalarType : std::uint8_t { U8, I16, I32, F32, F64 };

double scalar_type_max(ScalarType t);

struct VolumeStats {
    double mean = 0.0;
    double std_dev = 0.0; // population definition
};

// 3D scalar grid, x-fastest storage order. Intensities are nominally in
// [0, 1] once normalized; spacing is mm per voxel.
struct Volume {
    std::array<int, 3> dims{0, 0, 0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    ScalarType source_type = ScalarType::F32;
    std::vector<float> data;

    Volume() = default;
    Volume(std::array<int, 3> d, float fill = 0.0f,
           std::array<double, 3> sp = {1.0, 1.0, 1.0});

    std::size_t size() const { return data.size(); }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }

    float& at(int x, int y, int z) { return data[index(x, y, z)]; }
    float at(int x, int y, int z) const { return data[index(x, y, z)]; }
};

// Trilinear sample at a fractional voxel coordinate; contributions outside
// the grid are zero.
double sample_trilinear(const Volume& v, double x, double y, double z);

// NIfTI-1 (.nii, .nii.gz, .hdr/.img) or raw float32 sidecar (.f32raw + .json).
// Integer payloads are kept unnormalized; call normalize_intensity explicitly.
Volume load_volume(const std::string& path);

// Writes float32. Format chosen by extension: .f32raw for the raw sidecar
// pair, NIfTI-1 otherwise (gzip-compressed when the name ends in .gz).
void save_volume(const Volume& v, const std::string& path);

// Integer sources: divide by the datatype maximum, then clamp to [0, 1].
// Real sources: min-max rescale; a constant volume maps to all zeros.
Volume normalize_intensity(const Volume& v);

// Trilinear resampling to isotropic target spacing;
// new dims = round(old_dims * old_spacing / target).
Volume resample_isotropic(const Volume& v, double target_spacing);

// Zero-pad symmetrically (odd surplus to the high side) up to `target` per
// axis, then center-crop to exactly target^3.
Volume pad_center_crop(const Volume& v, int target = 224);

VolumeStats stats(const Volume& v);

} // namespace mriq

#endif
