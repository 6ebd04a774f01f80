#include "mriq/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mriq/error.hpp"

namespace mriq {

Volume::Volume(std::array<int, 3> d, float fill, std::array<double, 3> sp)
    : dims(d), spacing(sp) {
    for (int a = 0; a < 3; ++a) {
        if (d[a] < 1)
            throw std::invalid_argument("volume dims must be >= 1");
        if (sp[a] <= 0.0)
            throw std::invalid_argument("volume spacing must be > 0");
    }
    data.assign(static_cast<std::size_t>(d[0]) * d[1] * d[2], fill);
}

double scalar_type_max(ScalarType t) {
    switch (t) {
    case ScalarType::U8:  return 255.0;
    case ScalarType::I16: return 32767.0;
    case ScalarType::I32: return 2147483647.0;
    case ScalarType::F32:
    case ScalarType::F64: return 1.0;
    }
    return 1.0;
}

double sample_trilinear(const Volume& v, double x, double y, double z) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int z0 = static_cast<int>(std::floor(z));
    const double fx = x - x0, fy = y - y0, fz = z - z0;

    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz) {
        const int zz = z0 + dz;
        if (zz < 0 || zz >= v.dims[2]) continue;
        const double wz = dz ? fz : 1.0 - fz;
        for (int dy = 0; dy < 2; ++dy) {
            const int yy = y0 + dy;
            if (yy < 0 || yy >= v.dims[1]) continue;
            const double wy = dy ? fy : 1.0 - fy;
            for (int dx = 0; dx < 2; ++dx) {
                const int xx = x0 + dx;
                if (xx < 0 || xx >= v.dims[0]) continue;
                const double wx = dx ? fx : 1.0 - fx;
                acc += wx * wy * wz * v.at(xx, yy, zz);
            }
        }
    }
    return acc;
}

Volume normalize_intensity(const Volume& v) {
    if (v.data.empty())
        throw data_error("normalize_intensity: empty volume");

    Volume out = v;
    out.source_type = ScalarType::F32;

    if (v.source_type == ScalarType::F32 || v.source_type == ScalarType::F64) {
        const auto [mn_it, mx_it] = std::minmax_element(v.data.begin(), v.data.end());
        const double mn = *mn_it, mx = *mx_it;
        if (mx <= mn) {
            std::fill(out.data.begin(), out.data.end(), 0.0f);
            return out;
        }
        const double scale = 1.0 / (mx - mn);
        for (auto& x : out.data)
            x = static_cast<float>((x - mn) * scale);
    } else {
        const double inv = 1.0 / scalar_type_max(v.source_type);
        for (auto& x : out.data)
            x = static_cast<float>(std::clamp(x * inv, 0.0, 1.0));
    }
    return out;
}

Volume resample_isotropic(const Volume& v, double target_spacing) {
    if (target_spacing <= 0.0)
        throw std::invalid_argument("resample_isotropic: target spacing must be > 0");

    std::array<int, 3> nd{};
    for (int a = 0; a < 3; ++a) {
        nd[a] = static_cast<int>(std::llround(v.dims[a] * v.spacing[a] / target_spacing));
        if (nd[a] < 1)
            throw data_error("resample_isotropic: resulting dimension would be 0");
    }
    if (nd == v.dims &&
        v.spacing == std::array<double, 3>{target_spacing, target_spacing, target_spacing})
        return v;

    Volume out(nd, 0.0f, {target_spacing, target_spacing, target_spacing});
    out.source_type = v.source_type;
    const double sx = target_spacing / v.spacing[0];
    const double sy = target_spacing / v.spacing[1];
    const double sz = target_spacing / v.spacing[2];
    for (int z = 0; z < nd[2]; ++z)
        for (int y = 0; y < nd[1]; ++y)
            for (int x = 0; x < nd[0]; ++x)
                out.at(x, y, z) = static_cast<float>(
                    sample_trilinear(v, x * sx, y * sy, z * sz));
    return out;
}

Volume pad_center_crop(const Volume& v, int target) {
    if (target < 1)
        throw std::invalid_argument("pad_center_crop: target must be >= 1");
    if (v.dims == std::array<int, 3>{target, target, target})
        return v;

    Volume out({target, target, target}, 0.0f, v.spacing);
    out.source_type = v.source_type;

    // Per axis: where the source window starts, and where it lands in the
    // output. Padding surplus goes to the high side, cropping removes the
    // surplus from the high side.
    std::array<int, 3> src0{}, dst0{}, len{};
    for (int a = 0; a < 3; ++a) {
        const int n = v.dims[a];
        if (n >= target) {
            src0[a] = (n - target) / 2;
            dst0[a] = 0;
            len[a] = target;
        } else {
            src0[a] = 0;
            dst0[a] = (target - n) / 2;
            len[a] = n;
        }
    }
    for (int z = 0; z < len[2]; ++z)
        for (int y = 0; y < len[1]; ++y)
            for (int x = 0; x < len[0]; ++x)
                out.at(dst0[0] + x, dst0[1] + y, dst0[2] + z) =
                    v.at(src0[0] + x, src0[1] + y, src0[2] + z);
    return out;
}

VolumeStats stats(const Volume& v) {
    if (v.data.empty())
        throw data_error("stats: empty volume");
    const double n = static_cast<double>(v.data.size());
    double sum = 0.0;
    for (float x : v.data)
        sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (float x : v.data) {
        const double d = x - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / n)};
}

} // namespace mriq
