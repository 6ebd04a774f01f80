#include "mriq/augment.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "mriq/error.hpp"
#include "mriq/util.hpp"

namespace mriq {
namespace {

constexpr double DegToRad = 3.14159265358979323846 / 180.0;

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 matmul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                r[i][j] += a[i][k] * b[k][j];
    return r;
}

Mat3 axis_rotation(int axis, double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    switch (axis) {
    case 0: return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
    case 1: return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
    default: return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
    }
}

// Separable Gaussian smoothing of a double field, kernel truncated at
// 4 sigma, taps outside the grid contribute zero.
void smooth_field(std::vector<double>& field, const std::array<int, 3>& dims,
                  double sigma) {
    const int r = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> w(static_cast<std::size_t>(2 * r + 1));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        w[static_cast<std::size_t>(i + r)] =
            std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
        sum += w[static_cast<std::size_t>(i + r)];
    }
    for (auto& x : w)
        x /= sum;

    auto idx = [&](int x, int y, int z) {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    };
    std::vector<double> tmp(field.size());
    for (int axis = 0; axis < 3; ++axis) {
        const int n = dims[axis];
        for (int z = 0; z < dims[2]; ++z)
            for (int y = 0; y < dims[1]; ++y)
                for (int x = 0; x < dims[0]; ++x) {
                    const int pos = (axis == 0) ? x : (axis == 1 ? y : z);
                    const int lo = std::max(-r, -pos);
                    const int hi = std::min(r, n - 1 - pos);
                    double acc = 0.0;
                    for (int t = lo; t <= hi; ++t) {
                        const int xx = x + (axis == 0 ? t : 0);
                        const int yy = y + (axis == 1 ? t : 0);
                        const int zz = z + (axis == 2 ? t : 0);
                        acc += w[static_cast<std::size_t>(t + r)] * field[idx(xx, yy, zz)];
                    }
                    tmp[idx(x, y, z)] = acc;
                }
        field.swap(tmp);
    }
}

using Mask = std::vector<std::uint8_t>;

// Out-of-grid neighbors count as foreground, so erosion only eats at
// in-grid background boundaries and a full mask is a fixed point of opening.
Mask erode6(const Mask& m, const std::array<int, 3>& dims) {
    Mask out(m.size(), 0);
    auto get = [&](int x, int y, int z) -> std::uint8_t {
        if (x < 0 || y < 0 || z < 0 || x >= dims[0] || y >= dims[1] || z >= dims[2])
            return 1;
        return m[static_cast<std::size_t>(x) +
                 static_cast<std::size_t>(dims[0]) *
                     (static_cast<std::size_t>(y) +
                      static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z))];
    };
    std::size_t o = 0;
    for (int z = 0; z < dims[2]; ++z)
        for (int y = 0; y < dims[1]; ++y)
            for (int x = 0; x < dims[0]; ++x, ++o)
                out[o] = get(x, y, z) && get(x - 1, y, z) && get(x + 1, y, z) &&
                         get(x, y - 1, z) && get(x, y + 1, z) && get(x, y, z - 1) &&
                         get(x, y, z + 1);
    return out;
}

Mask dilate6(const Mask& m, const std::array<int, 3>& dims) {
    Mask out(m.size(), 0);
    auto get = [&](int x, int y, int z) -> std::uint8_t {
        if (x < 0 || y < 0 || z < 0 || x >= dims[0] || y >= dims[1] || z >= dims[2])
            return 0;
        return m[static_cast<std::size_t>(x) +
                 static_cast<std::size_t>(dims[0]) *
                     (static_cast<std::size_t>(y) +
                      static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z))];
    };
    std::size_t o = 0;
    for (int z = 0; z < dims[2]; ++z)
        for (int y = 0; y < dims[1]; ++y)
            for (int x = 0; x < dims[0]; ++x, ++o)
                out[o] = get(x, y, z) || get(x - 1, y, z) || get(x + 1, y, z) ||
                         get(x, y - 1, z) || get(x, y + 1, z) || get(x, y, z - 1) ||
                         get(x, y, z + 1);
    return out;
}

Mask largest_component6(const Mask& m, const std::array<int, 3>& dims) {
    std::vector<std::int32_t> label(m.size(), 0);
    auto flat = [&](int x, int y, int z) {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    };
    std::int32_t next_label = 0;
    std::int32_t best_label = 0;
    std::size_t best_size = 0;
    std::queue<std::array<int, 3>> frontier;
    for (int z0 = 0; z0 < dims[2]; ++z0)
        for (int y0 = 0; y0 < dims[1]; ++y0)
            for (int x0 = 0; x0 < dims[0]; ++x0) {
                const std::size_t start = flat(x0, y0, z0);
                if (!m[start] || label[start])
                    continue;
                ++next_label;
                std::size_t count = 0;
                label[start] = next_label;
                frontier.push({x0, y0, z0});
                while (!frontier.empty()) {
                    const auto [x, y, z] = frontier.front();
                    frontier.pop();
                    ++count;
                    static constexpr int d[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                                    {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
                    for (const auto& dd : d) {
                        const int nx = x + dd[0], ny = y + dd[1], nz = z + dd[2];
                        if (nx < 0 || ny < 0 || nz < 0 || nx >= dims[0] ||
                            ny >= dims[1] || nz >= dims[2])
                            continue;
                        const std::size_t q = flat(nx, ny, nz);
                        if (m[q] && !label[q]) {
                            label[q] = next_label;
                            frontier.push({nx, ny, nz});
                        }
                    }
                }
                if (count > best_size) {
                    best_size = count;
                    best_label = next_label;
                }
            }
    Mask out(m.size(), 0);
    if (best_label)
        for (std::size_t i = 0; i < m.size(); ++i)
            out[i] = label[i] == best_label;
    return out;
}

} // namespace

Volume translate(const Volume& v, const std::array<int, 3>& offsets) {
    for (int a = 0; a < 3; ++a)
        if (std::abs(offsets[a]) > v.dims[a])
            throw std::invalid_argument("translate: |offset| exceeds volume extent");

    Volume out(v.dims, 0.0f, v.spacing);
    out.source_type = v.source_type;
    for (int z = 0; z < v.dims[2]; ++z) {
        const int sz = z - offsets[2];
        if (sz < 0 || sz >= v.dims[2]) continue;
        for (int y = 0; y < v.dims[1]; ++y) {
            const int sy = y - offsets[1];
            if (sy < 0 || sy >= v.dims[1]) continue;
            for (int x = 0; x < v.dims[0]; ++x) {
                const int sx = x - offsets[0];
                if (sx < 0 || sx >= v.dims[0]) continue;
                out.at(x, y, z) = v.at(sx, sy, sz);
            }
        }
    }
    return out;
}

Volume rotate(const Volume& v, const std::array<double, 3>& angles_deg) {
    for (double a : angles_deg)
        if (!(a >= -10.0 && a <= 10.0))
            throw std::invalid_argument("rotate: angles must be in [-10, 10] degrees");
    if (angles_deg == std::array<double, 3>{0.0, 0.0, 0.0})
        return v;

    // Forward transform is Rz * Ry * Rx about the center; resample with the
    // inverse.
    const Mat3 inv = matmul(
        matmul(axis_rotation(0, -angles_deg[0] * DegToRad),
               axis_rotation(1, -angles_deg[1] * DegToRad)),
        axis_rotation(2, -angles_deg[2] * DegToRad));
    const std::array<double, 3> c = {(v.dims[0] - 1) / 2.0, (v.dims[1] - 1) / 2.0,
                                     (v.dims[2] - 1) / 2.0};

    Volume out(v.dims, 0.0f, v.spacing);
    out.source_type = v.source_type;
    for (int z = 0; z < v.dims[2]; ++z)
        for (int y = 0; y < v.dims[1]; ++y)
            for (int x = 0; x < v.dims[0]; ++x) {
                const double px = x - c[0], py = y - c[1], pz = z - c[2];
                const double qx = inv[0][0] * px + inv[0][1] * py + inv[0][2] * pz + c[0];
                const double qy = inv[1][0] * px + inv[1][1] * py + inv[1][2] * pz + c[1];
                const double qz = inv[2][0] * px + inv[2][1] * py + inv[2][2] * pz + c[2];
                out.at(x, y, z) = static_cast<float>(sample_trilinear(v, qx, qy, qz));
            }
    return out;
}

Volume flip(const Volume& v, int axis) {
    if (axis < 0 || axis > 2)
        throw std::invalid_argument("flip: axis must be 0, 1 or 2");
    Volume out = v;
    const int n = v.dims[axis];
    for (int z = 0; z < v.dims[2]; ++z)
        for (int y = 0; y < v.dims[1]; ++y)
            for (int x = 0; x < v.dims[0]; ++x) {
                const int sx = (axis == 0) ? n - 1 - x : x;
                const int sy = (axis == 1) ? n - 1 - y : y;
                const int sz = (axis == 2) ? n - 1 - z : z;
                out.at(x, y, z) = v.at(sx, sy, sz);
            }
    return out;
}

Volume elastic_deform(const Volume& v, double sigma, double scale, Rng& rng) {
    if (!(sigma >= 20.0 && sigma <= 30.0))
        throw std::invalid_argument("elastic_deform: sigma must be in [20, 30]");
    if (scale != 0.0 && !(scale >= 200.0 && scale <= 500.0))
        throw std::invalid_argument("elastic_deform: scale must be 0 or in [200, 500]");

    const std::size_t n = v.size();
    std::array<std::vector<double>, 3> disp;
    for (auto& d : disp) {
        d.resize(n);
        for (auto& x : d)
            x = rng.uniform(-1.0, 1.0);
        smooth_field(d, v.dims, sigma);
    }

    Volume out(v.dims, 0.0f, v.spacing);
    out.source_type = v.source_type;
    std::size_t i = 0;
    for (int z = 0; z < v.dims[2]; ++z)
        for (int y = 0; y < v.dims[1]; ++y)
            for (int x = 0; x < v.dims[0]; ++x, ++i)
                out.at(x, y, z) = static_cast<float>(
                    sample_trilinear(v, x + scale * disp[0][i], y + scale * disp[1][i],
                                     z + scale * disp[2][i]));
    return out;
}

SkullStripResult skull_strip_crop(const Volume& v, double threshold, int dilate_radius,
                                  Rng& /*rng*/) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("skull_strip_crop: threshold must be in (0, 1)");
    if (dilate_radius < 1 || dilate_radius > 5)
        throw std::invalid_argument("skull_strip_crop: dilate radius must be in [1, 5]");

    Mask mask(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        mask[i] = v.data[i] > threshold;

    // Opening removes specks before the component analysis.
    mask = dilate6(erode6(mask, v.dims), v.dims);
    if (std::find(mask.begin(), mask.end(), std::uint8_t{1}) == mask.end())
        return {v, true};

    mask = largest_component6(mask, v.dims);
    for (int i = 0; i < dilate_radius; ++i)
        mask = dilate6(mask, v.dims);

    Volume out = v;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!mask[i])
            out.data[i] = 0.0f;
    return {std::move(out), false};
}

Volume apply_augment(const Volume& v, const AugmentSpec& spec) {
    Volume cur = v;
    if (spec.skull_strip) {
        Rng sub(spec.skull_strip->seed);
        cur = skull_strip_crop(cur, spec.skull_strip->threshold,
                               spec.skull_strip->dilate_radius, sub)
                  .volume;
    }
    if (spec.elastic) {
        Rng sub(spec.elastic->seed);
        cur = elastic_deform(cur, spec.elastic->sigma, spec.elastic->scale, sub);
    }
    if (spec.rotation_deg)
        cur = rotate(cur, *spec.rotation_deg);
    if (spec.translation)
        cur = translate(cur, *spec.translation);
    for (int axis : spec.flip_axes)
        cur = flip(cur, axis);
    return cur;
}

AugmentResult random_augment(const Volume& v, Rng& rng) {
    // Stage coins are drawn up front, parameters afterwards in application
    // order; the draw sequence is part of the determinism contract.
    const bool do_strip = rng.bernoulli(0.5);
    const bool do_elastic = rng.bernoulli(0.5);
    const bool do_rotate = rng.bernoulli(0.5);
    const bool do_translate = rng.bernoulli(0.5);
    const bool do_flip = rng.bernoulli(0.5);

    AugmentResult res{v, {}};
    if (do_strip) {
        float max_val = 0.0f;
        for (float x : res.volume.data)
            max_val = std::max(max_val, x);
        SkullStripParams p;
        p.threshold = std::clamp(quantize6(0.1 * max_val), 1e-6, 1.0 - 1e-6);
        p.dilate_radius = rng.uniform_int(1, 5);
        p.seed = rng.next_u64();
        Rng sub(p.seed);
        res.volume = skull_strip_crop(res.volume, p.threshold, p.dilate_radius, sub).volume;
        res.spec.skull_strip = p;
    }
    if (do_elastic) {
        ElasticParams p;
        p.sigma = quantize6(rng.uniform(20.0, 30.0));
        p.scale = quantize6(rng.uniform(200.0, 500.0));
        p.seed = rng.next_u64();
        Rng sub(p.seed);
        res.volume = elastic_deform(res.volume, p.sigma, p.scale, sub);
        res.spec.elastic = p;
    }
    if (do_rotate) {
        std::array<double, 3> angles{};
        for (auto& a : angles)
            a = quantize6(rng.uniform(-10.0, 10.0));
        res.volume = rotate(res.volume, angles);
        res.spec.rotation_deg = angles;
    }
    if (do_translate) {
        std::array<int, 3> off{};
        for (int a = 0; a < 3; ++a)
            off[a] = std::clamp(rng.uniform_int(-10, 10), -v.dims[a], v.dims[a]);
        res.volume = translate(res.volume, off);
        res.spec.translation = off;
    }
    if (do_flip) {
        for (int axis = 0; axis < 3; ++axis)
            if (rng.bernoulli(0.5))
                res.spec.flip_axes.push_back(axis);
        for (int axis : res.spec.flip_axes)
            res.volume = flip(res.volume, axis);
    }
    return res;
}

} // namespace mriq
