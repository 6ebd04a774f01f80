#include "mriq/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mriq/error.hpp"
#include "mriq/metrics.hpp"
#include "mriq/spectral.hpp"
#include "mriq/util.hpp"

namespace mriq {
namespace {

void require_unit_range(const Volume& v, const char* who) {
    if (v.data.empty())
        throw data_error(std::string(who) + ": empty volume");
    for (float x : v.data)
        if (!(x >= -1e-6f && x <= 1.0f + 1e-6f))
            throw data_error(std::string(who) +
                             ": volume is not normalized to [0, 1]");
}

Volume clipped01(Volume v) {
    for (auto& x : v.data)
        x = std::clamp(x, 0.0f, 1.0f);
    return v;
}

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

// Trilinear resize to explicit dims; spacing metadata kept from the source.
Volume resample_to_dims(const Volume& v, const std::array<int, 3>& nd) {
    if (nd == v.dims)
        return v;
    Volume out(nd, 0.0f, v.spacing);
    out.source_type = v.source_type;
    const double rx = static_cast<double>(v.dims[0]) / nd[0];
    const double ry = static_cast<double>(v.dims[1]) / nd[1];
    const double rz = static_cast<double>(v.dims[2]) / nd[2];
    for (int z = 0; z < nd[2]; ++z)
        for (int y = 0; y < nd[1]; ++y)
            for (int x = 0; x < nd[0]; ++x)
                out.at(x, y, z) =
                    static_cast<float>(sample_trilinear(v, x * rx, y * ry, z * rz));
    return out;
}

Volume gaussian_smooth(const Volume& v, int kernel, double sigma) {
    const int r = kernel / 2;
    std::vector<double> w(static_cast<std::size_t>(kernel));
    double sum = 0.0;
    for (int i = 0; i < kernel; ++i) {
        const double d = i - r;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (auto& x : w)
        x /= sum;

    Volume cur = v;
    for (int axis = 0; axis < 3; ++axis) {
        Volume next(cur.dims, 0.0f, cur.spacing);
        next.source_type = cur.source_type;
        const int n = cur.dims[axis];
        for (int z = 0; z < cur.dims[2]; ++z)
            for (int y = 0; y < cur.dims[1]; ++y)
                for (int x = 0; x < cur.dims[0]; ++x) {
                    const int pos = (axis == 0) ? x : (axis == 1 ? y : z);
                    // zero padding: taps outside the grid contribute nothing
                    const int t_lo = std::max(0, r - pos);
                    const int t_hi = std::min(kernel, n + r - pos);
                    double acc = 0.0;
                    for (int t = t_lo; t < t_hi; ++t) {
                        const int xx = x + (axis == 0 ? t - r : 0);
                        const int yy = y + (axis == 1 ? t - r : 0);
                        const int zz = z + (axis == 2 ? t - r : 0);
                        acc += w[static_cast<std::size_t>(t)] * cur.at(xx, yy, zz);
                    }
                    next.at(x, y, z) = static_cast<float>(acc);
                }
        cur = std::move(next);
    }
    return cur;
}

} // namespace

const char* to_string(DistortionKind k) {
    switch (k) {
    case DistortionKind::Contrast: return "contrast";
    case DistortionKind::Bias:     return "bias";
    case DistortionKind::Ring:     return "ring";
    case DistortionKind::Ghost:    return "ghost";
    case DistortionKind::Noise:    return "noise";
    case DistortionKind::Blur:     return "blur";
    }
    return "?";
}

std::optional<DistortionKind> distortion_from_string(std::string_view s) {
    for (DistortionKind k : all_distortion_kinds)
        if (s == to_string(k))
            return k;
    return std::nullopt;
}

DistortionResult apply_contrast(const Volume& v, double gamma) {
    if (!(gamma >= 0.5 && gamma <= 2.0))
        throw std::invalid_argument("apply_contrast: gamma must be in [0.5, 2]");
    require_unit_range(v, "apply_contrast");

    Volume out = v;
    for (auto& x : out.data) {
        const double xi = std::clamp(static_cast<double>(x), 0.0, 1.0);
        x = static_cast<float>(std::pow(xi, gamma));
    }
    const double s_in = stats(v).std_dev;
    const double s_out = stats(out).std_dev;
    double score = 1.0;
    if (s_in > 0.0 && s_out > 0.0)
        score = (gamma <= 1.0) ? s_out / s_in : s_in / s_out;
    return {std::move(out),
            {DistortionKind::Contrast, ContrastParams{gamma}, clip01(score)}};
}

DistortionResult apply_bias_field(const Volume& v, const std::array<double, 3>& center) {
    for (double c : center)
        if (!(c >= 1.0 && c <= 224.0))
            throw std::invalid_argument(
                "apply_bias_field: center components must be in [1, 224]");
    require_unit_range(v, "apply_bias_field");

    // Canonical 1..224 center mapped onto the actual grid.
    std::array<double, 3> c_eff{};
    for (int a = 0; a < 3; ++a)
        c_eff[a] = 1.0 + (center[a] - 1.0) * (v.dims[a] - 1.0) / 223.0;

    Volume out = v;
    double max_val = 0.0;
    for (int z = 0; z < v.dims[2]; ++z)
        for (int y = 0; y < v.dims[1]; ++y)
            for (int x = 0; x < v.dims[0]; ++x) {
                const double gx = (x + 1 - c_eff[0]) / v.dims[0];
                const double gy = (y + 1 - c_eff[1]) / v.dims[1];
                const double gz = (z + 1 - c_eff[2]) / v.dims[2];
                const double g = gx * gx + gy * gy + gz * gz;
                const double val = v.at(x, y, z) * g;
                out.at(x, y, z) = static_cast<float>(val);
                max_val = std::max(max_val, val);
            }
    if (max_val > 0.0) {
        const float inv = static_cast<float>(1.0 / max_val);
        for (auto& x : out.data)
            x *= inv;
    }
    out = clipped01(std::move(out));
    const double score = cvr(v, out);
    return {std::move(out), {DistortionKind::Bias, BiasParams{center}, score}};
}

DistortionResult apply_gibbs_ringing(const Volume& v, int cutoff) {
    if (cutoff < 32 || cutoff > 224)
        throw std::invalid_argument("apply_gibbs_ringing: cutoff must be in [32, 224]");
    require_unit_range(v, "apply_gibbs_ringing");

    KSpace k = fft3_centered(v);
    // Keep the centered cube of side f_c; the window scales with dims so the
    // full-band setting stays an identity on any grid.
    std::array<double, 3> half{};
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
        half[a] = cutoff * v.dims[a] / 448.0;
        c[a] = v.dims[a] / 2;
    }
    for (int z = 0; z < k.dims[2]; ++z)
        for (int y = 0; y < k.dims[1]; ++y)
            for (int x = 0; x < k.dims[0]; ++x)
                if (std::abs(x - c[0]) > half[0] || std::abs(y - c[1]) > half[1] ||
                    std::abs(z - c[2]) > half[2])
                    k.at(x, y, z) = {0.0, 0.0};

    Volume out = clipped01(ifft3_centered(k));
    out.spacing = v.spacing;
    out.source_type = v.source_type;
    const double score = cutoff / 224.0;
    return {std::move(out), {DistortionKind::Ring, RingParams{cutoff}, score}};
}

DistortionResult apply_motion_ghosting(const Volume& v, double alpha, int axis) {
    if (!(alpha >= 0.35 && alpha <= 1.0))
        throw std::invalid_argument("apply_motion_ghosting: alpha must be in [0.35, 1]");
    if (axis < 0 || axis > 2)
        throw std::invalid_argument("apply_motion_ghosting: axis must be 0, 1 or 2");
    require_unit_range(v, "apply_motion_ghosting");

    KSpace k = fft3_centered(v);
    // Every odd-indexed plane in centered indexing. The DC plane index
    // floor(dim/2) is even whenever dim % 4 == 0 (all production sizes), so
    // the mean is kept there.
    for (int z = 0; z < k.dims[2]; ++z)
        for (int y = 0; y < k.dims[1]; ++y)
            for (int x = 0; x < k.dims[0]; ++x) {
                const int idx = (axis == 0) ? x : (axis == 1 ? y : z);
                if (idx & 1)
                    k.at(x, y, z) *= alpha;
            }

    Volume out = clipped01(ifft3_centered(k));
    out.spacing = v.spacing;
    out.source_type = v.source_type;
    return {std::move(out), {DistortionKind::Ghost, GhostParams{alpha, axis}, alpha}};
}

namespace {

DistortionResult rician_with_seed(const Volume& v, const NoiseParams& params) {
    if (params.variance != 0.0 &&
        !(params.variance >= 1e-6 && params.variance <= 1e-2))
        throw std::invalid_argument(
            "apply_rician_noise: variance must be 0 or in [1e-6, 1e-2]");
    require_unit_range(v, "apply_rician_noise");

    Rng noise_rng(params.seed);
    Volume out = v;
    if (params.variance > 0.0) {
        const double sd = std::sqrt(params.variance);
        for (auto& x : out.data) {
            const double re = x + noise_rng.gaussian(0.0, sd);
            const double im = noise_rng.gaussian(0.0, sd);
            x = static_cast<float>(std::clamp(std::sqrt(re * re + im * im), 0.0, 1.0));
        }
    }
    const double score = clip01(psnr(v, out).score);
    return {std::move(out), {DistortionKind::Noise, params, score}};
}

} // namespace

DistortionResult apply_rician_noise(const Volume& v, double variance, Rng& rng) {
    return rician_with_seed(v, NoiseParams{variance, rng.next_u64()});
}

DistortionResult apply_blur(const Volume& v, const BlurParams& params) {
    if (params.mode == BlurMode::Resample) {
        if (!(params.scale >= 0.2 && params.scale <= 2.0))
            throw std::invalid_argument("apply_blur: scale must be in [0.2, 2]");
    } else {
        if (params.kernel < 3 || params.kernel > 11 || params.kernel % 2 == 0)
            throw std::invalid_argument("apply_blur: kernel size must be odd in [3, 11]");
        if (!(params.sigma >= 0.25 && params.sigma <= 5.0))
            throw std::invalid_argument("apply_blur: sigma must be in [0.25, 5]");
    }
    require_unit_range(v, "apply_blur");

    Volume out;
    if (params.mode == BlurMode::Resample) {
        std::array<int, 3> nd{};
        for (int a = 0; a < 3; ++a)
            nd[a] = std::max(1, static_cast<int>(std::llround(v.dims[a] * params.scale)));
        out = resample_to_dims(resample_to_dims(v, nd), v.dims);
    } else {
        out = gaussian_smooth(v, params.kernel, params.sigma);
    }
    out = clipped01(std::move(out));

    const std::int64_t c_in = high_freq_count(fft3_centered(v), 1e-3);
    const std::int64_t c_out = high_freq_count(fft3_centered(out), 1e-3);
    double score = 1.0;
    if (c_in > 0)
        score = std::min(1.0, static_cast<double>(c_out) / static_cast<double>(c_in));
    return {std::move(out), {DistortionKind::Blur, params, score}};
}

DistortionParams sample_params(DistortionKind kind, Rng& rng) {
    switch (kind) {
    case DistortionKind::Contrast:
        return ContrastParams{quantize6(rng.uniform(0.5, 2.0))};
    case DistortionKind::Bias: {
        BiasParams p;
        for (auto& c : p.center)
            c = quantize6(rng.uniform(1.0, 224.0));
        return p;
    }
    case DistortionKind::Ring:
        return RingParams{rng.uniform_int(32, 224)};
    case DistortionKind::Ghost:
        return GhostParams{quantize6(rng.uniform(0.35, 1.0)), rng.uniform_int(0, 2)};
    case DistortionKind::Noise:
        return NoiseParams{std::max(1e-6, quantize6(rng.uniform(1e-6, 1e-2))),
                           rng.next_u64()};
    case DistortionKind::Blur: {
        BlurParams p;
        p.mode = rng.uniform_int(0, 1) == 0 ? BlurMode::Resample : BlurMode::Gaussian;
        if (p.mode == BlurMode::Resample) {
            p.scale = quantize6(rng.uniform(0.2, 2.0));
        } else {
            p.kernel = 3 + 2 * rng.uniform_int(0, 4); // odd in [3, 11]
            p.sigma = quantize6(rng.uniform(0.25, 5.0));
        }
        return p;
    }
    }
    throw std::invalid_argument("sample_params: unknown distortion kind");
}

DistortionResult apply_distortion(const Volume& v, DistortionKind kind,
                                  const DistortionParams& params) {
    switch (kind) {
    case DistortionKind::Contrast:
        return apply_contrast(v, std::get<ContrastParams>(params).gamma);
    case DistortionKind::Bias:
        return apply_bias_field(v, std::get<BiasParams>(params).center);
    case DistortionKind::Ring:
        return apply_gibbs_ringing(v, std::get<RingParams>(params).cutoff);
    case DistortionKind::Ghost: {
        const auto& p = std::get<GhostParams>(params);
        return apply_motion_ghosting(v, p.alpha, p.axis);
    }
    case DistortionKind::Noise:
        return rician_with_seed(v, std::get<NoiseParams>(params));
    case DistortionKind::Blur:
        return apply_blur(v, std::get<BlurParams>(params));
    }
    throw std::invalid_argument("apply_distortion: unknown distortion kind");
}

} // namespace mriq
