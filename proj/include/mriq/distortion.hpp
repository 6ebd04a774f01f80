#ifndef MRIQ_DISTORTION_HPP
#define MRIQ_DISTORTION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>

#include "mriq/rng.hpp"
#include "mriq/volume.hpp"

namespace mriq {

// Canonical artifact order; indexes QualityVector components.
enum class DistortionKind : int { Contrast = 0, Bias, Ring, Ghost, Noise, Blur };

constexpr std::array<DistortionKind, 6> all_distortion_kinds = {
    DistortionKind::Contrast, DistortionKind::Bias,  DistortionKind::Ring,
    DistortionKind::Ghost,    DistortionKind::Noise, DistortionKind::Blur};

const char* to_string(DistortionKind k);
std::optional<DistortionKind> distortion_from_string(std::string_view s);

struct ContrastParams {
    double gamma = 1.0; // [0.5, 2]

    bool operator==(const ContrastParams&) const = default;
};

struct BiasParams {
    // Ellipse center in the canonical 1..224 grid; mapped affinely onto the
    // actual grid when dims differ from 224.
    std::array<double, 3> center{112.0, 112.0, 112.0};

    bool operator==(const BiasParams&) const = default;
};

struct RingParams {
    int cutoff = 224; // f_c in [32, 224]

    bool operator==(const RingParams&) const = default;
};

struct GhostParams {
    double alpha = 1.0; // [0.35, 1]
    int axis = 0;       // {0, 1, 2}

    bool operator==(const GhostParams&) const = default;
};

struct NoiseParams {
    double variance = 0.0; // 0 (identity) or [1e-6, 1e-2]
    std::uint64_t seed = 0;

    bool operator==(const NoiseParams&) const = default;
};

enum class BlurMode : int { Resample = 0, Gaussian };

struct BlurParams {
    BlurMode mode = BlurMode::Resample;
    double scale = 1.0; // Resample: [0.2, 2]
    int kernel = 3;     // Gaussian: odd in [3, 11]
    double sigma = 1.0; // Gaussian: [0.25, 5]

    bool operator==(const BlurParams&) const = default;
};

using DistortionParams = std::variant<ContrastParams, BiasParams, RingParams,
                                      GhostParams, NoiseParams, BlurParams>;

// Artifact kind, the parameters applied, and the analytic ground-truth
// quality score in [0, 1].
struct DistortionRecord {
    DistortionKind kind = DistortionKind::Contrast;
    DistortionParams params = ContrastParams{};
    double score = 1.0;
};

struct DistortionResult {
    Volume volume;
    DistortionRecord record;
};

// Gamma transform J = I^gamma. Score: sigma_J/sigma_I for gamma <= 1,
// inverted otherwise; clipped to [0, 1].
DistortionResult apply_contrast(const Volume& v, double gamma);

// Multiplies an elliptic gradient field (grid 1..dim, radius dim per axis)
// and renormalizes by the max. Score: coefficient of variation ratio.
DistortionResult apply_bias_field(const Volume& v, const std::array<double, 3>& center);

// Truncates the centered k-space to the cube of side f_c (scaled
// proportionally when dims differ from 224). Score: f_c / 224.
DistortionResult apply_gibbs_ringing(const Volume& v, int cutoff);

// Multiplies every odd-indexed centered k-space plane perpendicular to
// `axis` by alpha. Score: alpha.
DistortionResult apply_motion_ghosting(const Volume& v, double alpha, int axis);

// Magnitude reconstruction sqrt((I + n1)^2 + n2^2) with iid Gaussian n1, n2
// of the given variance. Score: min(PSNR/100, 1).
DistortionResult apply_rician_noise(const Volume& v, double variance, Rng& rng);

// Resample down/up by `scale`, or separable Gaussian smoothing. Score:
// high-frequency bin count ratio, capped at 1.
DistortionResult apply_blur(const Volume& v, const BlurParams& params);

// Uniform draw of kind-specific parameters within the sampling ranges.
// Continuous values are quantized to 6 decimals (manifest round-trip).
DistortionParams sample_params(DistortionKind kind, Rng& rng);

// Applies a fully specified parameter set (the reapplication path for
// recorded samples; noise uses NoiseParams::seed).
DistortionResult apply_distortion(const Volume& v, DistortionKind kind,
                                  const DistortionParams& params);

} // namespace mriq

#endif
