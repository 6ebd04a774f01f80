#ifndef MRIQ_METRICS_HPP
#define MRIQ_METRICS_HPP

#include <optional>
#include <string>

#include "mriq/spectral.hpp"
#include "mriq/volume.hpp"

namespace mriq {

// Six per-artifact quality scores in [0, 1], canonical order
// contrast, bias, ring, ghost, noise, blur. Index 0..5 follows that order.
struct QualityVector {
    double contrast = 1.0;
    double bias = 1.0;
    double ring = 1.0;
    double ghost = 1.0;
    double noise = 1.0;
    double blur = 1.0;

    static constexpr int count = 6;

    bool operator==(const QualityVector&) const = default;

    double& operator[](int i);
    double operator[](int i) const;
    static const char* component_name(int i);
};

struct LossParams {
    double alpha = 2.0;     // focal weight
    double gamma_exp = 1.0; // focal exponent
    int m = 6;              // number of outputs
};

// Standard deviation ratio between img and ref, inverted when the gamma
// hint exceeds 1 (or, without a hint, when the raw ratio exceeds 1).
// Clipped to [0, 1]; a zero-std reference scores 1.
double contrast_sdr(const Volume& ref, const Volume& img,
                    std::optional<double> gamma_hint = std::nullopt);

// Coefficient of variation ratio (sigma_ref * mu_img) / (sigma_img * mu_ref),
// clipped to [0, 1]; degenerate denominators score 1.
double cvr(const Volume& ref, const Volume& img);

struct PsnrResult {
    double db = 0.0;    // +inf when MSE == 0
    double score = 1.0; // min(db / 100, 1)
};

// PSNR = 10 log10(1 / MSE) for unit-range data.
PsnrResult psnr(const Volume& ref, const Volume& img);

// Ratio of high-frequency bin counts (threshold: one-thousandth of each
// spectrum's own max magnitude), capped at 1.
double hf_ratio(const Volume& ref, const Volume& img);
double hf_ratio(const KSpace& f_ref, const KSpace& f_img);

// Minimum per-bin spectral magnitude ratio |F_img| / |F_ref| over bins
// whose reference magnitude exceeds 1e-5 of the max (a floor safely above
// float32 storage noise); recovers the ghosting modulation factor.
// Clipped to [0, 1].
double ghost_modulation(const Volume& ref, const Volume& img);
double ghost_modulation(const KSpace& f_ref, const KSpace& f_img);

// Relative k-space support width of img vs ref (min over axes), measured as
// the largest centered plane offset carrying significant energy. Recovers
// f_c / dim for band-truncated volumes; 1 for full-band pairs.
double ring_truncation(const Volume& ref, const Volume& img);
double ring_truncation(const KSpace& f_ref, const KSpace& f_img);

// Mean local SSIM over valid window positions: 3D Gaussian window sigma 1.5,
// size 11, L = 1, K1 = 0.01, K2 = 0.03. Needs dims >= 11 per axis.
double ssim3d(const Volume& ref, const Volume& img);

// (1/M) sum_m (1 + alpha |y_m - t_m|^gamma) (y_m - t_m)^2
double focal_mse(const QualityVector& y, const QualityVector& t,
                 const LossParams& p = LossParams{});

// Unweighted mean of the six components.
double aggregate_quality(const QualityVector& q);

// Componentwise mean (inference-time original/flipped averaging).
QualityVector flip_average(const QualityVector& a, const QualityVector& b);

// {contrast, ..., blur, aggregate} with 6-decimal fixed formatting.
std::string quality_to_json(const QualityVector& q);

} // namespace mriq

#endif
