#include "mriq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "mriq/error.hpp"
#include "mriq/spectral.hpp"

namespace mriq {
namespace {

void require_same_dims(const Volume& a, const Volume& b, const char* who) {
    if (a.dims != b.dims)
        throw data_error(std::string(who) + ": volume dimensions differ");
}

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

} // namespace

double& QualityVector::operator[](int i) {
    switch (i) {
    case 0: return contrast;
    case 1: return bias;
    case 2: return ring;
    case 3: return ghost;
    case 4: return noise;
    case 5: return blur;
    }
    throw std::out_of_range("QualityVector index");
}

double QualityVector::operator[](int i) const {
    return const_cast<QualityVector&>(*this)[i];
}

const char* QualityVector::component_name(int i) {
    static const char* names[] = {"contrast", "bias", "ring", "ghost", "noise", "blur"};
    if (i < 0 || i >= count)
        throw std::out_of_range("QualityVector index");
    return names[i];
}

double contrast_sdr(const Volume& ref, const Volume& img,
                    std::optional<double> gamma_hint) {
    require_same_dims(ref, img, "contrast_sdr");
    const double s_ref = stats(ref).std_dev;
    const double s_img = stats(img).std_dev;
    if (s_ref == 0.0)
        return 1.0;
    double ratio = s_img / s_ref;
    const bool invert = gamma_hint ? (*gamma_hint > 1.0) : (ratio > 1.0);
    if (invert)
        ratio = (s_img == 0.0) ? 1.0 : s_ref / s_img;
    return clip01(ratio);
}

double cvr(const Volume& ref, const Volume& img) {
    require_same_dims(ref, img, "cvr");
    const VolumeStats a = stats(ref);
    const VolumeStats b = stats(img);
    if (b.std_dev == 0.0 || a.mean == 0.0)
        return 1.0;
    return clip01((a.std_dev * b.mean) / (b.std_dev * a.mean));
}

PsnrResult psnr(const Volume& ref, const Volume& img) {
    require_same_dims(ref, img, "psnr");
    double se = 0.0;
    for (std::size_t i = 0; i < ref.data.size(); ++i) {
        const double d = static_cast<double>(ref.data[i]) - img.data[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(ref.data.size());
    if (mse == 0.0)
        return {std::numeric_limits<double>::infinity(), 1.0};
    const double db = 10.0 * std::log10(1.0 / mse);
    return {db, clip01(db / 100.0)};
}

double hf_ratio(const KSpace& f_ref, const KSpace& f_img) {
    if (f_ref.dims != f_img.dims)
        throw data_error("hf_ratio: volume dimensions differ");
    const std::int64_t c_ref = high_freq_count(f_ref, 1e-3);
    const std::int64_t c_img = high_freq_count(f_img, 1e-3);
    if (c_ref == 0) {
        if (c_img == 0)
            return 1.0; // identical all-zero pair
        throw data_error("hf_ratio: reference volume has an empty spectrum");
    }
    return std::min(1.0, static_cast<double>(c_img) / static_cast<double>(c_ref));
}

double hf_ratio(const Volume& ref, const Volume& img) {
    require_same_dims(ref, img, "hf_ratio");
    return hf_ratio(fft3_centered(ref), fft3_centered(img));
}

double ghost_modulation(const KSpace& f_ref, const KSpace& f_img) {
    if (f_ref.dims != f_img.dims)
        throw data_error("ghost_modulation: volume dimensions differ");
    // The significance floor must sit above float32 storage noise
    // (~sqrt(N) * 1e-7 of the max), or near-empty bins turn the min into
    // a noise ratio.
    const double floor_mag = 1e-5 * f_ref.max_magnitude();
    if (floor_mag == 0.0)
        return 1.0;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f_ref.data.size(); ++i) {
        const double mr = std::abs(f_ref.data[i]);
        if (mr > floor_mag)
            lo = std::min(lo, std::abs(f_img.data[i]) / mr);
    }
    if (!std::isfinite(lo))
        return 1.0;
    return clip01(lo);
}

double ghost_modulation(const Volume& ref, const Volume& img) {
    require_same_dims(ref, img, "ghost_modulation");
    return ghost_modulation(fft3_centered(ref), fft3_centered(img));
}

namespace {

// Largest |index - center| along `axis` whose plane carries energy above
// 1e-9 of the spectrum's max magnitude.
int support_half_width(const KSpace& k, int axis, double max_mag) {
    const int n = k.dims[axis];
    const int c = n / 2;
    const double thr = 1e-6 * max_mag; // above float32 storage noise
    const double thr_sq = thr * thr;
    int best = 0;
    for (int z = 0; z < k.dims[2]; ++z)
        for (int y = 0; y < k.dims[1]; ++y)
            for (int x = 0; x < k.dims[0]; ++x) {
                if (std::norm(k.at(x, y, z)) <= thr_sq)
                    continue;
                const int idx = (axis == 0) ? x : (axis == 1 ? y : z);
                best = std::max(best, std::abs(idx - c));
            }
    return best;
}

} // namespace

double ring_truncation(const KSpace& f_ref, const KSpace& f_img) {
    if (f_ref.dims != f_img.dims)
        throw data_error("ring_truncation: volume dimensions differ");
    const double m_ref = f_ref.max_magnitude();
    const double m_img = f_img.max_magnitude();
    if (m_ref == 0.0 || m_img == 0.0)
        return 1.0;
    double worst = 1.0;
    for (int axis = 0; axis < 3; ++axis) {
        const int h_ref = support_half_width(f_ref, axis, m_ref);
        if (h_ref == 0)
            continue; // constant along this axis; no truncation information
        const int h_img = support_half_width(f_img, axis, m_img);
        worst = std::min(worst, static_cast<double>(h_img) / h_ref);
    }
    return clip01(worst);
}

double ring_truncation(const Volume& ref, const Volume& img) {
    require_same_dims(ref, img, "ring_truncation");
    return ring_truncation(fft3_centered(ref), fft3_centered(img));
}

namespace {

constexpr int SsimWindow = 11;
constexpr double SsimSigma = 1.5;
constexpr double SsimC1 = 0.01 * 0.01; // (K1 L)^2, L = 1
constexpr double SsimC2 = 0.03 * 0.03;

std::array<double, SsimWindow> ssim_kernel() {
    std::array<double, SsimWindow> w{};
    const int r = SsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < SsimWindow; ++i) {
        const double d = i - r;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * SsimSigma * SsimSigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (auto& x : w)
        x /= sum;
    return w;
}

// Valid-mode convolution along one axis; the convolved axis shrinks by
// SsimWindow - 1.
void conv_valid_axis(std::vector<double>& field, std::array<int, 3>& dims, int axis,
                     const std::array<double, SsimWindow>& w) {
    std::array<int, 3> nd = dims;
    nd[axis] = dims[axis] - (SsimWindow - 1);
    std::vector<double> out(static_cast<std::size_t>(nd[0]) * nd[1] * nd[2]);
    auto src = [&](int x, int y, int z) {
        return field[static_cast<std::size_t>(x) +
                     static_cast<std::size_t>(dims[0]) *
                         (static_cast<std::size_t>(y) +
                          static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z))];
    };
    std::size_t o = 0;
    for (int z = 0; z < nd[2]; ++z)
        for (int y = 0; y < nd[1]; ++y)
            for (int x = 0; x < nd[0]; ++x, ++o) {
                double acc = 0.0;
                for (int t = 0; t < SsimWindow; ++t) {
                    const int xx = x + (axis == 0 ? t : 0);
                    const int yy = y + (axis == 1 ? t : 0);
                    const int zz = z + (axis == 2 ? t : 0);
                    acc += w[static_cast<std::size_t>(t)] * src(xx, yy, zz);
                }
                out[o] = acc;
            }
    field = std::move(out);
    dims = nd;
}

std::vector<double> blur_field(std::vector<double> field, std::array<int, 3> dims,
                               const std::array<double, SsimWindow>& w,
                               std::array<int, 3>& out_dims) {
    for (int axis = 0; axis < 3; ++axis)
        conv_valid_axis(field, dims, axis, w);
    out_dims = dims;
    return field;
}

} // namespace

double ssim3d(const Volume& ref, const Volume& img) {
    require_same_dims(ref, img, "ssim3d");
    for (int a = 0; a < 3; ++a)
        if (ref.dims[a] < SsimWindow)
            throw data_error("ssim3d: dims must be >= 11 per axis");

    const std::size_t n = ref.data.size();
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = ref.data[i];
        const double b = img.data[i];
        x[i] = a;
        y[i] = b;
        xx[i] = a * a;
        yy[i] = b * b;
        xy[i] = a * b;
    }

    const auto w = ssim_kernel();
    std::array<int, 3> vd{};
    const auto mu_x = blur_field(std::move(x), ref.dims, w, vd);
    const auto mu_y = blur_field(std::move(y), ref.dims, w, vd);
    const auto s_xx = blur_field(std::move(xx), ref.dims, w, vd);
    const auto s_yy = blur_field(std::move(yy), ref.dims, w, vd);
    const auto s_xy = blur_field(std::move(xy), ref.dims, w, vd);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x[i], my = mu_y[i];
        const double var_x = s_xx[i] - mx * mx;
        const double var_y = s_yy[i] - my * my;
        const double cov = s_xy[i] - mx * my;
        total += ((2.0 * mx * my + SsimC1) * (2.0 * cov + SsimC2)) /
                 ((mx * mx + my * my + SsimC1) * (var_x + var_y + SsimC2));
    }
    return total / static_cast<double>(mu_x.size());
}

double focal_mse(const QualityVector& y, const QualityVector& t, const LossParams& p) {
    double sum = 0.0;
    for (int i = 0; i < QualityVector::count; ++i) {
        const double d = y[i] - t[i];
        sum += (1.0 + p.alpha * std::pow(std::abs(d), p.gamma_exp)) * d * d;
    }
    return sum / static_cast<double>(p.m);
}

double aggregate_quality(const QualityVector& q) {
    double sum = 0.0;
    for (int i = 0; i < QualityVector::count; ++i)
        sum += q[i];
    return sum / QualityVector::count;
}

QualityVector flip_average(const QualityVector& a, const QualityVector& b) {
    QualityVector out;
    for (int i = 0; i < QualityVector::count; ++i)
        out[i] = 0.5 * (a[i] + b[i]);
    return out;
}

std::string quality_to_json(const QualityVector& q) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "{\"contrast\":%.6f,\"bias\":%.6f,\"ring\":%.6f,\"ghost\":%.6f,"
                  "\"noise\":%.6f,\"blur\":%.6f,\"aggregate\":%.6f}",
                  q.contrast, q.bias, q.ring, q.ghost, q.noise, q.blur,
                  aggregate_quality(q));
    return buf;
}

} // namespace mriq
