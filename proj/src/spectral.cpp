#include "mriq/spectral.hpp"

#include <cmath>
#include <thread>

#include "mriq/error.hpp"

namespace mriq {
namespace {

constexpr double Pi = 3.14159265358979323846;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_pow2_at_least(int n) {
    int m = 1;
    while (m < n)
        m <<= 1;
    return m;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Static block
// partition; callers only write disjoint memory, so the schedule cannot
// change the result.
template <typename Fn>
void parallel_lines(std::int64_t n, const Fn& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0)
        hw = 1;
    const std::int64_t workers =
        std::min<std::int64_t>(hw, std::max<std::int64_t>(1, n / 64));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::int64_t w = 0; w < workers; ++w) {
        const std::int64_t lo = n * w / workers;
        const std::int64_t hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i)
                fn(i);
        });
    }
    for (auto& t : pool)
        t.join();
}

std::vector<std::complex<double>> make_twiddles(int n) {
    std::vector<std::complex<double>> tw(static_cast<std::size_t>(n) / 2);
    for (int k = 0; k < n / 2; ++k) {
        const double a = -2.0 * Pi * k / n;
        tw[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
    }
    return tw;
}

} // namespace

Fft1d::Fft1d(int n) : n_(n) {
    if (n < 1)
        throw std::invalid_argument("Fft1d: length must be >= 1");
    is_pow2_ = is_power_of_two(n);
    if (is_pow2_) {
        twiddle_ = make_twiddles(n);
        return;
    }

    // Bluestein: length-n DFT as a circular convolution of size m = 2^k >= 2n-1.
    m_ = next_pow2_at_least(2 * n - 1);
    tw_m_ = make_twiddles(m_);
    chirp_.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small and exact.
        const long long q = (static_cast<long long>(k) * k) % (2LL * n);
        const double a = -Pi * static_cast<double>(q) / n;
        chirp_[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
    }
    auto build_filter = [&](bool inv) {
        std::vector<std::complex<double>> b(static_cast<std::size_t>(m_), {0.0, 0.0});
        for (int k = 0; k < n; ++k) {
            const std::complex<double> c =
                inv ? chirp_[static_cast<std::size_t>(k)]
                    : std::conj(chirp_[static_cast<std::size_t>(k)]);
            b[static_cast<std::size_t>(k)] = c;
            if (k > 0)
                b[static_cast<std::size_t>(m_ - k)] = c;
        }
        pow2_transform(b.data(), m_, false, tw_m_);
        return b;
    };
    chirp_ft_ = build_filter(false);
    chirp_ft_inv_ = build_filter(true);
}

void Fft1d::pow2_transform(std::complex<double>* data, int n, bool inv,
                           const std::vector<std::complex<double>>& tw) const {
    // Bit-reversal permutation.
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(data[i], data[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < len / 2; ++k) {
                std::complex<double> w = tw[static_cast<std::size_t>(k * step)];
                if (inv)
                    w = std::conj(w);
                const std::complex<double> u = data[i + k];
                const std::complex<double> t = data[i + k + len / 2] * w;
                data[i + k] = u + t;
                data[i + k + len / 2] = u - t;
            }
        }
    }
}

void Fft1d::transform(std::complex<double>* line, bool inv) const {
    if (n_ == 1)
        return;
    if (is_pow2_) {
        pow2_transform(line, n_, inv, twiddle_);
        return;
    }

    const auto& filter = inv ? chirp_ft_inv_ : chirp_ft_;
    std::vector<std::complex<double>> a(static_cast<std::size_t>(m_), {0.0, 0.0});
    for (int k = 0; k < n_; ++k) {
        const std::complex<double> c =
            inv ? std::conj(chirp_[static_cast<std::size_t>(k)])
                : chirp_[static_cast<std::size_t>(k)];
        a[static_cast<std::size_t>(k)] = line[k] * c;
    }
    pow2_transform(a.data(), m_, false, tw_m_);
    for (int k = 0; k < m_; ++k)
        a[static_cast<std::size_t>(k)] *= filter[static_cast<std::size_t>(k)];
    pow2_transform(a.data(), m_, true, tw_m_);
    const double inv_m = 1.0 / m_;
    for (int k = 0; k < n_; ++k) {
        const std::complex<double> c =
            inv ? std::conj(chirp_[static_cast<std::size_t>(k)])
                : chirp_[static_cast<std::size_t>(k)];
        line[k] = a[static_cast<std::size_t>(k)] * inv_m * c;
    }
}

void Fft1d::forward(std::complex<double>* line) const { transform(line, false); }

void Fft1d::inverse(std::complex<double>* line) const {
    transform(line, true);
    const double s = 1.0 / n_;
    for (int k = 0; k < n_; ++k)
        line[k] *= s;
}

namespace {

// One axis pass over a 3D complex buffer. `center_shift_out` scatters the
// transformed line so the DC bin lands at floor(n/2); `center_shift_in`
// gathers assuming the line is stored that way (for the inverse).
void axis_pass(std::vector<std::complex<double>>& buf, const std::array<int, 3>& dims,
               int axis, const Fft1d& plan, bool inverse, bool center_shift_out,
               bool center_shift_in) {
    const int n = dims[axis];
    const int c = n / 2;
    std::size_t stride = 1;
    for (int a = 0; a < axis; ++a)
        stride *= static_cast<std::size_t>(dims[a]);

    // Enumerate all lines along `axis` by the two other dims.
    const int o1 = (axis == 0) ? 1 : 0;
    const int o2 = (axis == 2) ? 1 : 2;
    const std::int64_t n_lines =
        static_cast<std::int64_t>(dims[o1]) * static_cast<std::int64_t>(dims[o2]);
    std::size_t stride1 = 1, stride2 = 1;
    for (int a = 0; a < o1; ++a)
        stride1 *= static_cast<std::size_t>(dims[a]);
    for (int a = 0; a < o2; ++a)
        stride2 *= static_cast<std::size_t>(dims[a]);

    parallel_lines(n_lines, [&](std::int64_t li) {
        std::vector<std::complex<double>> line(static_cast<std::size_t>(n));
        const std::int64_t i1 = li % dims[o1];
        const std::int64_t i2 = li / dims[o1];
        const std::size_t base = static_cast<std::size_t>(i1) * stride1 +
                                 static_cast<std::size_t>(i2) * stride2;
        for (int k = 0; k < n; ++k) {
            const int src = center_shift_in ? (k + c) % n : k;
            line[static_cast<std::size_t>(k)] =
                buf[base + static_cast<std::size_t>(src) * stride];
        }
        if (inverse)
            plan.inverse(line.data());
        else
            plan.forward(line.data());
        for (int k = 0; k < n; ++k) {
            const int dst = center_shift_out ? (k + c) % n : k;
            buf[base + static_cast<std::size_t>(dst) * stride] =
                line[static_cast<std::size_t>(k)];
        }
    });
}

} // namespace

double KSpace::max_magnitude() const {
    double best = 0.0;
    for (const auto& z : data)
        best = std::max(best, std::norm(z));
    return std::sqrt(best);
}

KSpace fft3_centered(const Volume& v) {
    KSpace k;
    k.dims = v.dims;
    k.data.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        k.data[i] = {static_cast<double>(v.data[i]), 0.0};
    for (int axis = 0; axis < 3; ++axis) {
        const Fft1d plan(v.dims[axis]);
        axis_pass(k.data, k.dims, axis, plan, false, /*shift_out=*/true,
                  /*shift_in=*/false);
    }
    return k;
}

Volume ifft3_centered(const KSpace& k) {
    std::vector<std::complex<double>> buf = k.data;
    for (int axis = 0; axis < 3; ++axis) {
        const Fft1d plan(k.dims[axis]);
        axis_pass(buf, k.dims, axis, plan, true, /*shift_out=*/false,
                  /*shift_in=*/true);
    }
    double max_imag = 0.0;
    for (const auto& z : buf)
        max_imag = std::max(max_imag, std::abs(z.imag()));
    if (max_imag >= 1e-4)
        throw data_error("ifft3_centered: spectrum is not that of a real volume "
                         "(max imaginary residue " +
                         std::to_string(max_imag) + ")");

    Volume v;
    v.dims = k.dims;
    v.data.resize(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i)
        v.data[i] = static_cast<float>(buf[i].real());
    return v;
}

std::int64_t high_freq_count(const KSpace& k, double threshold_fraction) {
    if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
        throw std::invalid_argument("high_freq_count: threshold fraction must be in (0,1)");
    const double max_mag = k.max_magnitude();
    if (max_mag == 0.0)
        return 0;
    const double thr2 = threshold_fraction * max_mag;
    const double thr_sq = thr2 * thr2;
    std::int64_t count = 0;
    for (const auto& z : k.data)
        if (std::norm(z) > thr_sq)
            ++count;
    return count;
}

} // namespace mriq
