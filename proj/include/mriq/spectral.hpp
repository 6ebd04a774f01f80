#ifndef MRIQ_SPECTRAL_HPP
#define MRIQ_SPECTRAL_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "mriq/volume.hpp"

namespace mriq {

// Centered 3D spectrum of a Volume: the zero-frequency bin sits at
// floor(dim/2) per axis. Complex double throughout; 224^3 transforms
// accumulate too much error in single precision.
struct KSpace {
    std::array<int, 3> dims{0, 0, 0};
    std::vector<std::complex<double>> data;

    std::size_t size() const { return data.size(); }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }

    std::complex<double>& at(int x, int y, int z) { return data[index(x, y, z)]; }
    const std::complex<double>& at(int x, int y, int z) const {
        return data[index(x, y, z)];
    }

    double max_magnitude() const;
};

// Forward 3D DFT with the DC bin shifted to the center index per axis.
// Exact-length transforms for any dims (mixed sizes via Bluestein); no
// zero-padding to powers of two.
KSpace fft3_centered(const Volume& v);

// Inverse of fft3_centered. The imaginary residue is checked (max |imag|
// must stay below 1e-4 for spectra of real volumes) and discarded; output
// is not clipped.
Volume ifft3_centered(const KSpace& k);

// Number of bins with magnitude strictly greater than
// threshold_fraction * max |k|. An all-zero spectrum counts 0.
std::int64_t high_freq_count(const KSpace& k, double threshold_fraction);

// Exact-length 1D transform plan: iterative radix-2 for powers of two,
// Bluestein's chirp-z otherwise. Reused across every line of an axis pass.
class Fft1d {
public:
    explicit Fft1d(int n);

    int length() const { return n_; }
    void forward(std::complex<double>* line) const;
    // Includes the 1/n scale.
    void inverse(std::complex<double>* line) const;

private:
    void transform(std::complex<double>* line, bool inv) const;
    void pow2_transform(std::complex<double>* data, int n, bool inv,
                        const std::vector<std::complex<double>>& tw) const;

    int n_ = 0;
    bool is_pow2_ = false;
    std::vector<std::complex<double>> twiddle_;     // for the radix-2 path (size n/2)
    // Bluestein state: m is the power-of-two convolution length.
    int m_ = 0;
    std::vector<std::complex<double>> chirp_;       // exp(-i pi k^2 / n)
    std::vector<std::complex<double>> chirp_ft_;    // FFT_m of the forward chirp filter
    std::vector<std::complex<double>> chirp_ft_inv_;
    std::vector<std::complex<double>> tw_m_;        // twiddles for length m
};

} // namespace mriq

#endif
