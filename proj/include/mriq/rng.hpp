#ifndef MRIQ_RNG_HPP
#define MRIQ_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace mriq {

// 64-bit avalanche mix (splitmix64 finalizer). Used on its own for seed
// derivation and inside Rng seeding.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Schedule-independent per-item seed: mixing base and index through the
// avalanche gives unrelated streams for neighboring indices.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ splitmix64(index + 0x9E3779B97F4A7C15ULL));
}

// Self-contained generator (xoshiro256++). The standard <random> engines are
// portable but the distributions are not; everything downstream needs
// bit-identical draws across builds, so both live here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            s = splitmix64(s);
            w = s;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive bounds.
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * Pi * u2;
        spare_ = mag * std::sin(ang);
        has_spare_ = true;
        return mag * std::cos(ang);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

private:
    static constexpr double Pi = 3.14159265358979323846;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mriq

#endif
