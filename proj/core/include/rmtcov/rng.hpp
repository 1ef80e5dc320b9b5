#pragma once

#include <cstdint>

namespace rmtcov {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic, platform-independent seed derivation for replication
// streams: hash of (master seed, N, replication index).
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0xd1b54a32d192ed03ULL;
    h ^= splitmix64(s);
    return h;
}

// xoshiro256++ with a hand-rolled Box-Muller: identical streams on every
// platform, unlike the standard library distributions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        for (auto& word : state_) word = splitmix64(seed);
        has_cached_ = false;
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) {
            return (x << k) | (x >> (64 - k));
        };
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

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_gaussian();

    double next_rademacher() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

    // uniform on [-half_width, half_width]
    double next_uniform_sym(double half_width) {
        return half_width * (2.0 * next_double() - 1.0);
    }

  private:
    std::uint64_t state_[4];
    bool has_cached_;
    double cached_ = 0.0;
};

}  // namespace rmtcov
