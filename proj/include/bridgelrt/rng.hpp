#pragma once

// Self-contained RNG so that seeded runs are bit-identical across platforms
// (std::normal_distribution is implementation-defined). xoshiro256++ with
// splitmix64 seeding; substreams are derived from (seed, stream index) so
// parallel ensembles do not need coordination.

#include <array>
#include <cmath>
#include <cstdint>

namespace bridgelrt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    // Independent substream for (seed, stream). Period 2^256-1 per stream;
    // distinct streams get decorrelated states via splitmix64.
    Rng(std::uint64_t seed, std::uint64_t stream) {
        reseed(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on (0,1); never exactly 0, safe under log()
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal, Box-Muller with pair caching
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
        have_spare_ = false;
    }

    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace bridgelrt
