#pragma once

#include <array>
#include <cstdint>

namespace envc {

// splitmix64 step (Steele/Lea/Flood); used for seeding and stream keying.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** (Blackman & Vigna, public domain reference implementation).
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0, 1); safe as input to inverse CDFs.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> s_{};
};

// Independent stream for one row of a sample set. Row i's draws depend only on
// (seed, i), so sampling is reproducible bit-for-bit under any parallel schedule.
inline Xoshiro256 row_rng(std::uint64_t seed, std::uint64_t row) {
    std::uint64_t key = seed ^ (row * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    return Xoshiro256(key);
}

}  // namespace envc
