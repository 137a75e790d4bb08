#pragma once

#include <cstdint>

namespace ubayes {

/// SplitMix64 step; used both as a generator for seeding and as a mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * xoshiro256** generator.  Small state, fully portable output, cheap to
 * construct per substream; the uniform draw uses the top 53 bits so results
 * are identical across platforms.
 */
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

/**
 * Deterministic substream seed for a (stream, replication) pair.  Streams
 * seeded this way are independent of execution order, so parallel runs
 * reproduce serial ones bit for bit.
 */
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t rep) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= stream * 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= rep * 0xd1342543de82ef95ULL;
    h ^= splitmix64(s);
    return h;
}

}  // namespace ubayes
