#pragma once

#include <cstdint>
#include <limits>

namespace ssc {

/// Finalizer of the splitmix64 generator; a high-quality 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a hash of a short string literal, for readable stream tags.
constexpr std::uint64_t stream_tag(const char* s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (; *s; ++s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*s));
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based random stream (splitmix64). Independent substreams are
/// derived by key, so draws never depend on call order in unrelated code:
/// Rng(seed).derive(tag, m) always yields the same stream for the same
/// (seed, tag, m), regardless of threading or evaluation order elsewhere.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : state_(mix64(seed)) {}

    /// Independent substream keyed by `tag`.
    Rng derive(std::uint64_t tag) const {
        Rng r(0);
        r.state_ = mix64(state_ ^ mix64(tag ^ 0x632be59bd9b4e019ULL));
        return r;
    }
    Rng derive(std::uint64_t tag, std::uint64_t index) const {
        return derive(tag).derive(index ^ 0x9e6c63d0876a9a35ULL);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as argument of log().
    double uniform01_open_low() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Unbiased uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // UniformRandomBitGenerator interface.
    std::uint64_t operator()() { return next_u64(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return std::numeric_limits<std::uint64_t>::max(); }

private:
    std::uint64_t state_;
};

}  // namespace ssc
