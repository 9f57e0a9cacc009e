#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace wlc {

// Splittable counter-based generator. Every draw is a stateless hash of
// (key, counter), so a stream can be split into independent substreams by
// deriving a new key; substreams never share counters with the parent.
// Each (sample index, layer) pair in the Monte Carlo loops owns its own
// substream, which makes results reproducible under any parallel schedule.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : key_(mix64(seed ^ 0xd1b54a32d192ed03ULL)) {}

    RngStream substream(std::uint64_t id) const { return RngStream(hash2(key_, id), 0); }

    std::uint64_t next_u64() { return hash2(key_, counter_++); }

    // Uniform on (0,1); the half-ulp offset keeps log() finite.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double next_gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    std::uint64_t key() const { return key_; }

  private:
    RngStream(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t hash2(std::uint64_t a, std::uint64_t b) {
        std::uint64_t h = mix64(a + 0x9e3779b97f4a7c15ULL);
        h = mix64(h ^ (b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
        return h;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace wlc
