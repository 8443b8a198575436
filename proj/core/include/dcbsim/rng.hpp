#pragma once

#include <cstdint>
#include <string_view>

namespace dcbsim {

// splitmix64; portable and stable, unlike <random> distributions.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    // Stream derived from a root seed and a name. Streams with distinct names
    // are independent: advancing one never perturbs another.
    RngStream(std::uint64_t root_seed, std::string_view stream_name)
        : state_(mix(root_seed ^ fnv1a(stream_name))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform integer in [lo, hi].
    std::uint64_t next_in(std::uint64_t lo, std::uint64_t hi) {
        return lo + next_u64() % (hi - lo + 1);
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 33;
        x *= 0xFF51AFD7ED558CCDULL;
        x ^= x >> 33;
        return x;
    }

    std::uint64_t state_;
};

} // namespace dcbsim
