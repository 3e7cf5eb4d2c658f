#pragma once

#include <cmath>
#include <cstdint>

namespace yy {

// Splittable counter-style generator: the stream is fully determined by
// (seed, trial, stream), so parallel trials never share a sequence and a
// run is reproducible from its config alone. Core mixer is splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t trial = 0, std::uint64_t stream = 0) {
        state_ = mix(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^ trial * 0xbf58476d1ce4e5b9ULL) ^
                     stream * 0x94d049bb133111ebULL);
        if (state_ == 0) state_ = 0x2545f4914f6cdd1dULL;
        have_cached_normal_ = false;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; deterministic across platforms
    double next_normal() {
        if (have_cached_normal_) {
            have_cached_normal_ = false;
            return cached_normal_;
        }
        double u1 = 0.0;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        const double u2 = next_double();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * M_PI * u2;
        cached_normal_ = rad * std::sin(ang);
        have_cached_normal_ = true;
        return rad * std::cos(ang);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

}  // namespace yy
