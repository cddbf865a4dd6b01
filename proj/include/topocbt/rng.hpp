#pragma once

#include <cstdint>
#include <random>

namespace topocbt {

/// Seeded generator with portable output.
///
/// The engine is std::mt19937_64, whose constants and output sequence are
/// fixed by the C++ standard (w=64, n=312, m=156, r=31,
/// a=0xb5026f5aa96619e9, u=29, d=0x5555555555555555, s=17,
/// b=0x71d67fffeda60000, t=37, c=0xfff7eee000000000, l=43,
/// f=6364136223846793005). std:: distributions are not portable across
/// standard libraries, so bounded draws use rejection sampling on the raw
/// 64-bit output instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool chance(std::uint64_t numerator, std::uint64_t denominator) {
        return below(denominator) < numerator;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace topocbt
