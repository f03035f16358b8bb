#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace matsketch {

/// Seeded generator with explicit draw algorithms (Box-Muller normals,
/// rejection-sampled bounded integers) so sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound), bound > 0, via rejection (unbiased).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % bound;
    }

    /// Standard normal via Box-Muller with a cached spare.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace matsketch
