#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

namespace heavytail {

/// Seeded RNG wrapper producing uniforms on the open interval (0,1).
///
/// Uniforms are derived from the raw 64-bit output directly rather than
/// through std::uniform_real_distribution, whose mapping is
/// implementation-defined; reports promise bit-reproducible results for a
/// fixed seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in (0,1): 53-bit mantissa offset by half a step, so neither
    /// endpoint is reachable and quantile(u) stays well-defined.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Box-Muller pair of independent standard normals (two uniforms in,
    /// two normals out; fixed consumption keeps row layouts reproducible).
    std::pair<double, double> normal_pair() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

  private:
    std::mt19937_64 engine_;
};

/// Derived seed for stream `index`: base seed XOR stream index. mt19937_64's
/// seeding already scrambles nearby values.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) {
    return base ^ index;
}

/// Rows per independently-seeded sampling block. Fixed so that results do
/// not depend on how many workers consume the blocks.
inline constexpr std::size_t kSampleBlockRows = std::size_t{1} << 16;

}  // namespace heavytail
