#pragma once

#include <cmath>
#include <cstdint>

namespace wiredelay {

/// Counter-style pseudorandom stream: the state is derived purely from
/// (master_seed, stream_id), so every stream is reproducible regardless of
/// scheduling or worker count. Generator: SplitMix64 with the Stafford mix13
/// finalizer; normals by Box-Muller with a fixed uniform consumption pattern
/// (two uniforms per pair, no rejection).
class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : master_seed_(master_seed),
          stream_id_(stream_id),
          state_(mix(master_seed * kGolden ^ mix(stream_id + kLeap))) {}

    [[nodiscard]] std::uint64_t master_seed() const { return master_seed_; }
    [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate (Box-Muller; second member of each pair cached).
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // u1 in (0,1] so log(u1) is finite.
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

  private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kLeap = 0xD1B54A32D192ED03ull;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t master_seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace wiredelay
