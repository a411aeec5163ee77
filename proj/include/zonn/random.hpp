#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace zonn {

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream. The i-th draw is a pure function of
/// (seed, stream_id, i), so any partition of the index range across
/// workers reproduces the serial sequence.
class SeededStream {
 public:
  constexpr SeededStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed),
        stream_id_(stream_id),
        key_(detail::mix64(seed ^ detail::mix64(stream_id + detail::golden_gamma))) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// 64 random bits at counter position `index`.
  constexpr std::uint64_t bits(std::uint64_t index) const noexcept {
    return detail::mix64(key_ + (index + 1) * detail::golden_gamma);
  }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  constexpr double uniform(std::uint64_t index) const noexcept {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw from positions (2*index, 2*index+1) via Box-Muller.
  double normal(std::uint64_t index) const noexcept {
    const double u1 = 1.0 - uniform(2 * index);  // (0, 1]
    const double u2 = uniform(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Derived independent stream, used to split one seed across purposes.
  constexpr SeededStream substream(std::uint64_t id) const noexcept {
    return SeededStream(detail::mix64(key_ ^ detail::mix64(id)), id);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
};

/// Uniform integer in [0, bound) from one draw (multiply-shift; bias < 2^-32 for bound < 2^32).
constexpr std::uint64_t uniform_below(const SeededStream& s, std::uint64_t index, std::uint64_t bound) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(s.bits(index)) * bound) >> 64);
}

}  // namespace zonn
