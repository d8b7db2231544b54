#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace mwsn {

/// Name of the generator behind RandomStream, echoed into run metadata.
inline constexpr std::string_view kRngName = "xoshiro256** (splitmix64 seeding, fnv1a64 labels)";

std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seeded xoshiro256** stream identified by (seed, label). Two streams with
/// the same pair yield the same sequence on every platform.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string label);

  std::uint64_t next_u64() noexcept;
  /// 53-bit uniform in [0, 1).
  double next_unit() noexcept;

  /// Uniform in [lo, hi). Throws Error(InvalidArgument) unless lo < hi.
  double uniform(double lo, double hi);
  /// Box-Muller, one normal per call (no cached second value). sigma == 0
  /// returns mean exactly without consuming draws.
  double gaussian(double mean, double sigma);

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace mwsn
