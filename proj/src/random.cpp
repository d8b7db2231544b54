#include "mwsn/random.hpp"

#include <cmath>
#include <numbers>

#include "mwsn/error.hpp"

namespace mwsn {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::string label) : seed_(seed), label_(std::move(label)) {
  std::uint64_t sm = seed ^ rotl(fnv1a64(label_), 17);
  for (auto& word : s_) word = splitmix64(sm);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RandomStream::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::next_unit() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "uniform draw requires lo < hi");
  double v = lo + next_unit() * (hi - lo);
  // rounding can land exactly on hi when the interval is tiny
  if (v >= hi) v = std::nextafter(hi, lo);
  if (v < lo) v = lo;
  return v;
}

double RandomStream::gaussian(double mean, double sigma) {
  if (sigma < 0.0 || std::isnan(sigma)) throw Error(ErrorCode::InvalidArgument, "gaussian sigma must be >= 0");
  if (sigma == 0.0) return mean;
  const double u1 = 1.0 - next_unit();  // (0, 1]
  const double u2 = next_unit();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + sigma * z;
}

}  // namespace mwsn
