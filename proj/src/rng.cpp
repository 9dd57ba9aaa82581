#include "stinla/rng.hpp"

#include <cmath>

namespace stinla {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3) - 1

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
  ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::array<std::uint32_t, 4> ctr = {std::uint32_t(counter), std::uint32_t(counter >> 32), std::uint32_t(stream),
                                      std::uint32_t(stream >> 32)};
  std::uint32_t k0 = std::uint32_t(seed);
  std::uint32_t k1 = std::uint32_t(seed >> 32);
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

double RngStream::uniform() {
  const auto words = philox4x32(seed_, stream_, counter_++);
  const std::uint64_t bits = (std::uint64_t(words[0]) << 32) | words[1];
  // top 53 bits, shifted into (0,1)
  return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(angle);
  has_cached_normal_ = true;
  return r * std::cos(angle);
}

long RngStream::poisson(double mean) {
  long total = 0;
  // additivity: split large means so exp(-mean) stays representable
  while (mean > 30.0) {
    const double half = mean / 2.0;
    total += poisson(half);
    mean -= half;
  }
  const double limit = std::exp(-mean);
  long k = 0;
  double prod = uniform();
  while (prod > limit) {
    ++k;
    prod *= uniform();
  }
  return total + k;
}

std::uint64_t RngStream::derive(std::uint64_t tag) const {
  const auto words = philox4x32(seed_, ~stream_, tag);
  return (std::uint64_t(words[2]) << 32) | words[3];
}

}  // namespace stinla
