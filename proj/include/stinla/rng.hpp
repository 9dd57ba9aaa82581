#pragma once

#include <array>
#include <cstdint>

namespace stinla {

// Philox4x32-10 counter-based generator (Salmon et al., Random123 family).
// Purely functional: a (seed, stream, counter) triple always yields the same
// output, so draws are reproducible regardless of threading or call order.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

// Sequential view over one stream's counter space. No global state; cheap to
// construct one per simulated quantity.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  // uniform on (0,1), 53-bit mantissa
  double uniform();
  // standard normal via Box-Muller
  double normal();
  // exact Poisson draw (Knuth product method, halving for large means)
  long poisson(double mean);

  // derive a decorrelated child seed, e.g. one per effect block
  std::uint64_t derive(std::uint64_t tag) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace stinla
