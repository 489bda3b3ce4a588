#pragma once

#include <cstdint>
#include <vector>

namespace stocon::rng {

// Finalizer-style 64-bit mix. Bijective, so distinct inputs never collide.
std::uint64_t mix64(std::uint64_t x);

// Combines a master seed with an arbitrary list of stream coordinates
// (path index, stream tag, ...) into one 64-bit stream seed.  Chained
// mixing keeps the map bijective in each argument, which is what makes
// per-path streams independent of ensemble size and iteration order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c);

// Counter-based stream: output i is mix64(seed + i * GAMMA).  Jumping to
// any position is O(1), so parallel consumers can fill disjoint slots
// without sharing mutable state.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : seed_(seed), counter_(0) {}

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1); never returns an endpoint.
  double next_uniform();
  // Standard normal via inverse-CDF transform of next_uniform().
  double next_normal();

  void skip(std::uint64_t n) { counter_ += n; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

// Inverse of the standard normal CDF, accurate to ~1e-15 relative over
// p in (0,1) (Wichura's PPND16 rational approximations).  Throws
// InvalidInput outside (0,1).
double inverse_normal_cdf(double p);

// Fills out[0..n) with iid standard normals from the stream for
// (master, path_index, stream_tag).  Convenience used by the SDE driver.
void fill_normals(std::uint64_t master, std::uint64_t path_index,
                  std::uint64_t stream_tag, std::vector<double>& out);

}  // namespace stocon::rng
