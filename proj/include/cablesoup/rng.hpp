#pragma once

#include <cstdint>
#include <string_view>

namespace cablesoup {

// Counter-based stream built on Philox4x32-10.  Every stream is addressed by
// (seed, purpose, replica): the seed is the user-visible knob, the purpose
// string isolates unrelated consumers from each other, and the replica index
// gives embarrassingly parallel jobs independent streams without coordination.
// Draws are reproducible bit for bit across platforms because every
// distribution below is implemented here rather than delegated to
// <random>, whose distributions are implementation defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view purpose, std::uint64_t replica = 0);

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits; uniform_pos() excludes 0.
  double uniform();
  double uniform_pos();

  // Standard normal, Box-Muller with one value cached.
  double normal();

  double exponential(double mean = 1.0);

  // Gamma(shape, scale); shape == 0 returns exactly 0 (point mass used by the
  // squared Bessel samplers for absorbed paths).
  double gamma(double shape, double scale);

  // Exact Poisson: inversion for small means, PTRD rejection for large ones.
  std::uint64_t poisson(double mean);

  // Number of failures before the r-th success, success probability p.
  // Sampled as Poisson(Gamma(r, (1-p)/p)), exact in law.
  std::uint64_t negative_binomial(std::uint64_t r, double p);

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  std::uint64_t seed_value() const { return seed_; }
  std::uint32_t purpose_id() const { return purpose_; }
  std::uint64_t replica() const { return replica_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint32_t purpose_;
  std::uint64_t replica_;
  std::uint64_t block_ = 0;   // Philox counter, increments per 4x32 block.
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int avail_ = 0;             // unread 32-bit words left in buf_
  double cached_normal_ = 0.0;
  bool have_cached_normal_ = false;

  std::uint32_t next_u32();
};

// FNV-1a, used to fold purpose strings into the counter block.
std::uint32_t hash32(std::string_view s);

// One raw Philox4x32-10 block.  Exposed so the generator can be checked
// against the published test vectors.
void philox_block(const std::uint32_t ctr[4], const std::uint32_t key[2],
                  std::uint32_t out[4]);

// Deterministic child seed for replica sweeps that need a whole family of
// streams per replica (field samples, soups): mixes the master seed with up
// to two indices through splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace cablesoup
