#include "cablesoup/rng.hpp"

#include <cmath>
#include <numbers>

namespace cablesoup {

std::uint32_t hash32(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kBump0 = 0x9E3779B9u;
constexpr std::uint32_t kBump1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
  std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  std::uint32_t c1 = c[1], c3 = c[3];
  c[0] = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k[0];
  c[1] = static_cast<std::uint32_t>(p1);
  c[2] = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k[1];
  c[3] = static_cast<std::uint32_t>(p0);
}

}  // namespace

void philox_block(const std::uint32_t ctr[4], const std::uint32_t key[2],
                  std::uint32_t out[4]) {
  std::uint32_t c[4] = {ctr[0], ctr[1], ctr[2], ctr[3]};
  std::uint32_t k[2] = {key[0], key[1]};
  for (int r = 0; r < 10; ++r) {
    philox_round(c, k);
    k[0] += kBump0;
    k[1] += kBump1;
  }
  out[0] = c[0];
  out[1] = c[1];
  out[2] = c[2];
  out[3] = c[3];
}

RngStream::RngStream(std::uint64_t seed, std::string_view purpose, std::uint64_t replica)
    : seed_(seed), purpose_(hash32(purpose)), replica_(replica) {}

void RngStream::refill() {
  std::uint32_t ctr[4] = {
      static_cast<std::uint32_t>(block_),
      static_cast<std::uint32_t>(block_ >> 32),
      purpose_ ^ static_cast<std::uint32_t>(replica_ >> 32),
      static_cast<std::uint32_t>(replica_),
  };
  std::uint32_t key[2] = {
      static_cast<std::uint32_t>(seed_),
      static_cast<std::uint32_t>(seed_ >> 32),
  };
  philox_block(ctr, key, buf_);
  ++block_;
  avail_ = 4;
}

std::uint32_t RngStream::next_u32() {
  if (avail_ == 0) refill();
  return buf_[4 - avail_--];
}

std::uint64_t RngStream::next_u64() {
  std::uint64_t lo = next_u32();
  std::uint64_t hi = next_u32();
  return lo | (hi << 32);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

double RngStream::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform_pos();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  have_cached_normal_ = true;
  return r * std::cos(theta);
}

double RngStream::exponential(double mean) {
  return -mean * std::log(uniform_pos());
}

double RngStream::gamma(double shape, double scale) {
  if (shape == 0.0) return 0.0;
  if (shape < 1.0) {
    // Boost a Gamma(shape+1) draw down; exact (Marsaglia-Tsang section 5).
    double u = uniform_pos();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform_pos();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

std::uint64_t RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 10.0) {
    double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }
  // Transformed rejection with squeeze (Hormann's PTRD).
  double b = 0.931 + 2.53 * std::sqrt(mean);
  double a = -0.059 + 0.02483 * b;
  double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = uniform() - 0.5;
    double v = uniform();
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * std::log(mean) - mean - std::lgamma(kf + 1.0)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

std::uint64_t RngStream::negative_binomial(std::uint64_t r, double p) {
  if (r == 0) return 0;
  double lambda = gamma(static_cast<double>(r), (1.0 - p) / p);
  return poisson(lambda);
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n <= 1) return 0;
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(seed ^ splitmix64(a ^ splitmix64(b)));
}

}  // namespace cablesoup
