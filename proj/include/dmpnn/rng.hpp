#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dmpnn {

// 64-bit FNV-1a over a stream name, used to derive substream seeds.
constexpr uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t splitmix64(uint64_t x);

// One seeded random stream, identified by (master seed, stream name, index).
// All conversions from raw 64-bit draws are implemented here (not via
// std::*_distribution) so sequences are reproducible across platforms.
class RngStream {
 public:
  RngStream(uint64_t master_seed, std::string_view stream, uint64_t index = 0);

  // [0, 1) with 53-bit resolution; one raw draw.
  double uniform01();
  double uniform(double lo, double hi);
  // Exp(1) by inverse CDF; one raw draw.
  double exponential();
  // standard normal via Box-Muller; draws two uniforms every other call.
  double gaussian();
  // {0, ..., n-1}; exact when n divides 2^64, negligible bias otherwise.
  uint64_t uniform_int(uint64_t n);
  bool bernoulli(double p);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dmpnn
