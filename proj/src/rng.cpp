#include "dmpnn/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dmpnn {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

RngStream::RngStream(uint64_t master_seed, std::string_view stream, uint64_t index)
    : gen_(splitmix64(splitmix64(master_seed ^ fnv1a64(stream)) ^
                      (index * 0x9e3779b97f4a7c15ull + 0x243f6a8885a308d3ull))) {}

double RngStream::uniform01() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double RngStream::exponential() {
  // u in [0,1) keeps the argument of log1p in (-1, 0].
  return -std::log1p(-uniform01());
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log1p(-u1));
  double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

uint64_t RngStream::uniform_int(uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
  return gen_() % n;
}

bool RngStream::bernoulli(double p) {
  return uniform01() < p;
}

}  // namespace dmpnn
