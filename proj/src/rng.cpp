#include "geo/rng.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "geo/text.hpp"

namespace geo {

namespace {
std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& w : s_) {
    x = text::mix(x);
    w = x;
  }
}

std::uint64_t Rng::next() {
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

std::size_t Rng::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::uniform: empty range");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = next();
  while (v >= limit) v = next();
  return static_cast<std::size_t>(v % n);
}

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal(double mean, double stddev) {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::string Rng::state() const {
  char buf[4 * 16 + 1];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx%016llx%016llx",
                static_cast<unsigned long long>(s_[0]), static_cast<unsigned long long>(s_[1]),
                static_cast<unsigned long long>(s_[2]), static_cast<unsigned long long>(s_[3]));
  return buf;
}

void Rng::set_state(const std::string& hex) {
  if (hex.size() != 64) throw std::invalid_argument("Rng state must be 64 hex digits");
  for (std::size_t i = 0; i < 4; ++i) {
    s_[i] = std::stoull(hex.substr(i * 16, 16), nullptr, 16);
  }
}

}  // namespace geo
