// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace itf {

double uniform01(Rng& rng) {
  // 53 random mantissa bits, offset by half a unit: strictly inside (0,1).
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

double normal(Rng& rng, double mean, double sd) {
  // A fresh distribution object per call: no cached second deviate leaks
  // between calls, so the engine state alone determines the stream.
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

double gamma(Rng& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("gamma: shape and rate must be positive");
  }
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return std::max(dist(rng), std::numeric_limits<double>::min());
}

double beta(Rng& rng, double a, double b) {
  const double x = gamma(rng, a, 1.0);
  const double y = gamma(rng, b, 1.0);
  double v = x / (x + y);
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - 0x1.0p-53;
  if (!(v > lo)) v = lo;
  if (!(v < hi)) v = hi;
  return v;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return std::min(k, n - 1);
}

double log_sum_exp(std::span<const double> values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

std::size_t categorical_log(Rng& rng, std::span<const double> log_weights) {
  const double total = log_sum_exp(log_weights);
  if (!std::isfinite(total)) {
    throw std::runtime_error("categorical_log: no positive weight");
  }
  const double target = uniform01(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    if (log_weights[k] == -std::numeric_limits<double>::infinity()) continue;
    acc += std::exp(log_weights[k] - total);
    last = k;
    if (target < acc) return k;
  }
  return last;
}

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void set_rng_state(Rng& rng, const std::string& state) {
  std::istringstream is(state);
  is >> rng;
  if (!is) throw std::invalid_argument("set_rng_state: malformed engine state");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace itf
