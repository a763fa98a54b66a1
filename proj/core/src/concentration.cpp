// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/concentration.hpp"

#include <cmath>
#include <stdexcept>

namespace itf {
namespace {

double mixture_weight(const GammaPrior& prior, double k, double n, double rate) {
  const double odds = (prior.shape + k - 1.0) / (n * rate);
  return odds / (1.0 + odds);
}

}  // namespace

double escobar_west_given_eta(const GammaPrior& prior, double k, double n,
                              double eta, Rng& rng) {
  const double rate = prior.rate - std::log(eta);
  const double pi = mixture_weight(prior, k, n, rate);
  const double shape = uniform01(rng) < pi ? prior.shape + k : prior.shape + k - 1.0;
  return gamma(rng, shape, rate);
}

double escobar_west_mean_given_eta(const GammaPrior& prior, double k, double n,
                                   double eta) {
  const double rate = prior.rate - std::log(eta);
  const double pi = mixture_weight(prior, k, n, rate);
  return (pi * (prior.shape + k) + (1.0 - pi) * (prior.shape + k - 1.0)) / rate;
}

double update_concentration_exchangeable(const GammaPrior& prior,
                                         double current,
                                         std::span<const PartitionGroup> groups,
                                         Rng& rng) {
  std::vector<PartitionGroup> live;
  for (const auto& g : groups) {
    if (g.size > 1) live.push_back(g);
  }
  if (live.empty()) return gamma(rng, prior.shape, prior.rate);
  if (live.size() == 1) {
    const double n = static_cast<double>(live.front().size);
    const double k = static_cast<double>(live.front().occupied);
    const double eta = beta(rng, current + 1.0, n);
    return escobar_west_given_eta(prior, k, n, eta, rng);
  }
  // prod_r a^{k_r} Gamma(a)/Gamma(a+n_r)
  //   = prod_r a^{k_r - 1} (a + n_r) B(a + 1, n_r) / Gamma(n_r)
  // eta_r carries B(a + 1, n_r); s_r picks a or n_r out of (a + n_r).
  double shape = prior.shape;
  double rate = prior.rate;
  for (const auto& g : live) {
    const double n = static_cast<double>(g.size);
    const double eta = beta(rng, current + 1.0, n);
    rate -= std::log(eta);
    shape += static_cast<double>(g.occupied) - 1.0;
    if (uniform01(rng) < current / (current + n)) shape += 1.0;
  }
  return gamma(rng, shape, rate);
}

double update_concentration_labeled(const GammaPrior& prior, double current,
                                    std::span<const std::vector<int>> rows,
                                    Rng& rng) {
  double shape = prior.shape;
  double rate = prior.rate;
  for (const auto& row : rows) {
    long long tail = 0;
    std::size_t last = 0;
    for (std::size_t h = 0; h < row.size(); ++h) {
      if (row[h] < 0) throw std::invalid_argument("negative count");
      tail += row[h];
      if (row[h] > 0) last = h + 1;
    }
    for (std::size_t h = 0; h < last; ++h) {
      tail -= row[h];
      const double eta =
          beta(rng, current + static_cast<double>(tail), 1.0 + row[h]);
      shape += 1.0;
      rate -= std::log(eta);
    }
  }
  return gamma(rng, shape, rate);
}

double log_exchangeable_posterior(const GammaPrior& prior, double value,
                                  std::span<const PartitionGroup> groups) {
  double lp = (prior.shape - 1.0) * std::log(value) - prior.rate * value;
  for (const auto& g : groups) {
    if (g.size == 0) continue;
    lp += static_cast<double>(g.occupied) * std::log(value) +
          std::lgamma(value) - std::lgamma(value + static_cast<double>(g.size));
  }
  return lp;
}

}  // namespace itf
