// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "itf/random.hpp"

namespace itf {

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

/// How a stick-breaking concentration is resampled given allocations.
enum class ConcentrationScheme {
  /// Escobar-West on the unlabeled partition:
  ///   p(a | k, n) ~ p(a) a^k Gamma(a) / Gamma(a + n), one factor per group.
  exchangeable,
  /// Exact conditional given *labeled* stick-breaking allocations, through
  /// auxiliary eta_h ~ Beta(a + sum_{s>h} m_s, 1 + m_h) for every label up
  /// to the last occupied one.
  labeled,
};

/// One group of the exchangeable update: k occupied blocks among n items.
struct PartitionGroup {
  std::size_t occupied = 0;
  std::size_t size = 0;
};

/// Escobar-West draw given the auxiliary eta: the two-component mixture
///   pi * Ga(a + k, b - log eta) + (1 - pi) * Ga(a + k - 1, b - log eta),
///   pi / (1 - pi) = (a + k - 1) / (n (b - log eta)).
double escobar_west_given_eta(const GammaPrior& prior, double k, double n,
                              double eta, Rng& rng);
/// Closed-form mean of the mixture above.
double escobar_west_mean_given_eta(const GammaPrior& prior, double k, double n,
                                   double eta);

/// Exchangeable update. Groups with size <= 1 carry no information and are
/// skipped; with no remaining group the draw is from the prior. A single
/// group uses the classic two-component Escobar-West step; several groups
/// use one Beta auxiliary and one Bernoulli auxiliary per group.
double update_concentration_exchangeable(const GammaPrior& prior,
                                         double current,
                                         std::span<const PartitionGroup> groups,
                                         Rng& rng);

/// Labeled update; each row is the count sequence of one stick measure.
double update_concentration_labeled(const GammaPrior& prior, double current,
                                    std::span<const std::vector<int>> rows,
                                    Rng& rng);

/// Log of the unnormalized exchangeable posterior, for quadrature checks.
double log_exchangeable_posterior(const GammaPrior& prior, double value,
                                  std::span<const PartitionGroup> groups);

}  // namespace itf
