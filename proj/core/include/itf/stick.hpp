// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "itf/random.hpp"

namespace itf {

/// A truncated stick-breaking measure: fractions V_0..V_{K-1} and the
/// weights w_h = V_h * prod_{l<h} (1 - V_l). Products of (1 - V) are kept
/// in log space, so deep truncations do not underflow the leftover mass.
class StickMeasure {
 public:
  StickMeasure() : StickMeasure(1.0) {}
  explicit StickMeasure(double concentration);
  StickMeasure(double concentration, std::vector<double> fractions);

  std::size_t size() const { return fractions_.size(); }
  bool empty() const { return fractions_.empty(); }

  double concentration() const { return concentration_; }
  void set_concentration(double concentration);

  double fraction(std::size_t h) const { return fractions_.at(h); }
  std::span<const double> fractions() const { return fractions_; }

  double weight(std::size_t h) const { return weights_.at(h); }
  std::span<const double> weights() const { return weights_; }

  /// Mass not covered by the instantiated sticks, prod_h (1 - V_h).
  double leftover() const;
  double log_leftover() const { return log_remaining_.back(); }
  /// Sum of the instantiated weights.
  double mass() const;

  void set_fraction(std::size_t h, double v);
  void push_back(double v);
  void truncate(std::size_t k);
  /// Exchanges V_h and V_{h+1}.
  void swap_adjacent(std::size_t h);

 private:
  void refresh_from(std::size_t h);

  double concentration_;
  std::vector<double> fractions_;
  std::vector<double> weights_;
  // log_remaining_[h] = sum_{l<h} log(1 - V_l); one longer than fractions_.
  std::vector<double> log_remaining_;
};

struct StickWeights {
  std::vector<double> weights;
  double leftover = 1.0;
};

/// Throws std::domain_error when a fraction lies outside (0, 1).
StickWeights stick_to_weights(std::span<const double> fractions);

/// Appends Be(1, concentration) sticks until the instantiated mass exceeds
/// target_mass. Returns the number of sticks appended.
std::size_t extend_sticks(StickMeasure& m, double target_mass, Rng& rng);

/// Same rule phrased on the leftover: appends until leftover < max_leftover.
/// Useful when the slice threshold is tiny and 1 - u would round to 1.
std::size_t extend_sticks_to_leftover(StickMeasure& m, double max_leftover,
                                      Rng& rng);

/// Expected stick weight E[psi_r | counts] when the row's fractions carry
/// independent Be(1 + m_l, beta + sum_{s>l} m_s) posteriors. Indices are
/// zero-based; counts past the end of the span are zero.
double gem_predictive_prob(std::span<const int> counts, double beta,
                           std::size_t r);
double gem_log_predictive(std::span<const int> counts, double beta,
                          std::size_t r);
/// Probability that the next label is >= r; the analytic tail of the above.
double gem_tail_prob(std::span<const int> counts, double beta, std::size_t r);

}  // namespace itf
