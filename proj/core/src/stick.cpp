// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/stick.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace itf {
namespace {

void check_fraction(double v) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::domain_error("stick fraction outside (0, 1)");
  }
}

void check_counts(std::span<const int> counts) {
  for (int m : counts) {
    if (m < 0) throw std::invalid_argument("negative stick count");
  }
}

}  // namespace

StickMeasure::StickMeasure(double concentration)
    : concentration_(concentration), log_remaining_{0.0} {
  set_concentration(concentration);
}

StickMeasure::StickMeasure(double concentration, std::vector<double> fractions)
    : StickMeasure(concentration) {
  for (double v : fractions) check_fraction(v);
  fractions_ = std::move(fractions);
  refresh_from(0);
}

void StickMeasure::set_concentration(double concentration) {
  if (!(concentration > 0.0)) {
    throw std::domain_error("stick concentration must be positive");
  }
  concentration_ = concentration;
}

double StickMeasure::leftover() const { return std::exp(log_remaining_.back()); }

double StickMeasure::mass() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

void StickMeasure::set_fraction(std::size_t h, double v) {
  check_fraction(v);
  fractions_.at(h) = v;
  refresh_from(h);
}

void StickMeasure::push_back(double v) {
  check_fraction(v);
  fractions_.push_back(v);
  refresh_from(fractions_.size() - 1);
}

void StickMeasure::truncate(std::size_t k) {
  if (k >= fractions_.size()) return;
  fractions_.resize(k);
  weights_.resize(k);
  log_remaining_.resize(k + 1);
}

void StickMeasure::swap_adjacent(std::size_t h) {
  if (h + 1 >= fractions_.size()) {
    throw std::out_of_range("swap_adjacent: stick h+1 not instantiated");
  }
  std::swap(fractions_[h], fractions_[h + 1]);
  refresh_from(h);
}

void StickMeasure::refresh_from(std::size_t h) {
  const std::size_t k = fractions_.size();
  weights_.resize(k);
  log_remaining_.resize(k + 1);
  for (std::size_t l = h; l < k; ++l) {
    weights_[l] = fractions_[l] * std::exp(log_remaining_[l]);
    log_remaining_[l + 1] = log_remaining_[l] + std::log1p(-fractions_[l]);
  }
}

StickWeights stick_to_weights(std::span<const double> fractions) {
  StickWeights out;
  out.weights.reserve(fractions.size());
  double log_rem = 0.0;
  for (double v : fractions) {
    check_fraction(v);
    out.weights.push_back(v * std::exp(log_rem));
    log_rem += std::log1p(-v);
  }
  out.leftover = std::exp(log_rem);
  return out;
}

std::size_t extend_sticks_to_leftover(StickMeasure& m, double max_leftover,
                                      Rng& rng) {
  if (!(max_leftover > 0.0)) {
    throw std::domain_error("extend_sticks: leftover bound must be positive");
  }
  const double bound = std::log(max_leftover);
  std::size_t added = 0;
  while (!(m.log_leftover() < bound)) {
    m.push_back(beta(rng, 1.0, m.concentration()));
    ++added;
  }
  return added;
}

std::size_t extend_sticks(StickMeasure& m, double target_mass, Rng& rng) {
  if (!(target_mass < 1.0)) {
    throw std::domain_error("extend_sticks: target mass must be below 1");
  }
  if (target_mass < 0.0) return 0;
  return extend_sticks_to_leftover(m, 1.0 - target_mass, rng);
}

double gem_log_predictive(std::span<const int> counts, double beta,
                          std::size_t r) {
  check_counts(counts);
  if (!(beta > 0.0)) throw std::domain_error("gem: beta must be positive");
  // Trailing zeros must not change the arithmetic path.
  while (!counts.empty() && counts.back() == 0) counts = counts.first(counts.size() - 1);
  long long tail = 0;  // sum_{s >= l} m_s
  for (int m : counts) tail += m;
  auto count_at = [&](std::size_t l) {
    return l < counts.size() ? counts[l] : 0;
  };
  double lp = 0.0;
  for (std::size_t l = 0; l < r; ++l) {
    const long long after = tail - count_at(l);
    lp += std::log(beta + static_cast<double>(after)) -
          std::log(1.0 + beta + static_cast<double>(tail));
    tail = after;
    if (tail == 0 && l + 1 >= counts.size()) {
      // Remaining factors are all beta / (1 + beta).
      const double rest = static_cast<double>(r - l - 1);
      lp += rest * (std::log(beta) - std::log1p(beta));
      return lp - std::log1p(beta);
    }
  }
  const int mr = count_at(r);
  lp += std::log(1.0 + mr) - std::log(1.0 + beta + static_cast<double>(tail));
  return lp;
}

double gem_predictive_prob(std::span<const int> counts, double beta,
                           std::size_t r) {
  return std::exp(gem_log_predictive(counts, beta, r));
}

double gem_tail_prob(std::span<const int> counts, double beta, std::size_t r) {
  check_counts(counts);
  if (!(beta > 0.0)) throw std::domain_error("gem: beta must be positive");
  long long tail = 0;
  for (int m : counts) tail += m;
  double lp = 0.0;
  for (std::size_t l = 0; l < r; ++l) {
    const int ml = l < counts.size() ? counts[l] : 0;
    const long long after = tail - ml;
    lp += std::log(beta + static_cast<double>(after)) -
          std::log(1.0 + beta + static_cast<double>(tail));
    tail = after;
  }
  return std::exp(lp);
}

}  // namespace itf
