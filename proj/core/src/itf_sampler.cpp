// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/itf_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace itf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Extent after exchanging labels h and h + 1 in a count sequence whose
// extent is `extent`.
std::size_t extent_after_adjacent(std::size_t extent, std::size_t h, int m_h,
                                  int m_next) {
  if (h + 1 == extent && m_next == 0) return extent + 1;
  if (h + 2 == extent && m_h == 0) {
    return h + 1;
  }
  return extent;
}

StickMeasure posterior_sticks(std::span<const int> counts, double conc,
                              std::size_t length, Rng& rng) {
  long long tail = 0;
  for (int m : counts) tail += m;
  std::vector<double> fr(length);
  for (std::size_t k = 0; k < length; ++k) {
    const int m = k < counts.size() ? counts[k] : 0;
    tail -= m;
    fr[k] = beta(rng, 1.0 + m, conc + static_cast<double>(tail));
  }
  return StickMeasure(conc, std::move(fr));
}

}  // namespace

double pair_swap_log_ratio(double w1, double w2, int m1, int m2) {
  if (m1 == m2) return 0.0;
  return static_cast<double>(m2 - m1) * (std::log(w1) - std::log(w2));
}

double adjacent_swap_log_ratio(double v_h, double v_next, int m_h, int m_next) {
  double lr = 0.0;
  if (m_h != 0) lr += m_h * std::log1p(-v_next);
  if (m_next != 0) lr -= m_next * std::log1p(-v_h);
  return lr;
}

double adjacent_swap_log_hastings(std::size_t extent_before,
                                  std::size_t extent_after) {
  return std::log(static_cast<double>(extent_before)) -
         std::log(static_cast<double>(extent_after));
}

ItfSampler::ItfSampler(const MixedDataset& data, std::vector<Kernel> kernels,
                       SamplerConfig config)
    : data_(data), kernels_(std::move(kernels)), config_(config) {
  if (kernels_.size() != data_.components()) {
    throw std::invalid_argument("sampler: one kernel per component required");
  }
  for (std::size_t j = 0; j < kernels_.size(); ++j) {
    check_kernel_matches(kernels_[j], data_.component(j));
  }
  if (!(config_.initial_alpha > 0) || !(config_.initial_beta > 0)) {
    throw std::invalid_argument("sampler: initial concentrations must be positive");
  }
}

std::vector<std::size_t> ItfSampler::labels_of(std::size_t i) const {
  std::vector<std::size_t> labels(state_.c.size());
  for (std::size_t j = 0; j < labels.size(); ++j) labels[j] = state_.c[j][i];
  return labels;
}

void ItfSampler::initialize(Rng& rng) {
  const std::size_t n = data_.size();
  const std::size_t p = data_.components();
  if (n == 0) throw std::invalid_argument("sampler: dataset is empty");
  const std::size_t k = config_.init == InitMode::random
                            ? std::max<std::size_t>(1, config_.init_clusters)
                            : 1;
  state_ = ItfState{};
  state_.c0.resize(n);
  state_.c.assign(p, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    state_.c0[i] = k > 1 ? uniform_index(rng, k) : 0;
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      state_.c[j][i] = k > 1 ? uniform_index(rng, k) : 0;
    }
  }
  state_.u0.assign(n, 0.0);
  state_.u.assign(p, std::vector<double>(n, 0.0));
  state_.alpha = config_.initial_alpha;
  state_.beta.assign(p, config_.initial_beta);
  state_.lambda = StickMeasure(state_.alpha);
  state_.theta.assign(p, {});
  counts_ = CountTables::compute(state_.c0, state_.c);

  update_lambda(rng);
  for (std::size_t j = 0; j < p; ++j) ensure_atoms(j, counts_.lower_extent(j) + 1, rng);
  update_theta(rng);
  update_psi(rng);
  update_u0(rng);
  update_u1(rng);
}

void ItfSampler::set_state(ItfState state) {
  state_ = std::move(state);
  counts_ = CountTables::compute(state_.c0, state_.c);
  check_invariants();
}

void ItfSampler::ensure_top_sticks(std::size_t size, Rng& rng) {
  while (state_.lambda.size() < size) {
    state_.lambda.push_back(beta(rng, 1.0, state_.alpha));
  }
}

void ItfSampler::ensure_row(std::size_t h, std::size_t j, std::size_t size,
                            Rng& rng) {
  const std::size_t p = state_.beta.size();
  while (state_.psi.size() <= h) {
    std::vector<StickMeasure> rows;
    for (std::size_t jj = 0; jj < p; ++jj) rows.emplace_back(state_.beta[jj]);
    state_.psi.push_back(std::move(rows));
  }
  auto& row = state_.psi[h][j];
  while (row.size() < size) row.push_back(beta(rng, 1.0, state_.beta[j]));
}

void ItfSampler::ensure_atoms(std::size_t j, std::size_t size, Rng& rng) {
  auto& atoms = state_.theta[j];
  while (atoms.size() < size) atoms.push_back(kernels_[j].prior_draw(rng));
}

// ---- step 1 --------------------------------------------------------------

void ItfSampler::update_alpha(Rng& rng) {
  if (!config_.sample_alpha) return;
  if (config_.scheme == ConcentrationScheme::labeled) {
    const auto m0 = counts_.top_counts();
    const std::vector<std::vector<int>> rows{std::vector<int>(m0.begin(), m0.end())};
    state_.alpha = update_concentration_labeled(config_.alpha_prior, state_.alpha,
                                                rows, rng);
  } else {
    const PartitionGroup g{counts_.occupied_top().size(), data_.size()};
    state_.alpha = update_concentration_exchangeable(
        config_.alpha_prior, state_.alpha, std::span<const PartitionGroup>(&g, 1), rng);
  }
  state_.lambda.set_concentration(state_.alpha);
}

void ItfSampler::update_lambda(Rng& rng) {
  const std::size_t k = std::max(state_.lambda.size(), counts_.top_extent() + 1);
  state_.lambda = posterior_sticks(counts_.top_counts(), state_.alpha, k, rng);
}

void ItfSampler::relabel_top(std::size_t a, std::size_t b) {
  for (auto& h : state_.c0) {
    if (h == a) {
      h = b;
    } else if (h == b) {
      h = a;
    }
  }
  counts_.swap_top(a, b);
  if (std::max(a, b) < state_.psi.size()) std::swap(state_.psi[a], state_.psi[b]);
}

bool ItfSampler::swap_top_random_pair(Rng& rng) {
  const auto occ = counts_.occupied_top();
  if (occ.size() < 2) return false;
  const std::size_t a = uniform_index(rng, occ.size());
  std::size_t b = uniform_index(rng, occ.size() - 1);
  if (b >= a) ++b;
  const std::size_t h1 = occ[a], h2 = occ[b];
  const double lr = pair_swap_log_ratio(state_.lambda.weight(h1),
                                        state_.lambda.weight(h2), counts_.top(h1),
                                        counts_.top(h2));
  if (std::log(uniform01(rng)) >= lr) return false;
  relabel_top(h1, h2);
  return true;
}

bool ItfSampler::swap_top_adjacent(Rng& rng) {
  const std::size_t e = counts_.top_extent();
  if (e == 0) return false;
  const std::size_t h = uniform_index(rng, e);
  ensure_top_sticks(h + 2, rng);
  const int m_h = counts_.top(h), m_next = counts_.top(h + 1);
  const std::size_t e_after = extent_after_adjacent(e, h, m_h, m_next);
  const double lr =
      adjacent_swap_log_ratio(state_.lambda.fraction(h), state_.lambda.fraction(h + 1),
                              m_h, m_next) +
      adjacent_swap_log_hastings(e, e_after);
  if (std::log(uniform01(rng)) >= lr) return false;
  relabel_top(h, h + 1);
  state_.lambda.swap_adjacent(h);
  return true;
}

void ItfSampler::update_u0(Rng& rng) {
  for (std::size_t i = 0; i < state_.c0.size(); ++i) {
    const double w = state_.lambda.weight(state_.c0[i]);
    if (!(w > 0.0)) throw std::logic_error("slice: assigned top stick has zero weight");
    state_.u0[i] = w * uniform01(rng);
  }
}

// ---- step 2 --------------------------------------------------------------

double ItfSampler::c0_log_weight(std::size_t i, std::size_t k,
                                 const CountTables& counts) const {
  double lw = 0.0;
  for (std::size_t j = 0; j < state_.c.size(); ++j) {
    lw += gem_log_predictive(counts.lower_row(j, k), state_.beta[j], state_.c[j][i]);
  }
  return lw;
}

void ItfSampler::update_c0_collapsed(Rng& rng) {
  const double u_min = *std::min_element(state_.u0.begin(), state_.u0.end());
  extend_sticks_to_leftover(state_.lambda, u_min, rng);
  const std::size_t k = state_.lambda.size();
  scratch_.resize(k);
  for (std::size_t i = 0; i < state_.c0.size(); ++i) {
    const auto labels = labels_of(i);
    counts_.remove(state_.c0[i], labels);
    bool any = false;
    for (std::size_t h = 0; h < k; ++h) {
      if (state_.lambda.weight(h) > state_.u0[i]) {
        scratch_[h] = c0_log_weight(i, h, counts_);
        any = true;
      } else {
        scratch_[h] = kNegInf;
      }
    }
    if (!any) throw std::logic_error("step 2: empty slice support");
    state_.c0[i] = categorical_log(rng, scratch_);
    counts_.add(state_.c0[i], labels);
  }
}

std::vector<double> ItfSampler::c0_conditional(std::size_t i) const {
  CountTables counts = counts_;
  counts.remove(state_.c0.at(i), labels_of(i));
  const std::size_t k = state_.lambda.size();
  std::vector<double> lw(k, kNegInf);
  for (std::size_t h = 0; h < k; ++h) {
    if (state_.lambda.weight(h) > state_.u0[i]) lw[h] = c0_log_weight(i, h, counts);
  }
  const double z = log_sum_exp(lw);
  for (double& v : lw) v = std::exp(v - z);
  return lw;
}

// ---- step 3 --------------------------------------------------------------

void ItfSampler::update_beta(Rng& rng) {
  if (!config_.sample_beta) return;
  const auto occ = counts_.occupied_top();
  for (std::size_t j = 0; j < state_.beta.size(); ++j) {
    if (config_.scheme == ConcentrationScheme::labeled) {
      std::vector<std::vector<int>> rows;
      for (std::size_t h : occ) {
        const auto row = counts_.lower_row(j, h);
        rows.emplace_back(row.begin(), row.end());
      }
      state_.beta[j] =
          update_concentration_labeled(config_.beta_prior, state_.beta[j], rows, rng);
    } else {
      std::vector<PartitionGroup> groups;
      for (std::size_t h : occ) {
        groups.push_back({counts_.occupied_in_row(j, h),
                          static_cast<std::size_t>(counts_.top(h))});
      }
      state_.beta[j] = update_concentration_exchangeable(config_.beta_prior,
                                                         state_.beta[j], groups, rng);
    }
  }
}

void ItfSampler::update_psi(Rng& rng) {
  const std::size_t rows = state_.lambda.size();
  const std::size_t p = state_.beta.size();
  state_.psi.resize(rows);
  for (std::size_t h = 0; h < rows; ++h) {
    state_.psi[h].resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t len = counts_.lower_extent(j) + 1;
      state_.psi[h][j] =
          posterior_sticks(counts_.lower_row(j, h), state_.beta[j], len, rng);
    }
  }
}

void ItfSampler::relabel_lower(std::size_t j, std::size_t a, std::size_t b) {
  for (auto& k : state_.c[j]) {
    if (k == a) {
      k = b;
    } else if (k == b) {
      k = a;
    }
  }
  counts_.swap_lower(j, a, b);
  std::swap(state_.theta[j][a], state_.theta[j][b]);
}

bool ItfSampler::swap_lower_random_pair(std::size_t j, Rng& rng) {
  const auto occ = counts_.occupied_lower(j);
  if (occ.size() < 2) return false;
  const std::size_t a = uniform_index(rng, occ.size());
  std::size_t b = uniform_index(rng, occ.size() - 1);
  if (b >= a) ++b;
  const std::size_t k1 = occ[a], k2 = occ[b];
  double lr = 0.0;
  for (std::size_t h : counts_.occupied_top()) {
    const auto& row = state_.psi.at(h)[j];
    lr += pair_swap_log_ratio(row.weight(k1), row.weight(k2), counts_.lower(j, h, k1),
                              counts_.lower(j, h, k2));
  }
  if (std::log(uniform01(rng)) >= lr) return false;
  relabel_lower(j, k1, k2);
  return true;
}

bool ItfSampler::swap_lower_adjacent(std::size_t j, Rng& rng) {
  const std::size_t e = counts_.lower_extent(j);
  if (e == 0) return false;
  const std::size_t k = uniform_index(rng, e);
  for (std::size_t h = 0; h < state_.psi.size(); ++h) ensure_row(h, j, k + 2, rng);
  ensure_atoms(j, k + 2, rng);
  double lr = 0.0;
  for (std::size_t h : counts_.occupied_top()) {
    const auto& row = state_.psi.at(h)[j];
    lr += adjacent_swap_log_ratio(row.fraction(k), row.fraction(k + 1),
                                  counts_.lower(j, h, k), counts_.lower(j, h, k + 1));
  }
  const std::size_t e_after = extent_after_adjacent(
      e, k, counts_.lower_total(j, k), counts_.lower_total(j, k + 1));
  lr += adjacent_swap_log_hastings(e, e_after);
  if (std::log(uniform01(rng)) >= lr) return false;
  relabel_lower(j, k, k + 1);
  for (auto& rows : state_.psi) rows[j].swap_adjacent(k);
  return true;
}

void ItfSampler::update_u1(Rng& rng) {
  for (std::size_t j = 0; j < state_.c.size(); ++j) {
    for (std::size_t i = 0; i < state_.c0.size(); ++i) {
      const double w = state_.psi.at(state_.c0[i])[j].weight(state_.c[j][i]);
      if (!(w > 0.0)) throw std::logic_error("slice: assigned lower stick has zero weight");
      state_.u[j][i] = w * uniform01(rng);
    }
  }
}

// ---- steps 4 and 5 -------------------------------------------------------

void ItfSampler::update_cj(Rng& rng) {
  const std::size_t n = state_.c0.size();
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < state_.c.size(); ++j) {
    std::vector<double> row_min(state_.psi.size(), inf);
    for (std::size_t i = 0; i < n; ++i) {
      auto& m = row_min.at(state_.c0[i]);
      m = std::min(m, state_.u[j][i]);
    }
    std::size_t longest = 0;
    for (std::size_t h = 0; h < row_min.size(); ++h) {
      if (row_min[h] < inf) {
        extend_sticks_to_leftover(state_.psi[h][j], row_min[h], rng);
        longest = std::max(longest, state_.psi[h][j].size());
      }
    }
    ensure_atoms(j, longest, rng);
    const Kernel& kernel = kernels_[j];
    const auto& atoms = state_.theta[j];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t h = state_.c0[i];
      const auto& row = state_.psi[h][j];
      const bool seen = data_.observed(i, j);
      std::span<const double> y;
      if (seen) y = data_.cell(i, j);
      scratch_.assign(row.size(), kNegInf);
      bool any = false;
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row.weight(k) > state_.u[j][i]) {
          scratch_[k] = seen ? kernel.log_density(atoms[k], y) : 0.0;
          any = true;
        }
      }
      if (!any) throw std::logic_error("step 4: empty slice support");
      const std::size_t k = categorical_log(rng, scratch_);
      if (k != state_.c[j][i]) {
        counts_.move_lower(j, h, state_.c[j][i], k);
        state_.c[j][i] = k;
      }
    }
  }
}

void ItfSampler::update_theta(Rng& rng) {
  for (std::size_t j = 0; j < state_.theta.size(); ++j) {
    const Kernel& kernel = kernels_[j];
    auto& atoms = state_.theta[j];
    std::vector<SuffStats> stats(atoms.size(), kernel.empty_stats());
    for (std::size_t i = 0; i < state_.c0.size(); ++i) {
      if (data_.observed(i, j)) kernel.add(stats.at(state_.c[j][i]), data_.cell(i, j));
    }
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      atoms[k] = kernel.posterior_draw(stats[k], rng);
    }
  }
}

void ItfSampler::collect_garbage(Rng& rng) {
  const std::size_t top = counts_.top_extent() + 1;
  if (state_.lambda.size() > top) state_.lambda.truncate(top);
  ensure_top_sticks(top, rng);
  if (state_.psi.size() > top) state_.psi.resize(top);
  for (std::size_t j = 0; j < state_.c.size(); ++j) {
    const std::size_t len = counts_.lower_extent(j) + 1;
    for (std::size_t h = 0; h < top; ++h) {
      if (h < state_.psi.size() && state_.psi[h][j].size() > len) {
        state_.psi[h][j].truncate(len);
      }
      ensure_row(h, j, len, rng);
    }
    if (state_.theta[j].size() > len) state_.theta[j].resize(len);
    ensure_atoms(j, len, rng);
  }
}

void ItfSampler::sweep(Rng& rng) {
  update_alpha(rng);
  update_lambda(rng);
  if (config_.label_moves) {
    swap_top_random_pair(rng);
    swap_top_adjacent(rng);
  }
  update_u0(rng);
  update_c0_collapsed(rng);
  update_beta(rng);
  update_psi(rng);
  if (config_.label_moves) {
    for (std::size_t j = 0; j < state_.c.size(); ++j) {
      swap_lower_random_pair(j, rng);
      swap_lower_adjacent(j, rng);
    }
  }
  update_u1(rng);
  update_cj(rng);
  // Trim first so that step 5 draws exactly the retained atoms.
  collect_garbage(rng);
  update_theta(rng);
}

double ItfSampler::log_likelihood() const {
  double ll = 0.0;
  for (std::size_t j = 0; j < state_.c.size(); ++j) {
    for (std::size_t i = 0; i < state_.c0.size(); ++i) {
      if (!data_.observed(i, j)) continue;
      ll += kernels_[j].log_density(state_.theta[j].at(state_.c[j][i]), data_.cell(i, j));
    }
  }
  return ll;
}

void ItfSampler::check_invariants() const {
  const std::size_t n = data_.size();
  const std::size_t p = data_.components();
  if (state_.c0.size() != n || state_.u0.size() != n || state_.c.size() != p ||
      state_.u.size() != p || state_.theta.size() != p || state_.beta.size() != p) {
    throw std::logic_error("state: dimensions do not match the dataset");
  }
  if (!(state_.alpha > 0)) throw std::logic_error("state: alpha must be positive");
  for (std::size_t j = 0; j < p; ++j) {
    if (state_.c[j].size() != n || state_.u[j].size() != n) {
      throw std::logic_error("state: lower labels have the wrong length");
    }
    if (!(state_.beta[j] > 0)) throw std::logic_error("state: beta must be positive");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (state_.c0[i] >= state_.lambda.size()) {
      throw std::logic_error("state: top label " + std::to_string(state_.c0[i]) +
                             " has no stick");
    }
    for (std::size_t j = 0; j < p; ++j) {
      if (state_.c[j][i] >= state_.theta[j].size()) {
        throw std::logic_error("state: lower label has no atom");
      }
    }
  }
  if (!(CountTables::compute(state_.c0, state_.c) == counts_)) {
    throw std::logic_error("state: incremental counts disagree with a recount");
  }
}

void ItfSampler::check_top_slices() const {
  for (std::size_t i = 0; i < state_.c0.size(); ++i) {
    const double u = state_.u0[i];
    if (!(u > 0.0 && u < state_.lambda.weight(state_.c0[i]))) {
      throw std::logic_error("slice: u0[" + std::to_string(i) + "] outside its stick");
    }
  }
}

void ItfSampler::check_lower_slices() const {
  for (std::size_t j = 0; j < state_.c.size(); ++j) {
    for (std::size_t i = 0; i < state_.c0.size(); ++i) {
      const double u = state_.u[j][i];
      const double w = state_.psi.at(state_.c0[i]).at(j).weight(state_.c[j][i]);
      if (!(u > 0.0 && u < w)) {
        throw std::logic_error("slice: u[" + std::to_string(j) + "][" +
                               std::to_string(i) + "] outside its stick");
      }
    }
  }
}

}  // namespace itf
