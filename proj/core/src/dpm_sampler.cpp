// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/dpm_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace itf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const std::vector<std::vector<std::size_t>> kNoLower;

}  // namespace

DpmSampler::DpmSampler(const MixedDataset& data, std::vector<Kernel> kernels,
                       SamplerConfig config)
    : data_(data), kernels_(std::move(kernels)), config_(config), counts_(0) {
  if (kernels_.size() != data_.components()) {
    throw std::invalid_argument("dpm: one kernel per component required");
  }
  for (std::size_t j = 0; j < kernels_.size(); ++j) {
    check_kernel_matches(kernels_[j], data_.component(j));
  }
  if (!(config_.initial_alpha > 0)) {
    throw std::invalid_argument("dpm: initial concentration must be positive");
  }
}

void DpmSampler::initialize(Rng& rng) {
  const std::size_t n = data_.size();
  if (n == 0) throw std::invalid_argument("dpm: dataset is empty");
  const std::size_t k = config_.init == InitMode::random
                            ? std::max<std::size_t>(1, config_.init_clusters)
                            : 1;
  state_ = DpmState{};
  state_.c.resize(n);
  for (auto& h : state_.c) h = k > 1 ? uniform_index(rng, k) : 0;
  state_.u.assign(n, 0.0);
  state_.alpha = config_.initial_alpha;
  state_.lambda = StickMeasure(state_.alpha);
  state_.theta.assign(kernels_.size(), {});
  counts_ = CountTables::compute(state_.c, kNoLower);
  update_lambda(rng);
  ensure_atoms(state_.lambda.size(), rng);
  update_theta(rng);
  update_u(rng);
}

void DpmSampler::set_state(DpmState state) {
  state_ = std::move(state);
  counts_ = CountTables::compute(state_.c, kNoLower);
  check_invariants();
}

void DpmSampler::ensure_sticks(std::size_t size, Rng& rng) {
  while (state_.lambda.size() < size) {
    state_.lambda.push_back(beta(rng, 1.0, state_.alpha));
  }
}

void DpmSampler::ensure_atoms(std::size_t size, Rng& rng) {
  for (std::size_t j = 0; j < kernels_.size(); ++j) {
    auto& atoms = state_.theta[j];
    while (atoms.size() < size) atoms.push_back(kernels_[j].prior_draw(rng));
  }
}

void DpmSampler::update_alpha(Rng& rng) {
  if (!config_.sample_alpha) return;
  if (config_.scheme == ConcentrationScheme::labeled) {
    const auto m = counts_.top_counts();
    const std::vector<std::vector<int>> rows{std::vector<int>(m.begin(), m.end())};
    state_.alpha =
        update_concentration_labeled(config_.alpha_prior, state_.alpha, rows, rng);
  } else {
    const PartitionGroup g{counts_.occupied_top().size(), data_.size()};
    state_.alpha = update_concentration_exchangeable(
        config_.alpha_prior, state_.alpha, std::span<const PartitionGroup>(&g, 1), rng);
  }
  state_.lambda.set_concentration(state_.alpha);
}

void DpmSampler::update_lambda(Rng& rng) {
  const std::size_t k = std::max(state_.lambda.size(), counts_.top_extent() + 1);
  const auto m = counts_.top_counts();
  long long tail = 0;
  for (int v : m) tail += v;
  std::vector<double> fr(k);
  for (std::size_t h = 0; h < k; ++h) {
    const int mh = h < m.size() ? m[h] : 0;
    tail -= mh;
    fr[h] = beta(rng, 1.0 + mh, state_.alpha + static_cast<double>(tail));
  }
  state_.lambda = StickMeasure(state_.alpha, std::move(fr));
}

void DpmSampler::relabel(std::size_t a, std::size_t b) {
  for (auto& h : state_.c) {
    if (h == a) {
      h = b;
    } else if (h == b) {
      h = a;
    }
  }
  counts_.swap_top(a, b);
  for (auto& atoms : state_.theta) std::swap(atoms.at(a), atoms.at(b));
}

bool DpmSampler::swap_random_pair(Rng& rng) {
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
  relabel(h1, h2);
  return true;
}

bool DpmSampler::swap_adjacent(Rng& rng) {
  const std::size_t e = counts_.top_extent();
  if (e == 0) return false;
  const std::size_t h = uniform_index(rng, e);
  ensure_sticks(h + 2, rng);
  ensure_atoms(h + 2, rng);
  const int m_h = counts_.top(h), m_next = counts_.top(h + 1);
  std::size_t e_after = e;
  if (h + 1 == e && m_next == 0) e_after = e + 1;
  if (h + 2 == e && m_h == 0) e_after = h + 1;
  const double lr = adjacent_swap_log_ratio(state_.lambda.fraction(h),
                                            state_.lambda.fraction(h + 1), m_h, m_next) +
                    adjacent_swap_log_hastings(e, e_after);
  if (std::log(uniform01(rng)) >= lr) return false;
  relabel(h, h + 1);
  state_.lambda.swap_adjacent(h);
  return true;
}

void DpmSampler::update_u(Rng& rng) {
  for (std::size_t i = 0; i < state_.c.size(); ++i) {
    const double w = state_.lambda.weight(state_.c[i]);
    if (!(w > 0.0)) throw std::logic_error("slice: assigned stick has zero weight");
    state_.u[i] = w * uniform01(rng);
  }
}

void DpmSampler::update_c(Rng& rng) {
  const double u_min = *std::min_element(state_.u.begin(), state_.u.end());
  extend_sticks_to_leftover(state_.lambda, u_min, rng);
  const std::size_t k = state_.lambda.size();
  ensure_atoms(k, rng);
  const std::size_t p = kernels_.size();
  scratch_.resize(k);
  for (std::size_t i = 0; i < state_.c.size(); ++i) {
    bool any = false;
    for (std::size_t h = 0; h < k; ++h) {
      if (state_.lambda.weight(h) > state_.u[i]) {
        double lw = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
          if (data_.observed(i, j)) {
            lw += kernels_[j].log_density(state_.theta[j][h], data_.cell(i, j));
          }
        }
        scratch_[h] = lw;
        any = true;
      } else {
        scratch_[h] = kNegInf;
      }
    }
    if (!any) throw std::logic_error("dpm: empty slice support");
    const std::size_t h = categorical_log(rng, scratch_);
    if (h != state_.c[i]) {
      counts_.remove(state_.c[i], {});
      counts_.add(h, {});
      state_.c[i] = h;
    }
  }
}

void DpmSampler::update_theta(Rng& rng) {
  for (std::size_t j = 0; j < kernels_.size(); ++j) {
    const Kernel& kernel = kernels_[j];
    auto& atoms = state_.theta[j];
    std::vector<SuffStats> stats(atoms.size(), kernel.empty_stats());
    for (std::size_t i = 0; i < state_.c.size(); ++i) {
      if (data_.observed(i, j)) kernel.add(stats.at(state_.c[i]), data_.cell(i, j));
    }
    for (std::size_t h = 0; h < atoms.size(); ++h) {
      atoms[h] = kernel.posterior_draw(stats[h], rng);
    }
  }
}

void DpmSampler::collect_garbage(Rng& rng) {
  const std::size_t top = counts_.top_extent() + 1;
  if (state_.lambda.size() > top) state_.lambda.truncate(top);
  ensure_sticks(top, rng);
  for (auto& atoms : state_.theta) {
    if (atoms.size() > top) atoms.resize(top);
  }
  ensure_atoms(top, rng);
}

void DpmSampler::sweep(Rng& rng) {
  update_alpha(rng);
  update_lambda(rng);
  if (config_.label_moves) {
    swap_random_pair(rng);
    swap_adjacent(rng);
  }
  update_u(rng);
  update_c(rng);
  collect_garbage(rng);
  update_theta(rng);
}

double DpmSampler::log_likelihood() const {
  double ll = 0.0;
  for (std::size_t j = 0; j < kernels_.size(); ++j) {
    for (std::size_t i = 0; i < state_.c.size(); ++i) {
      if (!data_.observed(i, j)) continue;
      ll += kernels_[j].log_density(state_.theta[j].at(state_.c[i]), data_.cell(i, j));
    }
  }
  return ll;
}

void DpmSampler::check_invariants() const {
  const std::size_t n = data_.size();
  if (state_.c.size() != n || state_.u.size() != n ||
      state_.theta.size() != kernels_.size()) {
    throw std::logic_error("dpm state: dimensions do not match the dataset");
  }
  if (!(state_.alpha > 0)) throw std::logic_error("dpm state: alpha must be positive");
  for (std::size_t h : state_.c) {
    if (h >= state_.lambda.size()) throw std::logic_error("dpm state: label has no stick");
    for (const auto& atoms : state_.theta) {
      if (h >= atoms.size()) throw std::logic_error("dpm state: label has no atom");
    }
  }
  if (!(CountTables::compute(state_.c, kNoLower) == counts_)) {
    throw std::logic_error("dpm state: incremental counts disagree with a recount");
  }
}

void DpmSampler::check_slices() const {
  for (std::size_t i = 0; i < state_.c.size(); ++i) {
    const double u = state_.u[i];
    if (!(u > 0.0 && u < state_.lambda.weight(state_.c[i]))) {
      throw std::logic_error("slice: u[" + std::to_string(i) + "] outside its stick");
    }
  }
}

}  // namespace itf
