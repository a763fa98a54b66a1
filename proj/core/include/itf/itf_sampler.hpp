// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "itf/concentration.hpp"
#include "itf/counts.hpp"
#include "itf/dataset.hpp"
#include "itf/kernels.hpp"
#include "itf/random.hpp"
#include "itf/stick.hpp"

namespace itf {

enum class InitMode { single, random };

struct SamplerConfig {
  GammaPrior alpha_prior{1.0, 1.0};
  GammaPrior beta_prior{1.0, 1.0};
  ConcentrationScheme scheme = ConcentrationScheme::labeled;
  InitMode init = InitMode::single;
  /// Number of labels drawn uniformly per level in random initialization.
  std::size_t init_clusters = 4;
  double initial_alpha = 1.0;
  double initial_beta = 1.0;
  bool sample_alpha = true;
  bool sample_beta = true;
  bool label_moves = true;
};

/// Everything the two-level sampler tracks. Lower labels and slices are
/// stored component-major: c[j][i], u[j][i].
struct ItfState {
  std::vector<std::size_t> c0;
  std::vector<std::vector<std::size_t>> c;
  std::vector<double> u0;
  std::vector<std::vector<double>> u;
  StickMeasure lambda;
  /// psi[h][j]: lower stick measure of top cluster h for component j.
  std::vector<std::vector<StickMeasure>> psi;
  /// theta[j][k]: atom of lower label k, shared by all top clusters.
  std::vector<std::vector<Atom>> theta;
  double alpha = 1.0;
  std::vector<double> beta;
};

// Label-switching acceptance ratios (log scale).

/// Exchanging the labels of two top clusters with weights w1, w2 and sizes
/// m1, m2 while the weights stay put: (w1 / w2)^(m2 - m1).
double pair_swap_log_ratio(double w1, double w2, int m1, int m2);
/// Exchanging labels h, h+1 together with their fractions V_h, V_{h+1}:
/// (1 - V_{h+1})^{m_h} / (1 - V_h)^{m_{h+1}}.
double adjacent_swap_log_ratio(double v_h, double v_next, int m_h, int m_next);
/// Proposal correction when h is drawn uniformly below the occupied extent:
/// log(extent_before / extent_after).
double adjacent_swap_log_hastings(std::size_t extent_before,
                                  std::size_t extent_after);

/// Slice-sampled Gibbs sampler for the infinite tensor factorization
/// mixture. The public steps can be called one at a time; sweep() runs them
/// in scan order.
class ItfSampler {
 public:
  ItfSampler(const MixedDataset& data, std::vector<Kernel> kernels,
             SamplerConfig config = {});

  void initialize(Rng& rng);
  /// Installs an externally built state; counts are recomputed.
  void set_state(ItfState state);

  const ItfState& state() const { return state_; }
  const CountTables& counts() const { return counts_; }
  const SamplerConfig& config() const { return config_; }
  const std::vector<Kernel>& kernels() const { return kernels_; }
  const MixedDataset& data() const { return data_; }

  // Step 1: top level.
  void update_alpha(Rng& rng);
  void update_lambda(Rng& rng);
  bool swap_top_random_pair(Rng& rng);
  bool swap_top_adjacent(Rng& rng);
  void update_u0(Rng& rng);
  // Step 2.
  void update_c0_collapsed(Rng& rng);
  // Step 3: lower level.
  void update_beta(Rng& rng);
  void update_psi(Rng& rng);
  bool swap_lower_random_pair(std::size_t j, Rng& rng);
  bool swap_lower_adjacent(std::size_t j, Rng& rng);
  void update_u1(Rng& rng);
  // Steps 4 and 5.
  void update_cj(Rng& rng);
  void update_theta(Rng& rng);

  /// Trims sticks, rows and atoms to one spare label past the occupied
  /// extent at each level, drawing missing spares from the prior.
  void collect_garbage(Rng& rng);

  void sweep(Rng& rng);

  /// Collapsed top-level conditional of observation i over the
  /// instantiated top labels, given everything else.
  std::vector<double> c0_conditional(std::size_t i) const;
  /// Log-likelihood of the observed cells at the current atoms.
  double log_likelihood() const;

  /// Throws std::logic_error on inconsistent counts or dangling labels.
  void check_invariants() const;
  /// u0[i] < lambda_{c0[i]} for all i.
  void check_top_slices() const;
  /// u[j][i] < psi[c0[i]][j]_{c[j][i]} for all i, j.
  void check_lower_slices() const;

 private:
  std::vector<std::size_t> labels_of(std::size_t i) const;
  double c0_log_weight(std::size_t i, std::size_t k, const CountTables& counts) const;
  void ensure_top_sticks(std::size_t size, Rng& rng);
  void ensure_row(std::size_t h, std::size_t j, std::size_t size, Rng& rng);
  void ensure_atoms(std::size_t j, std::size_t size, Rng& rng);
  void relabel_top(std::size_t a, std::size_t b);
  void relabel_lower(std::size_t j, std::size_t a, std::size_t b);

  const MixedDataset& data_;
  std::vector<Kernel> kernels_;
  SamplerConfig config_;
  ItfState state_;
  CountTables counts_;
  std::vector<double> scratch_;
};

}  // namespace itf
