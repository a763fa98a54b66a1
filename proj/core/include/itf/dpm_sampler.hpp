// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <vector>

#include "itf/counts.hpp"
#include "itf/dataset.hpp"
#include "itf/itf_sampler.hpp"
#include "itf/kernels.hpp"
#include "itf/random.hpp"
#include "itf/stick.hpp"

namespace itf {

/// Joint Dirichlet process mixture: one shared label per observation and a
/// product kernel over components.
struct DpmState {
  std::vector<std::size_t> c;
  std::vector<double> u;
  StickMeasure lambda;
  /// theta[j][h]: component-j atom of cluster h.
  std::vector<std::vector<Atom>> theta;
  double alpha = 1.0;
};

/// Slice sampler for the joint DPM. Uses the same kernels, concentration
/// update and label moves as ItfSampler; the beta fields of the config are
/// ignored.
class DpmSampler {
 public:
  DpmSampler(const MixedDataset& data, std::vector<Kernel> kernels,
             SamplerConfig config = {});

  void initialize(Rng& rng);
  void set_state(DpmState state);

  const DpmState& state() const { return state_; }
  /// Cluster sizes, in a count table without lower levels.
  const CountTables& counts() const { return counts_; }
  const SamplerConfig& config() const { return config_; }
  const std::vector<Kernel>& kernels() const { return kernels_; }
  const MixedDataset& data() const { return data_; }

  void update_alpha(Rng& rng);
  void update_lambda(Rng& rng);
  bool swap_random_pair(Rng& rng);
  bool swap_adjacent(Rng& rng);
  void update_u(Rng& rng);
  /// c_i ~ 1{u_i < lambda_h} prod_j K_j(y_ij; theta_jh), held-out cells
  /// contributing a factor of one.
  void update_c(Rng& rng);
  void update_theta(Rng& rng);
  void collect_garbage(Rng& rng);
  void sweep(Rng& rng);

  double log_likelihood() const;
  void check_invariants() const;
  void check_slices() const;

 private:
  void ensure_sticks(std::size_t size, Rng& rng);
  void ensure_atoms(std::size_t size, Rng& rng);
  void relabel(std::size_t a, std::size_t b);

  const MixedDataset& data_;
  std::vector<Kernel> kernels_;
  SamplerConfig config_;
  DpmState state_;
  CountTables counts_;
  std::vector<double> scratch_;
};

}  // namespace itf
