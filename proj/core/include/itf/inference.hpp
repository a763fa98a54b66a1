// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "itf/dataset.hpp"
#include "itf/draws.hpp"
#include "itf/kernels.hpp"

namespace itf {

/// One observation with some components possibly missing.
using PartialObservation = std::vector<std::optional<std::vector<double>>>;

/// Row i of a dataset; held-out cells become nullopt.
PartialObservation observation_row(const MixedDataset& ds, std::size_t i);

/// A draw whose sticks were extended so that the uninstantiated mass is
/// below epsilon. For DPM draws `shared` is set and lower[h] is unused:
/// every component of cluster h uses atom h.
struct CompletedDraw {
  std::vector<double> top;
  /// lower[h][j][k]
  std::vector<std::vector<std::vector<double>>> lower;
  std::vector<std::vector<Atom>> theta;
  bool shared = false;
};

CompletedDraw complete_draw(const Draw& d, ModelKind model,
                            const std::vector<Kernel>& kernels, double epsilon,
                            Rng& rng);

/// Mixture over atoms of one component, as produced by conditional
/// prediction.
struct ComponentMixture {
  std::vector<double> weights;  // normalized
  std::vector<Atom> atoms;
};

struct ConditionalPrediction {
  std::size_t component = 0;
  ComponentKind kind = ComponentKind::real;
  /// Posterior mean (real, series) or {argmax level} (categorical).
  std::vector<double> point;
  /// Level probabilities; categorical only.
  std::vector<double> probs;
  ComponentMixture mixture;
};

/// Monte Carlo predictive built from completed posterior draws:
///   f(y) = 1/T sum_t sum_h0 lambda_h0 prod_j sum_hj psi_{h0 hj} K_j(y_j; theta_hj).
class Predictor {
 public:
  /// Throws std::domain_error for epsilon <= 0 or >= 1.
  Predictor(const PosteriorDraws& draws, double epsilon = 1e-4,
            std::uint64_t seed = 1);

  std::size_t size() const { return draws_.size(); }
  std::size_t components() const { return kernels_.size(); }
  double epsilon() const { return epsilon_; }
  const CompletedDraw& draw(std::size_t t) const { return draws_.at(t); }
  const std::vector<Kernel>& kernels() const { return kernels_; }

  /// Log predictive density of the present components; missing ones are
  /// integrated out.
  double log_density(const PartialObservation& y) const;
  double density(const PartialObservation& y) const;

  /// Predictive law of component `target` given the other present
  /// components, estimated as a ratio of Monte Carlo averages. Throws if
  /// the target is present in `observed`.
  ConditionalPrediction conditional(const PartialObservation& observed,
                                    std::size_t target) const;

  /// Log density of y under a conditional prediction's mixture.
  double log_density(const ConditionalPrediction& pred,
                     std::span<const double> y) const;

 private:
  // Per draw and top cluster: log sum_k psi K(y_j) for every present j,
  // or log row mass for a missing j.
  void top_terms(const CompletedDraw& d, const PartialObservation& y,
                 std::optional<std::size_t> skip,
                 std::vector<double>& out) const;

  std::vector<Kernel> kernels_;
  std::vector<CompletedDraw> draws_;
  double epsilon_;
  ModelKind model_;
};

/// Predictions for every held-out cell of the named components.
AnswerKey predict_holdouts(const Predictor& pred, const MixedDataset& masked,
                           const AnswerKey& truth);

// Dependence between two components.

struct DependenceOptions {
  std::size_t replicates = 200;
  double level = 0.95;
  std::uint64_t seed = 7;
};

struct DependenceReport {
  std::size_t j1 = 0;
  std::size_t j2 = 0;
  /// Posterior mean of the per-draw divergence, nats, clipped at 0.
  double statistic = 0.0;
  /// Null quantile at `level`; dependent when statistic exceeds it.
  double threshold = 0.0;
  double level = 0.95;
  /// Null quantiles at 0.5, 0.9, 0.95, 0.99.
  std::vector<double> null_quantiles;
  double p_value = 1.0;
  bool dependent = false;
};

/// Mutual information of the normalized joint
///   P(a, b) ~ sum_h lambda_h rows1[h][a] rows2[h][b].
/// Rows may be ragged; missing entries are zero.
double joint_divergence(std::span<const double> lambda,
                        const std::vector<std::vector<double>>& rows1,
                        const std::vector<std::vector<double>>& rows2);

/// Divergence of one draw. DPM draws use the identity lower structure.
double draw_divergence(const Draw& d, ModelKind model, std::size_t j1,
                       std::size_t j2);

/// Compares the observed statistic with a null in which, for every draw,
/// the j2 row attached to each top cluster is replaced by the row of a top
/// cluster drawn i.i.d. from the normalized top weights.
DependenceReport dependence_statistic(const PosteriorDraws& draws,
                                      std::size_t j1, std::size_t j2,
                                      const DependenceOptions& opts = {});

/// n x n row-major co-assignment frequencies. With no component the top
/// (or shared, for DPM) labels are used.
std::vector<double> coclustering_matrix(const PosteriorDraws& draws,
                                        std::optional<std::size_t> component);

}  // namespace itf
