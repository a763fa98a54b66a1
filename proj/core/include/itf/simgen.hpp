// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "itf/dataset.hpp"
#include "itf/random.hpp"

namespace itf {

/// Stationary AR(1): y_t = mean + coef (y_{t-1} - mean) + sd e_t, started
/// from the stationary law.
struct SeriesCluster {
  double mean = 0.0;
  double coef = 0.0;
  double sd = 1.0;
};

/// Two simulation designs over the components T (series), R (real vector),
/// C1 (categorical) and binary C2, C3.
///
/// Scenario 1: one global label g drives every component.
/// Scenario 2: label a drives T; R and C1 follow a with probability
/// `coupling` and take a uniformly chosen other cluster otherwise; an
/// independent label b drives both C2 and C3.
struct ScenarioSpec {
  int scenario = 1;
  std::size_t n = 1000;
  std::size_t series_length = 12;
  std::uint64_t seed = 1;
  /// Weights of g (scenario 1) or a (scenario 2).
  std::vector<double> weights;
  /// Weights of b (scenario 2).
  std::vector<double> pair_weights;
  double coupling = 0.8;
  std::vector<SeriesCluster> series;
  std::vector<std::vector<double>> real_means;
  double real_sd = 1.0;
  std::vector<std::vector<double>> c1_tables;
  std::vector<std::vector<double>> c2_tables;
  std::vector<std::vector<double>> c3_tables;
};

/// Defaults: scenario 1 has two global clusters, scenario 2 three T
/// clusters and two C2/C3 clusters. Throws for other scenario numbers.
ScenarioSpec default_scenario(int scenario, std::size_t n = 1000,
                              std::uint64_t seed = 1);
/// Throws std::invalid_argument for inconsistent specs.
void validate(const ScenarioSpec& spec);

struct GeneratedData {
  MixedDataset data;
  /// Latent labels by name: "g" (scenario 1) or "a", "a_R", "a_C1", "b".
  std::map<std::string, std::vector<std::size_t>> labels;
  /// Ground-truth dependence for the tested pairs, keyed "C1-T" etc.
  std::map<std::string, bool> truth;
};

GeneratedData generate(const ScenarioSpec& spec, Rng& rng);
/// Same, seeded from spec.seed.
GeneratedData generate(const ScenarioSpec& spec);

/// Pairs reported by the benchmark, in table order.
const std::vector<std::pair<std::string, std::string>>& tested_pairs();

std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const std::string& text);
std::string truth_to_json(const GeneratedData& g);

}  // namespace itf
