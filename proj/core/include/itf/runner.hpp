// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "itf/dataset.hpp"
#include "itf/draws.hpp"
#include "itf/inference.hpp"
#include "itf/itf_sampler.hpp"
#include "itf/kernels.hpp"

namespace itf {

struct RunConfig {
  ModelKind model = ModelKind::itf;
  /// Total sweeps per chain, burn-in included.
  std::size_t iterations = 10000;
  std::size_t burn_in = 1000;
  std::size_t thin = 10;
  std::size_t chains = 1;
  std::uint64_t seed = 1;
  SamplerConfig sampler;
  /// Checkpoint every this many sweeps (0: never). Files are
  /// "<checkpoint>.chain<k>".
  std::size_t checkpoint_every = 0;
  std::filesystem::path checkpoint;
  bool resume = false;
  /// Stop after this sweep, as if interrupted (0: run to the end).
  std::size_t halt_after = 0;
};

/// Throws std::invalid_argument for unusable settings (zero iterations,
/// burn-in not below iterations, zero thinning or chains).
void validate(const RunConfig& c);

std::string run_config_to_json(const RunConfig& c);
/// Fields missing from the JSON keep the values of `base`.
RunConfig run_config_from_json(const std::string& text, RunConfig base = {});

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

struct FitResult {
  PosteriorDraws draws;
  std::size_t sweeps = 0;
  double seconds = 0.0;
  bool completed = true;
};

/// Runs `chains` independent chains in parallel, chain k seeded with
/// derive_seed(seed, k), and merges their retained draws ordered by chain.
FitResult fit(const MixedDataset& data, const std::vector<Kernel>& kernels,
              const RunConfig& config);

void write_manifest(const std::filesystem::path& path, const RunConfig& config,
                    const MixedDataset& data, const FitResult& result,
                    const std::string& command);

// Prediction benchmark comparing the two models on one dataset.

struct BenchmarkConfig {
  RunConfig run;
  /// Hidden rows per component; empty selects T, C2 and C3 at n / 5 each.
  std::vector<std::pair<std::string, std::size_t>> holdouts;
  std::uint64_t holdout_seed = 11;
  double epsilon = 1e-4;
  DependenceOptions dependence;
};

struct LossRow {
  std::string component;
  ComponentKind kind = ComponentKind::real;
  double itf = 0.0;
  double dpm = 0.0;
};

struct DependenceRow {
  std::string pair;
  std::optional<bool> truth;
  DependenceReport itf;
  DependenceReport dpm;
};

struct BenchmarkReport {
  std::vector<LossRow> losses;
  std::vector<DependenceRow> dependence;
  double itf_seconds = 0.0;
  double dpm_seconds = 0.0;
  std::size_t itf_draws = 0;
  std::size_t dpm_draws = 0;
};

BenchmarkReport run_benchmark(const MixedDataset& data, const BenchmarkConfig& config,
                              const std::map<std::string, bool>& truth = {});

std::string benchmark_to_csv(const BenchmarkReport& r);
std::string benchmark_to_json(const BenchmarkReport& r);

}  // namespace itf
