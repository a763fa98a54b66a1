// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "itf/dataset.hpp"
#include "itf/random.hpp"

namespace itf::test {

inline double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Standard error of the mean from non-overlapping batch means.
inline double batch_se(std::span<const double> v, std::size_t batches = 50) {
  const std::size_t len = v.size() / batches;
  std::vector<double> b;
  for (std::size_t k = 0; k < batches; ++k) {
    b.push_back(mean(v.subspan(k * len, len)));
  }
  return std::sqrt(variance(b) / static_cast<double>(batches));
}

// Categorical-only dataset with uniformly random cells.
inline MixedDataset random_categorical(std::size_t n, std::vector<std::size_t> levels,
                                       Rng& rng) {
  std::vector<ComponentSpec> specs;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    specs.push_back(ComponentSpec::categorical("C" + std::to_string(j), levels[j]));
  }
  MixedDataset ds(specs, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      ds.set_category(i, j, static_cast<int>(uniform_index(rng, levels[j])));
    }
  }
  return ds;
}

// A small dataset touching every kernel family.
inline MixedDataset mixed_toy(std::size_t n, Rng& rng) {
  MixedDataset ds({ComponentSpec::real("R", 2), ComponentSpec::categorical("C", 3),
                   ComponentSpec::series("T", 5)},
                  n);
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = i % 2 ? 2.0 : -2.0;
    const double r[2] = {normal(rng, shift), normal(rng, -shift)};
    ds.set_cell(i, 0, r);
    ds.set_category(i, 1, static_cast<int>(i % 2 ? 2 : uniform_index(rng, 2)));
    std::vector<double> t(5);
    double prev = 0.0;
    for (double& x : t) x = prev = shift + 0.5 * (prev - shift) + normal(rng, 0, 0.5);
    ds.set_cell(i, 2, t);
  }
  return ds;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("itf-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace itf::test
