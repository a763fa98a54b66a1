// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "itf/dataset.hpp"
#include "itf/random.hpp"

namespace itf {

// Atoms: one parameter value theta per lower-level cluster.

struct GaussianAtom {
  std::vector<double> mean;
  std::vector<double> var;
};

struct CategoricalAtom {
  std::vector<double> prob;
};

/// y_t = level + coef * y_{t-1} + e_t, e_t ~ N(0, var), with y_0 fixed to
/// the kernel's presample value.
struct Ar1Atom {
  double level = 0.0;
  double coef = 0.0;
  double var = 1.0;
};

using Atom = std::variant<GaussianAtom, CategoricalAtom, Ar1Atom>;

// Conjugate priors.

/// Per dimension: var ~ IG(shape, scale_d), mean | var ~ N(mean_d, var/kappa).
struct GaussianDiagPrior {
  std::vector<double> mean;
  double kappa = 1.0;
  double shape = 2.0;
  std::vector<double> scale;
};

struct CategoricalPrior {
  std::vector<double> concentration;
};

/// var ~ IG(shape, scale); (level, coef) | var ~ N((level_mean, coef_mean),
/// var * diag(level_scale, coef_scale)), truncated to |coef| < 1.
struct Ar1Prior {
  std::size_t length = 1;
  double level_mean = 0.0;
  double level_scale = 1.0;
  double coef_mean = 0.0;
  double coef_scale = 1.0;
  double shape = 2.0;
  double scale = 1.0;
  double presample = 0.0;
};

using KernelPrior = std::variant<GaussianDiagPrior, CategoricalPrior, Ar1Prior>;

// Sufficient statistics of a cluster's observations.

struct GaussianStats {
  std::size_t n = 0;
  std::vector<double> sum;
  std::vector<double> sumsq;
};

struct CategoricalStats {
  std::vector<double> counts;
};

struct Ar1Stats {
  // Regressors x_t = (1, y_{t-1}); xx holds X'X, xy holds X'y.
  double xx00 = 0.0, xx01 = 0.0, xx11 = 0.0;
  double xy0 = 0.0, xy1 = 0.0;
  double yy = 0.0;
  std::size_t count = 0;
};

using SuffStats = std::variant<GaussianStats, CategoricalStats, Ar1Stats>;

/// A component likelihood K_j(. ; theta) with its conjugate base measure.
class Kernel {
 public:
  explicit Kernel(KernelPrior prior);

  ComponentKind kind() const;
  /// Expected observation width.
  std::size_t width() const;
  const KernelPrior& prior() const { return prior_; }

  Atom prior_draw(Rng& rng) const;
  /// Throws std::invalid_argument when y does not belong to the domain.
  double log_density(const Atom& atom, std::span<const double> y) const;

  SuffStats empty_stats() const;
  void add(SuffStats& stats, std::span<const double> y) const;
  /// Draw from p(theta) prod K(y; theta). Empty statistics give a prior draw.
  Atom posterior_draw(const SuffStats& stats, Rng& rng) const;

  /// E[y | theta]: the mean vector, the path of conditional means, or the
  /// level probabilities.
  std::vector<double> mean(const Atom& atom) const;

 private:
  KernelPrior prior_;
};

/// Data-scaled defaults for component j: Dirichlet(1) for categorical;
/// prior mean and scale taken from the observed cells otherwise.
Kernel default_kernel(const MixedDataset& ds, std::size_t j);
std::vector<Kernel> default_kernels(const MixedDataset& ds);

/// Throws if the kernel's kind or width disagree with the component spec.
void check_kernel_matches(const Kernel& k, const ComponentSpec& spec);

}  // namespace itf
