// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace itf {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_width(std::span<const double> y, std::size_t width) {
  if (y.size() != width) {
    throw std::invalid_argument("observation width " + std::to_string(y.size()) +
                                " does not match kernel width " +
                                std::to_string(width));
  }
}

std::size_t category_of(std::span<const double> y, std::size_t levels) {
  check_width(y, 1);
  const double v = y[0];
  if (v != std::floor(v) || v < 0.0 || v >= static_cast<double>(levels)) {
    throw std::invalid_argument("category outside the kernel's levels");
  }
  return static_cast<std::size_t>(v);
}

void validate(const GaussianDiagPrior& p) {
  if (p.mean.empty() || p.mean.size() != p.scale.size()) {
    throw std::invalid_argument("gaussian prior: mean and scale lengths differ");
  }
  if (!(p.kappa > 0) || !(p.shape > 0)) {
    throw std::invalid_argument("gaussian prior: kappa and shape must be positive");
  }
  for (double s : p.scale) {
    if (!(s > 0)) throw std::invalid_argument("gaussian prior: scale must be positive");
  }
}

void validate(const CategoricalPrior& p) {
  if (p.concentration.empty()) {
    throw std::invalid_argument("categorical prior: no levels");
  }
  for (double a : p.concentration) {
    if (!(a > 0)) {
      throw std::invalid_argument("categorical prior: concentrations must be positive");
    }
  }
}

void validate(const Ar1Prior& p) {
  if (p.length == 0) throw std::invalid_argument("ar1 prior: zero length");
  if (!(p.level_scale > 0) || !(p.coef_scale > 0) || !(p.shape > 0) ||
      !(p.scale > 0)) {
    throw std::invalid_argument("ar1 prior: scales and shape must be positive");
  }
}

Atom gaussian_posterior(const GaussianDiagPrior& p, const GaussianStats& s,
                        Rng& rng) {
  const std::size_t d = p.mean.size();
  GaussianAtom a{std::vector<double>(d), std::vector<double>(d)};
  const double n = static_cast<double>(s.n);
  const double kn = p.kappa + n;
  const double an = p.shape + 0.5 * n;
  for (std::size_t k = 0; k < d; ++k) {
    double mn = p.mean[k];
    double bn = p.scale[k];
    if (s.n > 0) {
      const double ybar = s.sum[k] / n;
      const double ss = std::max(0.0, s.sumsq[k] - n * ybar * ybar);
      mn = (p.kappa * p.mean[k] + s.sum[k]) / kn;
      bn += 0.5 * ss + 0.5 * p.kappa * n * (ybar - p.mean[k]) * (ybar - p.mean[k]) / kn;
    }
    a.var[k] = 1.0 / gamma(rng, an, bn);
    a.mean[k] = normal(rng, mn, std::sqrt(a.var[k] / kn));
  }
  return a;
}

Atom categorical_posterior(const CategoricalPrior& p, const CategoricalStats& s,
                           Rng& rng) {
  const std::size_t k = p.concentration.size();
  CategoricalAtom a{std::vector<double>(k)};
  double total = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    const double c = s.counts.empty() ? 0.0 : s.counts[l];
    a.prob[l] = gamma(rng, p.concentration[l] + c, 1.0);
    total += a.prob[l];
  }
  for (double& v : a.prob) v /= total;
  return a;
}

Atom ar1_posterior(const Ar1Prior& p, const Ar1Stats& s, Rng& rng) {
  // Posterior precision Pn = P0 + X'X with P0 = diag(1/level_scale, 1/coef_scale).
  const double p00 = 1.0 / p.level_scale + s.xx00;
  const double p01 = s.xx01;
  const double p11 = 1.0 / p.coef_scale + s.xx11;
  const double det = p00 * p11 - p01 * p01;
  const double v00 = p11 / det;
  const double v01 = -p01 / det;
  const double v11 = p00 / det;
  const double r0 = p.level_mean / p.level_scale + s.xy0;
  const double r1 = p.coef_mean / p.coef_scale + s.xy1;
  const double b0 = v00 * r0 + v01 * r1;
  const double b1 = v01 * r0 + v11 * r1;
  const double prior_quad = p.level_mean * p.level_mean / p.level_scale +
                            p.coef_mean * p.coef_mean / p.coef_scale;
  const double post_quad = b0 * r0 + b1 * r1;  // bn' Pn bn
  const double an = p.shape + 0.5 * static_cast<double>(s.count);
  const double sn =
      p.scale + 0.5 * std::max(0.0, s.yy + prior_quad - post_quad);
  const double l00 = std::sqrt(v00);
  const double l10 = v01 / l00;
  const double l11 = std::sqrt(std::max(0.0, v11 - l10 * l10));

  // Joint rejection onto |coef| < 1 keeps the draw exact for the truncated
  // posterior.
  constexpr int kMaxTries = 10000;
  Ar1Atom a;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    a.var = 1.0 / gamma(rng, an, sn);
    const double sd = std::sqrt(a.var);
    const double z0 = normal(rng);
    const double z1 = normal(rng);
    a.level = b0 + sd * l00 * z0;
    a.coef = b1 + sd * (l10 * z0 + l11 * z1);
    if (std::abs(a.coef) < 1.0) return a;
  }
  // Essentially no posterior mass inside the stationary region; clamp.
  a.coef = std::clamp(a.coef, -1.0 + 1e-9, 1.0 - 1e-9);
  return a;
}

}  // namespace

Kernel::Kernel(KernelPrior prior) : prior_(std::move(prior)) {
  std::visit([](const auto& p) { validate(p); }, prior_);
}

ComponentKind Kernel::kind() const {
  return std::visit(overloaded{
                        [](const GaussianDiagPrior&) { return ComponentKind::real; },
                        [](const CategoricalPrior&) { return ComponentKind::categorical; },
                        [](const Ar1Prior&) { return ComponentKind::series; },
                    },
                    prior_);
}

std::size_t Kernel::width() const {
  return std::visit(overloaded{
                        [](const GaussianDiagPrior& p) { return p.mean.size(); },
                        [](const CategoricalPrior&) { return std::size_t{1}; },
                        [](const Ar1Prior& p) { return p.length; },
                    },
                    prior_);
}

Atom Kernel::prior_draw(Rng& rng) const {
  return posterior_draw(empty_stats(), rng);
}

double Kernel::log_density(const Atom& atom, std::span<const double> y) const {
  return std::visit(
      overloaded{
          [&](const GaussianDiagPrior& p) {
            const auto& a = std::get<GaussianAtom>(atom);
            check_width(y, p.mean.size());
            double lp = 0.0;
            for (std::size_t k = 0; k < y.size(); ++k) {
              const double r = y[k] - a.mean[k];
              lp -= 0.5 * (kLog2Pi + std::log(a.var[k]) + r * r / a.var[k]);
            }
            return lp;
          },
          [&](const CategoricalPrior& p) {
            const auto& a = std::get<CategoricalAtom>(atom);
            return std::log(a.prob[category_of(y, p.concentration.size())]);
          },
          [&](const Ar1Prior& p) {
            const auto& a = std::get<Ar1Atom>(atom);
            check_width(y, p.length);
            double lp = 0.0;
            double prev = p.presample;
            const double log_norm = kLog2Pi + std::log(a.var);
            for (double yt : y) {
              const double r = yt - a.level - a.coef * prev;
              lp -= 0.5 * (log_norm + r * r / a.var);
              prev = yt;
            }
            return lp;
          },
      },
      prior_);
}

SuffStats Kernel::empty_stats() const {
  return std::visit(
      overloaded{
          [](const GaussianDiagPrior& p) -> SuffStats {
            return GaussianStats{0, std::vector<double>(p.mean.size(), 0.0),
                                 std::vector<double>(p.mean.size(), 0.0)};
          },
          [](const CategoricalPrior& p) -> SuffStats {
            return CategoricalStats{std::vector<double>(p.concentration.size(), 0.0)};
          },
          [](const Ar1Prior&) -> SuffStats { return Ar1Stats{}; },
      },
      prior_);
}

void Kernel::add(SuffStats& stats, std::span<const double> y) const {
  std::visit(overloaded{
                 [&](const GaussianDiagPrior& p) {
                   check_width(y, p.mean.size());
                   auto& s = std::get<GaussianStats>(stats);
                   ++s.n;
                   for (std::size_t k = 0; k < y.size(); ++k) {
                     s.sum[k] += y[k];
                     s.sumsq[k] += y[k] * y[k];
                   }
                 },
                 [&](const CategoricalPrior& p) {
                   auto& s = std::get<CategoricalStats>(stats);
                   s.counts[category_of(y, p.concentration.size())] += 1.0;
                 },
                 [&](const Ar1Prior& p) {
                   check_width(y, p.length);
                   auto& s = std::get<Ar1Stats>(stats);
                   double prev = p.presample;
                   for (double yt : y) {
                     s.xx00 += 1.0;
                     s.xx01 += prev;
                     s.xx11 += prev * prev;
                     s.xy0 += yt;
                     s.xy1 += prev * yt;
                     s.yy += yt * yt;
                     ++s.count;
                     prev = yt;
                   }
                 },
             },
             prior_);
}

Atom Kernel::posterior_draw(const SuffStats& stats, Rng& rng) const {
  return std::visit(
      overloaded{
          [&](const GaussianDiagPrior& p) {
            return gaussian_posterior(p, std::get<GaussianStats>(stats), rng);
          },
          [&](const CategoricalPrior& p) {
            return categorical_posterior(p, std::get<CategoricalStats>(stats), rng);
          },
          [&](const Ar1Prior& p) {
            return ar1_posterior(p, std::get<Ar1Stats>(stats), rng);
          },
      },
      prior_);
}

std::vector<double> Kernel::mean(const Atom& atom) const {
  return std::visit(overloaded{
                        [&](const GaussianDiagPrior&) {
                          return std::get<GaussianAtom>(atom).mean;
                        },
                        [&](const CategoricalPrior&) {
                          return std::get<CategoricalAtom>(atom).prob;
                        },
                        [&](const Ar1Prior& p) {
                          const auto& a = std::get<Ar1Atom>(atom);
                          std::vector<double> path(p.length);
                          double prev = p.presample;
                          for (double& m : path) {
                            m = a.level + a.coef * prev;
                            prev = m;
                          }
                          return path;
                        },
                    },
                    prior_);
}

Kernel default_kernel(const MixedDataset& ds, std::size_t j) {
  const auto& spec = ds.component(j);
  if (spec.kind == ComponentKind::categorical) {
    return Kernel(CategoricalPrior{std::vector<double>(spec.levels, 1.0)});
  }
  const std::size_t w = spec.width;
  // Per-dimension moments for real vectors; pooled moments for series.
  const std::size_t groups = spec.kind == ComponentKind::real ? w : 1;
  std::vector<double> sum(groups, 0.0), sumsq(groups, 0.0);
  std::vector<double> count(groups, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.observed(i, j)) continue;
    const auto y = ds.cell(i, j);
    for (std::size_t d = 0; d < w; ++d) {
      const std::size_t g = groups == 1 ? 0 : d;
      sum[g] += y[d];
      sumsq[g] += y[d] * y[d];
      count[g] += 1.0;
    }
  }
  std::vector<double> mean(groups, 0.0), var(groups, 1.0);
  for (std::size_t g = 0; g < groups; ++g) {
    if (count[g] > 0) mean[g] = sum[g] / count[g];
    if (count[g] > 1) {
      const double v = sumsq[g] / count[g] - mean[g] * mean[g];
      if (v > 1e-12) var[g] = v;
    }
  }
  if (spec.kind == ComponentKind::real) {
    // shape 2 puts the prior mean of each variance at the empirical variance.
    return Kernel(GaussianDiagPrior{mean, 1.0, 2.0, var});
  }
  Ar1Prior p;
  p.length = w;
  p.level_mean = mean[0];
  p.level_scale = 1.0;
  p.coef_mean = 0.0;
  p.coef_scale = 0.5 / var[0];
  p.shape = 2.0;
  p.scale = var[0];
  p.presample = mean[0];
  return Kernel(p);
}

std::vector<Kernel> default_kernels(const MixedDataset& ds) {
  std::vector<Kernel> out;
  for (std::size_t j = 0; j < ds.components(); ++j) out.push_back(default_kernel(ds, j));
  return out;
}

void check_kernel_matches(const Kernel& k, const ComponentSpec& spec) {
  if (k.kind() != spec.kind || k.width() != spec.width) {
    throw std::invalid_argument("kernel does not match component '" + spec.name + "'");
  }
  if (spec.kind == ComponentKind::categorical &&
      std::get<CategoricalPrior>(k.prior()).concentration.size() != spec.levels) {
    throw std::invalid_argument("kernel level count differs for '" + spec.name + "'");
  }
}

}  // namespace itf
