// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "itf/tensor.hpp"

namespace itf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log sum_k w[k] exp(l[k]) over k < min(sizes).
double log_weighted_sum(std::span<const double> w, std::span<const double> l) {
  const std::size_t n = std::min(w.size(), l.size());
  double mx = kNegInf;
  for (std::size_t k = 0; k < n; ++k) {
    if (w[k] > 0.0) mx = std::max(mx, l[k]);
  }
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (w[k] > 0.0) s += w[k] * std::exp(l[k] - mx);
  }
  return mx + std::log(s);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<std::vector<double>> draw_rows(const Draw& d, ModelKind model,
                                           std::size_t j) {
  std::vector<std::vector<double>> rows;
  if (model == ModelKind::dpm) {
    const std::size_t h_count = d.lambda.size();
    for (std::size_t h = 0; h < h_count; ++h) {
      std::vector<double> r(h + 1, 0.0);
      r[h] = 1.0;
      rows.push_back(std::move(r));
    }
    return rows;
  }
  for (const auto& set : d.psi) {
    const auto w = set.at(j).weights();
    rows.emplace_back(w.begin(), w.end());
  }
  return rows;
}

}  // namespace

PartialObservation observation_row(const MixedDataset& ds, std::size_t i) {
  PartialObservation y(ds.components());
  for (std::size_t j = 0; j < ds.components(); ++j) {
    if (ds.observed(i, j)) {
      const auto c = ds.cell(i, j);
      y[j] = std::vector<double>(c.begin(), c.end());
    }
  }
  return y;
}

CompletedDraw complete_draw(const Draw& d, ModelKind model,
                            const std::vector<Kernel>& kernels, double epsilon,
                            Rng& rng) {
  CompletedDraw out;
  out.theta = d.theta;
  const std::size_t p = kernels.size();
  if (out.theta.size() != p) throw std::invalid_argument("draw: atom sets do not match kernels");
  if (model == ModelKind::dpm) {
    StickMeasure lambda = d.lambda;
    extend_sticks_to_leftover(lambda, epsilon, rng);
    const auto w = lambda.weights();
    out.top.assign(w.begin(), w.end());
    out.shared = true;
    for (std::size_t j = 0; j < p; ++j) {
      while (out.theta[j].size() < lambda.size()) {
        out.theta[j].push_back(kernels[j].prior_draw(rng));
      }
    }
    return out;
  }
  TensorView t{d.lambda, d.psi};
  extend_tensor(t, epsilon, rng);
  const auto w = t.lambda.weights();
  out.top.assign(w.begin(), w.end());
  out.lower.resize(t.psi.size());
  std::vector<std::size_t> longest(p, 0);
  for (std::size_t h = 0; h < t.psi.size(); ++h) {
    out.lower[h].resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      const auto r = t.psi[h][j].weights();
      out.lower[h][j].assign(r.begin(), r.end());
      longest[j] = std::max(longest[j], r.size());
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    while (out.theta[j].size() < longest[j]) {
      out.theta[j].push_back(kernels[j].prior_draw(rng));
    }
  }
  return out;
}

Predictor::Predictor(const PosteriorDraws& draws, double epsilon, std::uint64_t seed)
    : kernels_(draws.header.kernels), epsilon_(epsilon), model_(draws.header.model) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::domain_error("predictor: epsilon must lie in (0, 1)");
  }
  if (draws.draws.empty()) throw std::invalid_argument("predictor: no draws");
  Rng rng(seed);
  draws_.reserve(draws.draws.size());
  for (const auto& d : draws.draws) {
    draws_.push_back(complete_draw(d, model_, kernels_, epsilon_, rng));
  }
}

void Predictor::top_terms(const CompletedDraw& d, const PartialObservation& y,
                          std::optional<std::size_t> skip,
                          std::vector<double>& out) const {
  const std::size_t h_count = d.top.size();
  out.assign(h_count, 0.0);
  std::vector<double> lk;
  for (std::size_t j = 0; j < kernels_.size(); ++j) {
    if (skip && *skip == j) continue;
    const bool present = y[j].has_value();
    if (present) {
      const auto& atoms = d.theta[j];
      lk.resize(atoms.size());
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        lk[k] = kernels_[j].log_density(atoms[k], *y[j]);
      }
    }
    for (std::size_t h = 0; h < h_count; ++h) {
      if (d.shared) {
        if (present) out[h] += lk[h];
        continue;
      }
      const auto& row = d.lower[h][j];
      if (present) {
        out[h] += log_weighted_sum(row, lk);
      } else {
        double mass = 0.0;
        for (double w : row) mass += w;
        out[h] += std::log(mass);
      }
    }
  }
}

double Predictor::log_density(const PartialObservation& y) const {
  if (y.size() != kernels_.size()) throw std::invalid_argument("predictor: arity mismatch");
  std::vector<double> per_draw(draws_.size());
  std::vector<double> terms;
  for (std::size_t t = 0; t < draws_.size(); ++t) {
    const auto& d = draws_[t];
    top_terms(d, y, std::nullopt, terms);
    per_draw[t] = log_weighted_sum(d.top, terms);
  }
  return log_sum_exp(per_draw) - std::log(static_cast<double>(draws_.size()));
}

double Predictor::density(const PartialObservation& y) const {
  return std::exp(log_density(y));
}

ConditionalPrediction Predictor::conditional(const PartialObservation& observed,
                                             std::size_t target) const {
  if (observed.size() != kernels_.size()) {
    throw std::invalid_argument("predictor: arity mismatch");
  }
  if (target >= kernels_.size()) throw std::out_of_range("predictor: no such component");
  if (observed[target].has_value()) {
    throw std::invalid_argument("predictor: target component is observed");
  }
  std::vector<double> logw;
  ComponentMixture mix;
  std::vector<double> terms;
  for (const auto& d : draws_) {
    top_terms(d, observed, target, terms);
    const std::size_t h_count = d.top.size();
    for (std::size_t h = 0; h < h_count; ++h) terms[h] += std::log(d.top[h]);
    const auto& atoms = d.theta[target];
    if (d.shared) {
      for (std::size_t h = 0; h < h_count; ++h) {
        logw.push_back(terms[h]);
        mix.atoms.push_back(atoms[h]);
      }
      continue;
    }
    std::size_t width = 0;
    for (const auto& rows : d.lower) width = std::max(width, rows[target].size());
    std::vector<double> col(h_count);
    for (std::size_t k = 0; k < width; ++k) {
      for (std::size_t h = 0; h < h_count; ++h) {
        const auto& row = d.lower[h][target];
        col[h] = k < row.size() ? row[k] : 0.0;
      }
      logw.push_back(log_weighted_sum(col, terms));
      mix.atoms.push_back(atoms[k]);
    }
  }
  const double z = log_sum_exp(logw);
  mix.weights.resize(logw.size());
  for (std::size_t m = 0; m < logw.size(); ++m) mix.weights[m] = std::exp(logw[m] - z);

  ConditionalPrediction out;
  out.component = target;
  out.kind = kernels_[target].kind();
  const Kernel& kernel = kernels_[target];
  std::vector<double> mean;
  for (std::size_t m = 0; m < mix.atoms.size(); ++m) {
    if (mix.weights[m] == 0.0) continue;
    const auto mu = kernel.mean(mix.atoms[m]);
    if (mean.empty()) mean.assign(mu.size(), 0.0);
    for (std::size_t d = 0; d < mu.size(); ++d) mean[d] += mix.weights[m] * mu[d];
  }
  if (out.kind == ComponentKind::categorical) {
    out.probs = mean;
    const auto best = std::max_element(out.probs.begin(), out.probs.end());
    out.point = {static_cast<double>(best - out.probs.begin())};
  } else {
    out.point = mean;
  }
  out.mixture = std::move(mix);
  return out;
}

double Predictor::log_density(const ConditionalPrediction& pred,
                              std::span<const double> y) const {
  const Kernel& kernel = kernels_.at(pred.component);
  std::vector<double> terms;
  terms.reserve(pred.mixture.atoms.size());
  for (std::size_t m = 0; m < pred.mixture.atoms.size(); ++m) {
    if (pred.mixture.weights[m] == 0.0) continue;
    terms.push_back(std::log(pred.mixture.weights[m]) +
                    kernel.log_density(pred.mixture.atoms[m], y));
  }
  return log_sum_exp(terms);
}

AnswerKey predict_holdouts(const Predictor& pred, const MixedDataset& masked,
                           const AnswerKey& truth) {
  AnswerKey out;
  for (const auto& [name, answers] : truth) {
    const std::size_t j = masked.index_of(name);
    auto& res = out[name];
    for (std::size_t i : answers.rows) {
      const auto obs = observation_row(masked, i);
      res.rows.push_back(i);
      res.values.push_back(pred.conditional(obs, j).point);
    }
  }
  return out;
}

double joint_divergence(std::span<const double> lambda,
                        const std::vector<std::vector<double>>& rows1,
                        const std::vector<std::vector<double>>& rows2) {
  const std::size_t h_count = std::min({lambda.size(), rows1.size(), rows2.size()});
  std::size_t a_n = 0, b_n = 0;
  for (std::size_t h = 0; h < h_count; ++h) {
    a_n = std::max(a_n, rows1[h].size());
    b_n = std::max(b_n, rows2[h].size());
  }
  std::vector<double> joint(a_n * b_n, 0.0);
  for (std::size_t h = 0; h < h_count; ++h) {
    const double lh = lambda[h];
    if (lh == 0.0) continue;
    const auto& r1 = rows1[h];
    const auto& r2 = rows2[h];
    for (std::size_t a = 0; a < r1.size(); ++a) {
      const double w = lh * r1[a];
      if (w == 0.0) continue;
      double* out = joint.data() + a * b_n;
      for (std::size_t b = 0; b < r2.size(); ++b) out[b] += w * r2[b];
    }
  }
  double total = 0.0;
  for (double v : joint) total += v;
  if (!(total > 0.0)) return 0.0;
  std::vector<double> pa(a_n, 0.0), pb(b_n, 0.0);
  for (std::size_t a = 0; a < a_n; ++a) {
    for (std::size_t b = 0; b < b_n; ++b) {
      const double v = joint[a * b_n + b] / total;
      pa[a] += v;
      pb[b] += v;
    }
  }
  double kl = 0.0;
  for (std::size_t a = 0; a < a_n; ++a) {
    for (std::size_t b = 0; b < b_n; ++b) {
      const double v = joint[a * b_n + b] / total;
      if (v > 0.0) kl += v * std::log(v / (pa[a] * pb[b]));
    }
  }
  return std::max(0.0, kl);
}

double draw_divergence(const Draw& d, ModelKind model, std::size_t j1,
                       std::size_t j2) {
  if (j1 == j2) throw std::invalid_argument("dependence: components must differ");
  if (j1 > j2) std::swap(j1, j2);
  return joint_divergence(d.lambda.weights(), draw_rows(d, model, j1),
                          draw_rows(d, model, j2));
}

DependenceReport dependence_statistic(const PosteriorDraws& draws, std::size_t j1,
                                      std::size_t j2, const DependenceOptions& opts) {
  if (j1 == j2) throw std::invalid_argument("dependence: components must differ");
  if (draws.draws.empty()) throw std::invalid_argument("dependence: no draws");
  const std::size_t p = draws.header.kernels.size();
  if (j1 >= p || j2 >= p) throw std::out_of_range("dependence: no such component");
  DependenceReport rep;
  rep.j1 = j1;
  rep.j2 = j2;
  rep.level = opts.level;
  if (j1 > j2) std::swap(j1, j2);
  const ModelKind model = draws.header.model;
  const std::size_t t_count = draws.draws.size();

  struct Prepared {
    std::vector<double> lambda;
    std::vector<double> cumulative;
    std::vector<std::vector<double>> rows1, rows2;
  };
  std::vector<Prepared> prep(t_count);
  double observed = 0.0;
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto& d = draws.draws[t];
    auto& pr = prep[t];
    const auto w = d.lambda.weights();
    pr.lambda.assign(w.begin(), w.end());
    pr.rows1 = draw_rows(d, model, j1);
    pr.rows2 = draw_rows(d, model, j2);
    double acc = 0.0;
    for (double v : pr.lambda) pr.cumulative.push_back(acc += v);
    observed += joint_divergence(pr.lambda, pr.rows1, pr.rows2);
  }
  rep.statistic = std::max(0.0, observed / static_cast<double>(t_count));

  Rng rng(opts.seed);
  std::vector<double> null(opts.replicates);
  std::vector<std::vector<double>> shuffled;
  for (std::size_t b = 0; b < opts.replicates; ++b) {
    double sum = 0.0;
    for (const auto& pr : prep) {
      const std::size_t h_count = pr.lambda.size();
      shuffled.resize(h_count);
      const double total = pr.cumulative.back();
      for (std::size_t h = 0; h < h_count; ++h) {
        const double u = uniform01(rng) * total;
        auto it = std::upper_bound(pr.cumulative.begin(), pr.cumulative.end(), u);
        const std::size_t src = std::min<std::size_t>(it - pr.cumulative.begin(), h_count - 1);
        shuffled[h] = src < pr.rows2.size() ? pr.rows2[src] : std::vector<double>{};
      }
      sum += joint_divergence(pr.lambda, pr.rows1, shuffled);
    }
    null[b] = sum / static_cast<double>(t_count);
  }
  if (!null.empty()) {
    rep.threshold = quantile(null, opts.level);
    rep.null_quantiles = {quantile(null, 0.5), quantile(null, 0.9), quantile(null, 0.95),
                          quantile(null, 0.99)};
    const auto above = std::count_if(null.begin(), null.end(),
                                     [&](double v) { return v >= rep.statistic; });
    rep.p_value = (1.0 + static_cast<double>(above)) /
                  (1.0 + static_cast<double>(null.size()));
  }
  rep.dependent = rep.statistic > rep.threshold;
  return rep;
}

std::vector<double> coclustering_matrix(const PosteriorDraws& draws,
                                        std::optional<std::size_t> component) {
  if (draws.draws.empty()) throw std::invalid_argument("coclustering: no draws");
  const bool shared = draws.header.model == ModelKind::dpm;
  auto labels = [&](const Draw& d) -> const std::vector<std::size_t>& {
    if (!component || shared) return d.c0;
    return d.c.at(*component);
  };
  const std::size_t n = labels(draws.draws.front()).size();
  std::vector<double> m(n * n, 0.0);
  for (const auto& d : draws.draws) {
    const auto& l = labels(d);
    if (l.size() != n) throw std::invalid_argument("coclustering: ragged draws");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i + 1; k < n; ++k) {
        if (l[i] == l[k]) m[i * n + k] += 1.0;
      }
    }
  }
  const double t = static_cast<double>(draws.draws.size());
  for (std::size_t i = 0; i < n; ++i) {
    m[i * n + i] = 1.0;
    for (std::size_t k = i + 1; k < n; ++k) {
      m[i * n + k] /= t;
      m[k * n + i] = m[i * n + k];
    }
  }
  return m;
}

}  // namespace itf
