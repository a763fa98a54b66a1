// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "itf/inference.hpp"
#include "itf/dpm_sampler.hpp"
#include "itf/itf_sampler.hpp"
#include "support.hpp"

using namespace itf;

namespace {

constexpr double kOne = 1.0 - 1e-15;

Kernel cat_kernel(std::size_t k) { return Kernel(CategoricalPrior{std::vector<double>(k, 1.0)}); }

// Stick fractions reproducing the given weights, the last one closing the
// stick up to a negligible remainder.
StickMeasure exact_weights(const std::vector<double>& w) {
  std::vector<double> f;
  double left = 1.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    f.push_back(k + 1 == w.size() ? kOne : w[k] / left);
    left -= w[k];
  }
  return StickMeasure(1.0, f);
}

// Two top clusters over two categorical components with two atoms each.
PosteriorDraws two_by_two(std::vector<double> lambda, std::vector<std::vector<double>> rows1,
                          std::vector<std::vector<double>> rows2) {
  PosteriorDraws pd;
  pd.header.model = ModelKind::itf;
  pd.header.kernels = {cat_kernel(2), cat_kernel(2)};
  pd.header.components = {"A", "B"};
  Draw d;
  d.lambda = exact_weights(lambda);
  for (std::size_t h = 0; h < lambda.size(); ++h) {
    d.psi.push_back({exact_weights(rows1[h]), exact_weights(rows2[h])});
  }
  d.theta = {{CategoricalAtom{{0.9, 0.1}}, CategoricalAtom{{0.2, 0.8}}},
             {CategoricalAtom{{0.6, 0.4}}, CategoricalAtom{{0.3, 0.7}}}};
  d.c0 = {0};
  d.c = {{0}, {0}};
  d.beta = {1.0, 1.0};
  pd.draws.push_back(d);
  return pd;
}

PartialObservation obs(std::optional<double> a, std::optional<double> b) {
  PartialObservation y(2);
  if (a) y[0] = std::vector<double>{*a};
  if (b) y[1] = std::vector<double>{*b};
  return y;
}

PosteriorDraws fitted_draws(ModelKind model, const MixedDataset& ds, int sweeps, Rng& rng) {
  PosteriorDraws pd;
  pd.header.model = model;
  pd.header.kernels = default_kernels(ds);
  SamplerConfig cfg;
  cfg.init = InitMode::random;
  if (model == ModelKind::itf) {
    ItfSampler s(ds, pd.header.kernels, cfg);
    s.initialize(rng);
    for (int t = 0; t < sweeps; ++t) {
      s.sweep(rng);
      if (t % 5 == 4) pd.draws.push_back(snapshot(s, t, 0));
    }
  } else {
    DpmSampler s(ds, pd.header.kernels, cfg);
    s.initialize(rng);
    for (int t = 0; t < sweeps; ++t) {
      s.sweep(rng);
      if (t % 5 == 4) pd.draws.push_back(snapshot(s, t, 0));
    }
  }
  return pd;
}

}  // namespace

TEST_CASE("single degenerate cluster gives the product of kernel densities") {
  const auto pd = two_by_two({1.0}, {{1.0}}, {{1.0}});
  const Predictor pred(pd, 1e-9);
  CHECK(pred.density(obs(0.0, 1.0)) == doctest::Approx(0.9 * 0.4).epsilon(1e-9));
  CHECK(pred.density(obs(1.0, std::nullopt)) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("two-cluster hand evaluation of the predictive") {
  const auto pd = two_by_two({0.6, 0.4}, {{0.7, 0.3}, {0.2, 0.8}}, {{0.5, 0.5}, {0.1, 0.9}});
  const Predictor pred(pd, 1e-9);
  // y = (0, 1): sum_h lambda_h (sum_k psi1 K1)(sum_k psi2 K2).
  const double h0 = (0.7 * 0.9 + 0.3 * 0.2) * (0.5 * 0.4 + 0.5 * 0.7);
  const double h1 = (0.2 * 0.9 + 0.8 * 0.2) * (0.1 * 0.4 + 0.9 * 0.7);
  CHECK(pred.density(obs(0.0, 1.0)) == doctest::Approx(0.6 * h0 + 0.4 * h1).epsilon(1e-9));
}

TEST_CASE("conditional prediction follows Bayes rule on a finite mixture") {
  const auto pd = two_by_two({0.6, 0.4}, {{0.7, 0.3}, {0.2, 0.8}}, {{0.5, 0.5}, {0.1, 0.9}});
  const Predictor pred(pd, 1e-9);
  const auto c = pred.conditional(obs(std::nullopt, 1.0), 0);
  // P(A = a, B = 1) by enumeration.
  double joint[2] = {0.0, 0.0};
  const double lam[2] = {0.6, 0.4};
  const double r1[2][2] = {{0.7, 0.3}, {0.2, 0.8}}, r2[2][2] = {{0.5, 0.5}, {0.1, 0.9}};
  const double k1[2][2] = {{0.9, 0.1}, {0.2, 0.8}}, k2[2][2] = {{0.6, 0.4}, {0.3, 0.7}};
  for (int a = 0; a < 2; ++a) {
    for (int h = 0; h < 2; ++h) {
      double pa = 0.0, pb = 0.0;
      for (int k = 0; k < 2; ++k) {
        pa += r1[h][k] * k1[k][a];
        pb += r2[h][k] * k2[k][1];
      }
      joint[a] += lam[h] * pa * pb;
    }
  }
  REQUIRE(c.probs.size() == 2);
  CHECK(c.probs[0] == doctest::Approx(joint[0] / (joint[0] + joint[1])).epsilon(1e-9));
  CHECK(c.probs[1] == doctest::Approx(joint[1] / (joint[0] + joint[1])).epsilon(1e-9));
  CHECK(c.point[0] == (joint[1] > joint[0] ? 1.0 : 0.0));
  CHECK(c.kind == ComponentKind::categorical);
  const double y1[1] = {1.0};
  CHECK(std::exp(pred.log_density(c, y1)) == doctest::Approx(c.probs[1]).epsilon(1e-9));
}

TEST_CASE("rank-one tensor makes the conditional equal the marginal") {
  const auto pd = two_by_two({1.0}, {{0.7, 0.3}}, {{0.5, 0.5}});
  const Predictor pred(pd, 1e-9);
  const auto marginal = pred.conditional(obs(std::nullopt, std::nullopt), 0);
  for (double b : {0.0, 1.0}) {
    const auto c = pred.conditional(obs(std::nullopt, b), 0);
    for (std::size_t a = 0; a < 2; ++a) {
      CHECK(c.probs[a] == doctest::Approx(marginal.probs[a]).epsilon(1e-12));
    }
  }
}

TEST_CASE("uninformative observed components leave the marginal") {
  // Both atoms of B share one pmf, so observing B carries no information.
  auto pd = two_by_two({0.6, 0.4}, {{0.7, 0.3}, {0.2, 0.8}}, {{0.5, 0.5}, {0.1, 0.9}});
  pd.draws[0].theta[1] = {CategoricalAtom{{0.4, 0.6}}, CategoricalAtom{{0.4, 0.6}}};
  const Predictor pred(pd, 1e-9);
  const auto marginal = pred.conditional(obs(std::nullopt, std::nullopt), 0);
  const auto c = pred.conditional(obs(std::nullopt, 0.0), 0);
  CHECK(c.probs[0] == doctest::Approx(marginal.probs[0]).epsilon(1e-12));
}

TEST_CASE("categorical predictive sums to one over all cells") {
  Rng rng(1);
  const auto ds = test::random_categorical(20, {3, 2, 2}, rng);
  for (auto model : {ModelKind::itf, ModelKind::dpm}) {
    const auto pd = fitted_draws(model, ds, 100, rng);
    for (double eps : {1e-2, 1e-4}) {
      const Predictor pred(pd, eps, 3);
      double total = 0.0;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 2; ++b) {
          for (int c = 0; c < 2; ++c) {
            PartialObservation y{std::vector<double>{double(a)}, std::vector<double>{double(b)},
                                 std::vector<double>{double(c)}};
            total += pred.density(y);
          }
        }
      }
      CHECK(total <= 1.0 + 1e-12);
      CHECK(total >= 1.0 - 3.0 * eps);
      const auto cond = pred.conditional({std::nullopt, std::vector<double>{1.0}, std::nullopt}, 0);
      double s = 0.0;
      for (double p : cond.probs) s += p;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("real-valued predictive integrates to one") {
  MixedDataset ds({ComponentSpec::real("R", 1), ComponentSpec::categorical("C", 2)}, 20);
  Rng rng(2);
  for (std::size_t i = 0; i < 20; ++i) {
    const double v[1] = {normal(rng, i % 2 ? 3.0 : -3.0)};
    ds.set_cell(i, 0, v);
    ds.set_category(i, 1, static_cast<int>(i % 2));
  }
  const auto pd = fitted_draws(ModelKind::itf, ds, 60, rng);
  const Predictor pred(pd, 1e-6);
  const int steps = 20000;
  const double lo = -40.0, hi = 40.0, h = (hi - lo) / steps;
  double total = 0.0;
  for (int t = 0; t <= steps; ++t) {
    PartialObservation y{std::vector<double>{lo + t * h}, std::nullopt};
    total += (t == 0 || t == steps ? 0.5 : 1.0) * pred.density(y);
  }
  CHECK(total * h == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("joint DPM predictive uses one shared index") {
  PosteriorDraws pd;
  pd.header.model = ModelKind::dpm;
  pd.header.kernels = {cat_kernel(2), cat_kernel(2)};
  Draw d;
  d.lambda = exact_weights({0.3, 0.7});
  d.theta = {{CategoricalAtom{{0.9, 0.1}}, CategoricalAtom{{0.2, 0.8}}},
             {CategoricalAtom{{0.6, 0.4}}, CategoricalAtom{{0.3, 0.7}}}};
  d.c0 = {0};
  pd.draws.push_back(d);
  const Predictor pred(pd, 1e-9);
  CHECK(pred.density(obs(0.0, 1.0)) == doctest::Approx(0.3 * 0.9 * 0.4 + 0.7 * 0.2 * 0.7).epsilon(1e-9));
  CHECK(pred.density(obs(1.0, std::nullopt)) == doctest::Approx(0.3 * 0.1 + 0.7 * 0.8).epsilon(1e-9));
}

TEST_CASE("predictor argument errors") {
  const auto pd = two_by_two({1.0}, {{1.0}}, {{1.0}});
  CHECK_THROWS_AS(Predictor(pd, 0.0), std::domain_error);
  CHECK_THROWS_AS(Predictor(pd, -1.0), std::domain_error);
  const Predictor pred(pd, 1e-6);
  CHECK_THROWS_AS(pred.conditional(obs(1.0, std::nullopt), 0), std::invalid_argument);
  CHECK_THROWS_AS(pred.density(PartialObservation(3)), std::invalid_argument);
  PosteriorDraws empty;
  empty.header = pd.header;
  CHECK_THROWS_AS(Predictor(empty, 1e-4), std::invalid_argument);
}

TEST_CASE("divergence of deterministic distinct rows is log 2") {
  const std::vector<double> lambda{0.5, 0.5};
  const std::vector<std::vector<double>> r1{{1.0, 0.0}, {0.0, 1.0}};
  const std::vector<std::vector<double>> r2{{0.0, 1.0}, {1.0, 0.0}};
  CHECK(joint_divergence(lambda, r1, r2) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("identical rows or a single cluster give zero divergence") {
  Rng rng(3);
  const std::vector<std::vector<double>> r1{{0.2, 0.8}, {0.9, 0.1}, {0.5, 0.5}};
  const std::vector<std::vector<double>> same{{0.3, 0.6, 0.1}, {0.3, 0.6, 0.1}, {0.3, 0.6, 0.1}};
  CHECK(joint_divergence(std::vector<double>{0.2, 0.5, 0.3}, r1, same) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK(joint_divergence(std::vector<double>{1.0}, r1, same) == doctest::Approx(0.0));
}

TEST_CASE("divergence is symmetric and nonnegative on fitted draws") {
  Rng rng(4);
  const auto ds = test::mixed_toy(30, rng);
  const auto pd = fitted_draws(ModelKind::itf, ds, 100, rng);
  for (const auto& d : pd.draws) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a + 1; b < 3; ++b) {
        const double ab = draw_divergence(d, ModelKind::itf, a, b);
        CHECK(ab == draw_divergence(d, ModelKind::itf, b, a));
        CHECK(ab >= 0.0);
      }
    }
  }
  const auto r12 = dependence_statistic(pd, 0, 2, {50, 0.95, 1});
  const auto r21 = dependence_statistic(pd, 2, 0, {50, 0.95, 1});
  CHECK(r12.statistic == r21.statistic);
  CHECK(r12.threshold == r21.threshold);
  CHECK(r12.null_quantiles.size() == 4);
  CHECK(r12.p_value > 0.0);
  CHECK(r12.p_value <= 1.0);
  CHECK_THROWS_AS(dependence_statistic(pd, 1, 1), std::invalid_argument);
}

TEST_CASE("single top cluster in every draw gives I = 0") {
  Rng rng(5);
  const auto ds = test::random_categorical(15, {3, 2}, rng);
  PosteriorDraws pd;
  pd.header.model = ModelKind::itf;
  pd.header.kernels = default_kernels(ds);
  ItfSampler s(ds, pd.header.kernels);
  s.initialize(rng);
  for (int t = 0; t < 20; ++t) {
    s.update_beta(rng);
    s.update_psi(rng);
    s.update_u1(rng);
    s.update_cj(rng);
    s.collect_garbage(rng);
    s.update_theta(rng);
    REQUIRE(s.counts().occupied_top().size() == 1);
    auto d = snapshot(s, t, 0);
    // Keep only the occupied top cluster.
    d.lambda = StickMeasure(1.0, {kOne});
    d.psi.resize(1);
    pd.draws.push_back(d);
  }
  const auto r = dependence_statistic(pd, 0, 1, {100, 0.95, 2});
  CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(r.dependent);
}

TEST_CASE("joint DPM draws are structurally dependent") {
  Rng rng(6);
  const auto ds = test::mixed_toy(30, rng);
  const auto pd = fitted_draws(ModelKind::dpm, ds, 100, rng);
  const auto r = dependence_statistic(pd, 0, 1, {100, 0.95, 3});
  CHECK(r.statistic > 0.0);
  CHECK(r.dependent);
}

TEST_CASE("co-clustering matrix properties") {
  Rng rng(7);
  const auto ds = test::mixed_toy(20, rng);
  const auto pd = fitted_draws(ModelKind::itf, ds, 60, rng);
  for (std::optional<std::size_t> level : {std::optional<std::size_t>{}, std::optional<std::size_t>{1}}) {
    const auto m = coclustering_matrix(pd, level);
    REQUIRE(m.size() == 400);
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(m[i * 20 + i] == 1.0);
      for (std::size_t k = 0; k < 20; ++k) {
        CHECK(m[i * 20 + k] == m[k * 20 + i]);
        CHECK(m[i * 20 + k] >= 0.0);
        CHECK(m[i * 20 + k] <= 1.0);
      }
    }
  }
  PosteriorDraws one = pd;
  one.draws.resize(1);
  for (double v : coclustering_matrix(one, std::nullopt)) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("hold-out predictions align with the answer key") {
  Rng rng(8);
  const auto ds = test::mixed_toy(30, rng);
  const auto h = apply_holdout(ds, {{"C", 5}, {"R", 5}}, rng);
  PosteriorDraws pd;
  pd.header.model = ModelKind::itf;
  pd.header.kernels = default_kernels(h.masked);
  ItfSampler s(h.masked, pd.header.kernels);
  s.initialize(rng);
  for (int t = 0; t < 50; ++t) {
    s.sweep(rng);
    pd.draws.push_back(snapshot(s, t, 0));
  }
  const Predictor pred(pd);
  const auto guesses = predict_holdouts(pred, h.masked, h.answers);
  for (const auto& [name, truth] : h.answers) {
    CHECK(guesses.at(name).rows == truth.rows);
    const auto kind = ds.component(ds.index_of(name)).kind;
    CHECK(std::isfinite(score_predictions(truth, guesses.at(name), kind)));
  }
}
