// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "itf/kernels.hpp"
#include "support.hpp"

using namespace itf;

namespace {

Kernel gaussian1(double m0 = 0.0, double kappa = 1.0, double shape = 2.0,
                 double scale = 1.0) {
  return Kernel(GaussianDiagPrior{{m0}, kappa, shape, {scale}});
}

Kernel categorical(std::size_t k, double a = 1.0) {
  return Kernel(CategoricalPrior{std::vector<double>(k, a)});
}

Ar1Prior ar1_prior(std::size_t len) {
  Ar1Prior p;
  p.length = len;
  p.level_mean = 0.5;
  p.level_scale = 2.0;
  p.coef_mean = 0.2;
  p.coef_scale = 0.8;
  p.shape = 3.0;
  p.scale = 1.5;
  p.presample = 0.1;
  return p;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("categorical uniform pmf") {
  const auto k = categorical(4);
  const Atom a = CategoricalAtom{{0.25, 0.25, 0.25, 0.25}};
  for (double y : {0.0, 1.0, 2.0, 3.0}) {
    const double v[1] = {y};
    CHECK(k.log_density(a, v) == doctest::Approx(std::log(0.25)));
  }
}

TEST_CASE("categorical pmf sums to one") {
  Rng rng(1);
  const auto k = categorical(5, 0.7);
  for (int rep = 0; rep < 50; ++rep) {
    const Atom a = k.prior_draw(rng);
    double s = 0.0;
    for (int l = 0; l < 5; ++l) {
      const double v[1] = {static_cast<double>(l)};
      s += std::exp(k.log_density(a, v));
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("standard normal density at the mode") {
  const auto k = gaussian1();
  const Atom a = GaussianAtom{{0.0}, {1.0}};
  const double y[1] = {0.0};
  CHECK(k.log_density(a, y) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
}

TEST_CASE("gaussian density integrates to one") {
  const auto k = gaussian1();
  for (auto [m, v] : {std::pair{0.0, 1.0}, std::pair{3.0, 0.25}, std::pair{-2.0, 9.0}}) {
    const Atom a = GaussianAtom{{m}, {v}};
    const double lo = m - 20.0 * std::sqrt(v), hi = m + 20.0 * std::sqrt(v);
    const int steps = 200000;
    const double h = (hi - lo) / steps;
    double s = 0.0;
    for (int t = 0; t <= steps; ++t) {
      const double y[1] = {lo + t * h};
      s += (t == 0 || t == steps ? 0.5 : 1.0) * std::exp(k.log_density(a, y));
    }
    CHECK(s * h == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("ar1 with zero coefficient is an iid gaussian series") {
  const Kernel k(ar1_prior(4));
  const Atom a = Ar1Atom{0.7, 0.0, 2.0};
  const std::vector<double> y{0.3, -1.0, 2.5, 0.9};
  const auto g = gaussian1();
  double iid = 0.0;
  for (double yt : y) {
    const double v[1] = {yt};
    iid += g.log_density(GaussianAtom{{0.7}, {2.0}}, v);
  }
  CHECK(k.log_density(a, y) == doctest::Approx(iid).epsilon(1e-12));
}

TEST_CASE("ar1 mean path follows the recursion") {
  const Kernel k(ar1_prior(3));
  const auto m = k.mean(Ar1Atom{1.0, 0.5, 1.0});
  REQUIRE(m.size() == 3);
  CHECK(m[0] == doctest::Approx(1.0 + 0.5 * 0.1));
  CHECK(m[1] == doctest::Approx(1.0 + 0.5 * m[0]));
  CHECK(m[2] == doctest::Approx(1.0 + 0.5 * m[1]));
}

TEST_CASE("domain mismatches are rejected") {
  const auto c = categorical(3);
  const Atom ca = CategoricalAtom{{0.2, 0.3, 0.5}};
  const double bad[1] = {3.0}, frac[1] = {0.5}, two[2] = {0.0, 1.0};
  CHECK_THROWS_AS(c.log_density(ca, bad), std::invalid_argument);
  CHECK_THROWS_AS(c.log_density(ca, frac), std::invalid_argument);
  CHECK_THROWS_AS(c.log_density(ca, two), std::invalid_argument);
  const auto g = gaussian1();
  CHECK_THROWS_AS(g.log_density(GaussianAtom{{0.0}, {1.0}}, two), std::invalid_argument);
  CHECK_THROWS_AS(Kernel(CategoricalPrior{{1.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Kernel(GaussianDiagPrior{{0.0}, 1.0, 2.0, {-1.0}}), std::invalid_argument);
}

TEST_CASE("symmetric Dirichlet prior draws have uniform mean") {
  Rng rng(2);
  const auto k = categorical(4);
  std::vector<double> s(4, 0.0);
  const int draws = 20000;
  for (int t = 0; t < draws; ++t) {
    const auto a = std::get<CategoricalAtom>(k.prior_draw(rng));
    for (int l = 0; l < 4; ++l) s[l] += a.prob[l];
  }
  // Var of a Dirichlet(1,1,1,1) coordinate is 3/80.
  const double se = std::sqrt(3.0 / 80.0 / draws);
  for (double x : s) CHECK(std::abs(x / draws - 0.25) < 4.0 * se);
}

TEST_CASE("gaussian prior draws centre on the prior mean") {
  Rng rng(3);
  const auto k = gaussian1(1.7, 2.0, 3.0, 2.0);
  std::vector<double> m;
  for (int t = 0; t < 20000; ++t) m.push_back(std::get<GaussianAtom>(k.prior_draw(rng)).mean[0]);
  // Marginal variance of the mean: E[var]/kappa = (scale/(shape-1))/kappa.
  const double se = std::sqrt(1.0 / 2.0 / m.size());
  CHECK(std::abs(test::mean(m) - 1.7) < 4.0 * se);
}

TEST_CASE("ar1 draws are stationary even under a wide prior") {
  Rng rng(4);
  auto p = ar1_prior(6);
  p.coef_mean = 0.9;
  p.coef_scale = 50.0;
  const Kernel k(p);
  for (int t = 0; t < 5000; ++t) {
    const auto a = std::get<Ar1Atom>(k.prior_draw(rng));
    CHECK(std::abs(a.coef) < 1.0);
    CHECK(a.var > 0.0);
  }
}

TEST_CASE("empty-data posterior draw has the prior law") {
  Rng r1(5), r2(6);
  const Kernel k(ar1_prior(3));
  std::vector<double> a, b;
  for (int t = 0; t < 10000; ++t) {
    a.push_back(std::get<Ar1Atom>(k.prior_draw(r1)).coef);
    b.push_back(std::get<Ar1Atom>(k.posterior_draw(k.empty_stats(), r2)).coef);
  }
  // 0.1% critical value of the two-sample KS statistic at these sizes.
  CHECK(ks(a, b) < 1.95 * std::sqrt(2.0 / 10000.0));
}

TEST_CASE("Dirichlet posterior mean is prior plus counts") {
  Rng rng(7);
  const Kernel k(CategoricalPrior{{1.0, 2.0, 0.5}});
  auto s = k.empty_stats();
  for (double y : {0.0, 0.0, 1.0, 2.0, 0.0, 1.0}) {
    const double v[1] = {y};
    k.add(s, v);
  }
  std::vector<double> m(3, 0.0);
  const int draws = 40000;
  for (int t = 0; t < draws; ++t) {
    const auto a = std::get<CategoricalAtom>(k.posterior_draw(s, rng));
    for (int l = 0; l < 3; ++l) m[l] += a.prob[l];
  }
  const double expect[3] = {4.0 / 9.5, 4.0 / 9.5, 1.5 / 9.5};
  for (int l = 0; l < 3; ++l) CHECK(m[l] / draws == doctest::Approx(expect[l]).epsilon(0.01));
}

TEST_CASE("gaussian posterior matches an importance-sampling oracle") {
  // Prior draws weighted by the likelihood approximate the posterior mean
  // of (mean, var) without using the conjugate formulas.
  const auto k = gaussian1(0.5, 0.5, 3.0, 2.0);
  const std::vector<double> ys{1.2, 2.3, 0.7, 1.9, 1.4};
  auto s = k.empty_stats();
  for (double y : ys) {
    const double v[1] = {y};
    k.add(s, v);
  }
  std::mt19937_64 eng(8);
  std::gamma_distribution<double> ga(3.0, 1.0 / 2.0);
  std::normal_distribution<double> z;
  double wsum = 0.0, wm = 0.0, wv = 0.0;
  for (int t = 0; t < 400000; ++t) {
    const double var = 1.0 / ga(eng);
    const double mu = 0.5 + std::sqrt(var / 0.5) * z(eng);
    double ll = 0.0;
    for (double y : ys) ll -= 0.5 * (std::log(var) + (y - mu) * (y - mu) / var);
    const double w = std::exp(ll);
    wsum += w;
    wm += w * mu;
    wv += w * var;
  }
  Rng rng(9);
  std::vector<double> mu, var;
  for (int t = 0; t < 100000; ++t) {
    const auto a = std::get<GaussianAtom>(k.posterior_draw(s, rng));
    mu.push_back(a.mean[0]);
    var.push_back(a.var[0]);
  }
  CHECK(test::mean(mu) == doctest::Approx(wm / wsum).epsilon(0.01));
  CHECK(test::mean(var) == doctest::Approx(wv / wsum).epsilon(0.02));
}

TEST_CASE("truncated ar1 posterior matches an importance-sampling oracle") {
  const auto p = ar1_prior(8);
  const Kernel k(p);
  const std::vector<double> y{0.4, 1.1, 1.6, 0.9, 1.8, 2.2, 1.5, 1.9};
  auto s = k.empty_stats();
  k.add(s, y);
  std::mt19937_64 eng(10);
  std::gamma_distribution<double> ga(p.shape, 1.0 / p.scale);
  std::normal_distribution<double> z;
  double wsum = 0.0, wc = 0.0, wl = 0.0;
  for (int t = 0; t < 400000; ++t) {
    const double var = 1.0 / ga(eng);
    const double level = p.level_mean + std::sqrt(var * p.level_scale) * z(eng);
    const double coef = p.coef_mean + std::sqrt(var * p.coef_scale) * z(eng);
    if (std::abs(coef) >= 1.0) continue;
    double ll = 0.0, prev = p.presample;
    for (double yt : y) {
      const double r = yt - level - coef * prev;
      ll -= 0.5 * (std::log(var) + r * r / var);
      prev = yt;
    }
    const double w = std::exp(ll);
    wsum += w;
    wc += w * coef;
    wl += w * level;
  }
  Rng rng(11);
  std::vector<double> coef, level;
  for (int t = 0; t < 100000; ++t) {
    const auto a = std::get<Ar1Atom>(k.posterior_draw(s, rng));
    coef.push_back(a.coef);
    level.push_back(a.level);
  }
  CHECK(test::mean(coef) == doctest::Approx(wc / wsum).epsilon(0.02));
  CHECK(test::mean(level) == doctest::Approx(wl / wsum).epsilon(0.02));
}

TEST_CASE("default kernels follow the data scale") {
  Rng rng(12);
  const auto ds = test::mixed_toy(40, rng);
  const auto ks = default_kernels(ds);
  REQUIRE(ks.size() == 3);
  CHECK(ks[0].kind() == ComponentKind::real);
  CHECK(ks[0].width() == 2);
  CHECK(ks[1].kind() == ComponentKind::categorical);
  CHECK(ks[2].kind() == ComponentKind::series);
  CHECK(ks[2].width() == 5);
  const auto& g = std::get<GaussianDiagPrior>(ks[0].prior());
  double s = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) s += ds.cell(i, 0)[0];
  CHECK(g.mean[0] == doctest::Approx(s / 40.0));
  CHECK(std::get<CategoricalPrior>(ks[1].prior()).concentration ==
        std::vector<double>{1.0, 1.0, 1.0});
  for (std::size_t j = 0; j < 3; ++j) CHECK_NOTHROW(check_kernel_matches(ks[j], ds.component(j)));
  CHECK_THROWS_AS(check_kernel_matches(ks[0], ds.component(1)), std::invalid_argument);
  CHECK_THROWS_AS(check_kernel_matches(categorical(4), ds.component(1)),
                  std::invalid_argument);
}
