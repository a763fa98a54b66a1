// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/simgen.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json_io.hpp"

namespace itf {

using detail::json;

namespace {

std::size_t draw_from(Rng& rng, const std::vector<double>& probs) {
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  double u = uniform01(rng) * total;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    if (u < probs[k]) return k;
    u -= probs[k];
  }
  return probs.size() - 1;
}

void check_table(const std::vector<double>& t, std::size_t levels, const char* what) {
  if (t.size() != levels) throw std::invalid_argument(std::string(what) + ": wrong width");
  double s = 0.0;
  for (double v : t) {
    if (v < 0.0) throw std::invalid_argument(std::string(what) + ": negative entry");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + ": entries must sum to 1");
  }
}

std::vector<double> draw_series(const SeriesCluster& c, std::size_t len, Rng& rng) {
  std::vector<double> y(len);
  double prev = normal(rng, c.mean, c.sd / std::sqrt(1.0 - c.coef * c.coef));
  for (auto& v : y) {
    v = c.mean + c.coef * (prev - c.mean) + normal(rng, 0.0, c.sd);
    prev = v;
  }
  return y;
}

// Follows `label` with probability `coupling`, else a uniform other label.
std::size_t coupled(std::size_t label, std::size_t k, double coupling, Rng& rng) {
  if (k < 2 || uniform01(rng) < coupling) return label;
  std::size_t other = uniform_index(rng, k - 1);
  if (other >= label) ++other;
  return other;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& tested_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs{
      {"C1", "T"}, {"C2", "T"}, {"C3", "T"}, {"C2", "R"}};
  return pairs;
}

ScenarioSpec default_scenario(int scenario, std::size_t n, std::uint64_t seed) {
  ScenarioSpec s;
  s.scenario = scenario;
  s.n = n;
  s.seed = seed;
  if (scenario == 1) {
    s.weights = {0.5, 0.5};
    s.series = {{-1.0, 0.3, 1.0}, {1.0, 0.8, 1.0}};
    s.real_means = {{-1.0, -1.0, -1.0, -1.0}, {1.0, 1.0, 1.0, 1.0}};
    s.c1_tables = {{0.6, 0.3, 0.1}, {0.1, 0.3, 0.6}};
    s.c2_tables = {{0.85, 0.15}, {0.15, 0.85}};
    s.c3_tables = s.c2_tables;
  } else if (scenario == 2) {
    s.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    s.pair_weights = {0.5, 0.5};
    s.coupling = 0.6;
    s.series = {{-1.5, 0.3, 1.0}, {1.5, 0.8, 1.0}, {0.0, 0.5, 1.0}};
    s.real_means = {{-2.0, -2.0, -2.0, -2.0}, {2.0, 2.0, 2.0, 2.0}, {0.0, 0.0, 0.0, 0.0}};
    s.c1_tables = {{0.7, 0.2, 0.1}, {0.1, 0.7, 0.2}, {0.2, 0.1, 0.7}};
    s.c2_tables = {{0.85, 0.15}, {0.15, 0.85}};
    s.c3_tables = s.c2_tables;
  } else {
    throw std::invalid_argument("scenario must be 1 or 2");
  }
  return s;
}

void validate(const ScenarioSpec& s) {
  if (s.scenario != 1 && s.scenario != 2) {
    throw std::invalid_argument("scenario must be 1 or 2");
  }
  if (s.n == 0) throw std::invalid_argument("scenario: n must be positive");
  if (s.series_length == 0) throw std::invalid_argument("scenario: empty series");
  const std::size_t k = s.weights.size();
  if (k == 0) throw std::invalid_argument("scenario: no clusters");
  check_table(s.weights, k, "weights");
  if (s.series.size() != k || s.real_means.size() != k || s.c1_tables.size() != k) {
    throw std::invalid_argument("scenario: one T, R and C1 cluster per weight");
  }
  for (const auto& c : s.series) {
    if (!(std::abs(c.coef) < 1.0) || !(c.sd > 0.0)) {
      throw std::invalid_argument("scenario: series clusters need |coef| < 1, sd > 0");
    }
  }
  const std::size_t dim = s.real_means.front().size();
  for (const auto& m : s.real_means) {
    if (m.size() != dim || dim == 0) throw std::invalid_argument("scenario: ragged R means");
  }
  if (!(s.real_sd > 0.0)) throw std::invalid_argument("scenario: real_sd must be positive");
  const std::size_t c1_levels = s.c1_tables.front().size();
  for (const auto& t : s.c1_tables) check_table(t, c1_levels, "C1 table");
  const std::size_t kb = s.scenario == 1 ? k : s.pair_weights.size();
  if (s.scenario == 2) {
    check_table(s.pair_weights, kb, "pair weights");
    if (!(s.coupling >= 0.0 && s.coupling <= 1.0)) {
      throw std::invalid_argument("scenario: coupling must lie in [0, 1]");
    }
  }
  if (s.c2_tables.size() != kb || s.c3_tables.size() != kb) {
    throw std::invalid_argument("scenario: C2/C3 tables do not match their clusters");
  }
  for (const auto& t : s.c2_tables) check_table(t, s.c2_tables.front().size(), "C2 table");
  for (const auto& t : s.c3_tables) check_table(t, s.c3_tables.front().size(), "C3 table");
}

GeneratedData generate(const ScenarioSpec& s, Rng& rng) {
  validate(s);
  const std::size_t k = s.weights.size();
  std::vector<ComponentSpec> specs{
      ComponentSpec::series("T", s.series_length),
      ComponentSpec::real("R", s.real_means.front().size()),
      ComponentSpec::categorical("C1", s.c1_tables.front().size()),
      ComponentSpec::categorical("C2", s.c2_tables.front().size()),
      ComponentSpec::categorical("C3", s.c3_tables.front().size())};
  GeneratedData g{MixedDataset(specs, s.n), {}, {}};
  std::vector<std::size_t> a(s.n), ar(s.n), ac(s.n), b(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    a[i] = draw_from(rng, s.weights);
    if (s.scenario == 1) {
      ar[i] = ac[i] = b[i] = a[i];
    } else {
      ar[i] = coupled(a[i], k, s.coupling, rng);
      ac[i] = coupled(a[i], k, s.coupling, rng);
      b[i] = draw_from(rng, s.pair_weights);
    }
    g.data.set_cell(i, 0, draw_series(s.series[a[i]], s.series_length, rng));
    std::vector<double> r(s.real_means[ar[i]]);
    for (double& v : r) v += normal(rng, 0.0, s.real_sd);
    g.data.set_cell(i, 1, r);
    g.data.set_category(i, 2, static_cast<int>(draw_from(rng, s.c1_tables[ac[i]])));
    g.data.set_category(i, 3, static_cast<int>(draw_from(rng, s.c2_tables[b[i]])));
    g.data.set_category(i, 4, static_cast<int>(draw_from(rng, s.c3_tables[b[i]])));
  }
  if (s.scenario == 1) {
    g.labels["g"] = a;
    g.truth = {{"C1-T", true}, {"C2-T", true}, {"C3-T", true}, {"C2-R", true}};
  } else {
    g.labels["a"] = a;
    g.labels["a_R"] = ar;
    g.labels["a_C1"] = ac;
    g.labels["b"] = b;
    g.truth = {{"C1-T", true}, {"C2-T", false}, {"C3-T", false}, {"C2-R", false}};
  }
  return g;
}

GeneratedData generate(const ScenarioSpec& spec) {
  Rng rng(spec.seed);
  return generate(spec, rng);
}

std::string scenario_to_json(const ScenarioSpec& s) {
  json series = json::array();
  for (const auto& c : s.series) {
    series.push_back({{"mean", c.mean}, {"coef", c.coef}, {"sd", c.sd}});
  }
  const json j{{"scenario", s.scenario},
               {"n", s.n},
               {"series_length", s.series_length},
               {"seed", s.seed},
               {"weights", s.weights},
               {"pair_weights", s.pair_weights},
               {"coupling", s.coupling},
               {"series", series},
               {"real_means", s.real_means},
               {"real_sd", s.real_sd},
               {"c1_tables", s.c1_tables},
               {"c2_tables", s.c2_tables},
               {"c3_tables", s.c3_tables}};
  return j.dump(2);
}

ScenarioSpec scenario_from_json(const std::string& text) {
  const json j = json::parse(text);
  ScenarioSpec s = default_scenario(j.at("scenario").get<int>());
  s.n = j.value("n", s.n);
  s.series_length = j.value("series_length", s.series_length);
  s.seed = j.value("seed", s.seed);
  s.weights = j.value("weights", s.weights);
  s.pair_weights = j.value("pair_weights", s.pair_weights);
  s.coupling = j.value("coupling", s.coupling);
  if (j.contains("series")) {
    s.series.clear();
    for (const auto& c : j.at("series")) {
      s.series.push_back({c.at("mean").get<double>(), c.at("coef").get<double>(),
                          c.at("sd").get<double>()});
    }
  }
  s.real_means = j.value("real_means", s.real_means);
  s.real_sd = j.value("real_sd", s.real_sd);
  s.c1_tables = j.value("c1_tables", s.c1_tables);
  s.c2_tables = j.value("c2_tables", s.c2_tables);
  s.c3_tables = j.value("c3_tables", s.c3_tables);
  validate(s);
  return s;
}

std::string truth_to_json(const GeneratedData& g) {
  return json{{"labels", g.labels}, {"dependence", g.truth}}.dump(2);
}

}  // namespace itf
