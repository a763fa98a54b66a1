// Apache License, Version 2.0, refer to LICENSE.txt
//
// Command-line front end: simulate, fit, predict, depend, cocluster and
// benchmark.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "itf/dataset.hpp"
#include "itf/draws.hpp"
#include "itf/inference.hpp"
#include "itf/kernels.hpp"
#include "itf/runner.hpp"
#include "itf/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<std::pair<std::string, std::size_t>> parse_holdouts(
    const std::vector<std::string>& items) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw CLI::ValidationError("--holdout", "expected NAME=COUNT, got '" + item + "'");
    }
    out.emplace_back(item.substr(0, eq), std::stoul(item.substr(eq + 1)));
  }
  return out;
}

struct FitFlags {
  std::string config;
  std::string model = "itf";
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  std::size_t thin = 0;
  std::size_t chains = 0;
  std::uint64_t seed = 0;
  double alpha_shape = 0, alpha_rate = 0, beta_shape = 0, beta_rate = 0;
  std::string scheme;
  std::string init;
  std::size_t init_clusters = 0;
  bool no_label_moves = false;
};

void add_fit_flags(CLI::App* sub, FitFlags& f, bool with_model) {
  sub->add_option("--config", f.config, "JSON run configuration; flags override it")
      ->check(CLI::ExistingFile);
  if (with_model) {
    sub->add_option("--model", f.model, "itf or dpm")
        ->check(CLI::IsMember({"itf", "dpm"}));
  }
  sub->add_option("--iterations", f.iterations, "sweeps per chain, burn-in included");
  sub->add_option("--burn-in", f.burn_in, "discarded initial sweeps");
  sub->add_option("--thin", f.thin, "keep every k-th sweep after burn-in");
  sub->add_option("--chains", f.chains, "independent chains run in parallel");
  sub->add_option("--seed", f.seed, "64-bit seed");
  sub->add_option("--alpha-shape", f.alpha_shape, "Gamma prior shape of alpha");
  sub->add_option("--alpha-rate", f.alpha_rate, "Gamma prior rate of alpha");
  sub->add_option("--beta-shape", f.beta_shape, "Gamma prior shape of beta");
  sub->add_option("--beta-rate", f.beta_rate, "Gamma prior rate of beta");
  sub->add_option("--scheme", f.scheme, "concentration update: labeled or exchangeable")
      ->check(CLI::IsMember({"labeled", "exchangeable"}));
  sub->add_option("--init", f.init, "initial partition: single or random")
      ->check(CLI::IsMember({"single", "random"}));
  sub->add_option("--init-clusters", f.init_clusters, "labels used by random init");
  sub->add_flag("--no-label-moves", f.no_label_moves, "disable label-switching moves");
}

itf::RunConfig build_run_config(const CLI::App* sub, const FitFlags& f,
                                itf::RunConfig base = {}) {
  itf::RunConfig c = base;
  if (!f.config.empty()) c = itf::run_config_from_json(slurp(f.config), c);
  auto given = [&](const char* name) {
    const auto* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--model")) c.model = itf::parse_model_kind(f.model);
  if (given("--iterations")) c.iterations = f.iterations;
  if (given("--burn-in")) c.burn_in = f.burn_in;
  if (given("--thin")) c.thin = f.thin;
  if (given("--chains")) c.chains = f.chains;
  if (given("--seed")) c.seed = f.seed;
  if (given("--alpha-shape")) c.sampler.alpha_prior.shape = f.alpha_shape;
  if (given("--alpha-rate")) c.sampler.alpha_prior.rate = f.alpha_rate;
  if (given("--beta-shape")) c.sampler.beta_prior.shape = f.beta_shape;
  if (given("--beta-rate")) c.sampler.beta_prior.rate = f.beta_rate;
  if (given("--scheme")) {
    c.sampler.scheme = f.scheme == "labeled" ? itf::ConcentrationScheme::labeled
                                             : itf::ConcentrationScheme::exchangeable;
  }
  if (given("--init")) {
    c.sampler.init = f.init == "random" ? itf::InitMode::random : itf::InitMode::single;
  }
  if (given("--init-clusters")) c.sampler.init_clusters = f.init_clusters;
  if (f.no_label_moves) c.sampler.label_moves = false;
  for (const auto* g : {&c.sampler.alpha_prior, &c.sampler.beta_prior}) {
    if (!(g->shape > 0) || !(g->rate > 0)) {
      throw CLI::ValidationError("hyperprior", "Gamma shape and rate must be positive");
    }
  }
  if (c.iterations == 0) throw CLI::ValidationError("--iterations", "must be positive");
  itf::validate(c);
  return c;
}

// Overrides default kernels from {"NAME": {family...}, ...}.
std::vector<itf::Kernel> load_kernels(const itf::MixedDataset& ds, const std::string& path) {
  auto kernels = itf::default_kernels(ds);
  if (path.empty()) return kernels;
  const json j = json::parse(slurp(path));
  for (const auto& [name, prior] : j.items()) {
    const std::size_t idx = ds.index_of(name);
    kernels[idx] = itf::kernel_from_json(prior.dump());
    itf::check_kernel_matches(kernels[idx], ds.component(idx));
  }
  return kernels;
}

std::size_t component_index(const itf::PosteriorDraws& d, const std::string& name) {
  const auto& names = d.header.components;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return j;
  }
  throw std::invalid_argument("draws have no component named '" + name + "'");
}

std::string join(const std::vector<double>& v, char sep) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out << sep;
    out << v[k];
  }
  return out.str();
}

// ---- subcommands ------------------------------------------------------------

struct SimulateArgs {
  int scenario = 1;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::string spec;
  std::vector<std::string> holdouts;
  std::uint64_t holdout_seed = 11;
};

int cmd_simulate(const SimulateArgs& a, const CLI::App* sub) {
  itf::ScenarioSpec spec = itf::default_scenario(a.scenario, a.n, a.seed);
  if (!a.spec.empty()) {
    spec = itf::scenario_from_json(slurp(a.spec));
    if (sub->count("--scenario")) spec.scenario = a.scenario;
    if (sub->count("--n")) spec.n = a.n;
    if (sub->count("--seed")) spec.seed = a.seed;
  }
  const auto g = itf::generate(spec);
  const fs::path dir = a.out;
  fs::create_directories(dir);
  const auto schema = itf::save_dataset(g.data, dir);
  emit((dir / "truth.json").string(), itf::truth_to_json(g) + "\n");
  emit((dir / "scenario.json").string(), itf::scenario_to_json(spec) + "\n");
  std::cout << schema.string() << '\n';
  if (!a.holdouts.empty()) {
    itf::Rng rng(a.holdout_seed);
    const auto h = itf::apply_holdout(g.data, parse_holdouts(a.holdouts), rng);
    const auto masked = itf::save_dataset(h.masked, dir / "masked");
    itf::save_answer_key(h.answers, dir / "answers.json");
    std::cout << masked.string() << '\n';
  }
  return 0;
}

struct FitArgs {
  FitFlags flags;
  std::string data;
  std::string kernels;
  std::string out = "draws.jsonl";
  std::string manifest;
  std::string checkpoint;
  std::size_t checkpoint_every = 0;
  bool resume = false;
  std::size_t halt_after = 0;
};

int cmd_fit(const FitArgs& a, const CLI::App* sub, const std::string& command) {
  itf::RunConfig base;
  base.checkpoint = a.checkpoint;
  base.checkpoint_every = a.checkpoint_every;
  base.resume = a.resume;
  base.halt_after = a.halt_after;
  const auto cfg = build_run_config(sub, a.flags, base);
  const auto ds = itf::load_dataset(a.data);
  const auto kernels = load_kernels(ds, a.kernels);
  const auto result = itf::fit(ds, kernels, cfg);
  {
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    itf::write_draws(out, result.draws);
  }
  const std::string manifest = a.manifest.empty() ? a.out + ".manifest.json" : a.manifest;
  itf::write_manifest(manifest, cfg, ds, result, command);
  std::cerr << "fit: " << result.sweeps << " sweeps, " << result.draws.draws.size()
            << " draws in " << result.seconds << " s"
            << (result.completed ? "" : " (halted; resume with --resume)") << '\n';
  return 0;
}

struct PredictArgs {
  std::string data;
  std::string draws;
  std::string answers;
  double epsilon = 1e-4;
  std::uint64_t seed = 1;
  std::string out;
  std::string scores;
};

int cmd_predict(const PredictArgs& a) {
  const auto ds = itf::load_dataset(a.data);
  const auto draws = itf::read_draws(a.draws);
  const itf::Predictor pred(draws, a.epsilon, a.seed);
  itf::AnswerKey targets;
  if (!a.answers.empty()) {
    targets = itf::load_answer_key(a.answers);
  } else {
    for (std::size_t j = 0; j < ds.components(); ++j) {
      auto& t = targets[ds.component(j).name];
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!ds.observed(i, j)) t.rows.push_back(i);
      }
      if (t.rows.empty()) targets.erase(ds.component(j).name);
    }
  }
  std::ostringstream out;
  out << "component,row,prediction,probabilities\n";
  for (const auto& [name, t] : targets) {
    const std::size_t j = ds.index_of(name);
    for (std::size_t i : t.rows) {
      const auto p = pred.conditional(itf::observation_row(ds, i), j);
      out << name << ',' << i << ',' << join(p.point, ';') << ',' << join(p.probs, ';')
          << '\n';
    }
  }
  emit(a.out, out.str());
  if (!a.answers.empty()) {
    const auto guesses = itf::predict_holdouts(pred, ds, targets);
    std::ostringstream sc;
    sc << "component,metric,loss\n";
    for (const auto& [name, truth] : targets) {
      const auto kind = ds.component(ds.index_of(name)).kind;
      sc << name << ','
         << (kind == itf::ComponentKind::categorical ? "misclassification_percent"
                                                     : "relative_predictive_error")
         << ',' << itf::score_predictions(truth, guesses.at(name), kind) << '\n';
    }
    if (a.scores.empty()) {
      std::cerr << sc.str();
    } else {
      emit(a.scores, sc.str());
    }
  }
  return 0;
}

struct DependArgs {
  std::string draws;
  std::vector<std::string> pairs;
  std::size_t replicates = 200;
  double level = 0.95;
  std::uint64_t seed = 7;
  std::string out;
  std::string json_out;
};

int cmd_depend(const DependArgs& a) {
  const auto draws = itf::read_draws(a.draws);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::string> labels;
  const auto& names = draws.header.components;
  if (a.pairs.empty()) {
    for (std::size_t x = 0; x < names.size(); ++x) {
      for (std::size_t y = x + 1; y < names.size(); ++y) {
        pairs.emplace_back(x, y);
        labels.push_back(names[x] + "-" + names[y]);
      }
    }
  } else {
    for (const auto& p : a.pairs) {
      const auto colon = p.find(':');
      if (colon == std::string::npos) {
        throw CLI::ValidationError("--pair", "expected A:B, got '" + p + "'");
      }
      const std::string l = p.substr(0, colon), r = p.substr(colon + 1);
      pairs.emplace_back(component_index(draws, l), component_index(draws, r));
      labels.push_back(l + "-" + r);
    }
  }
  itf::DependenceOptions opts;
  opts.replicates = a.replicates;
  opts.level = a.level;
  opts.seed = a.seed;
  std::ostringstream csv;
  csv << "pair,statistic,threshold,p_value,dependent\n";
  json detail = json::array();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto r = itf::dependence_statistic(draws, pairs[k].first, pairs[k].second, opts);
    csv << labels[k] << ',' << r.statistic << ',' << r.threshold << ',' << r.p_value << ','
        << (r.dependent ? "Yes" : "No") << '\n';
    detail.push_back({{"pair", labels[k]},
                      {"statistic", r.statistic},
                      {"threshold", r.threshold},
                      {"level", r.level},
                      {"null_quantiles", r.null_quantiles},
                      {"p_value", r.p_value},
                      {"dependent", r.dependent}});
  }
  emit(a.out, csv.str());
  if (!a.json_out.empty()) emit(a.json_out, detail.dump(2) + "\n");
  return 0;
}

struct CoclusterArgs {
  std::string draws;
  std::string level = "top";
  std::string out;
};

int cmd_cocluster(const CoclusterArgs& a) {
  const auto draws = itf::read_draws(a.draws);
  std::optional<std::size_t> component;
  if (a.level != "top") component = component_index(draws, a.level);
  const auto m = itf::coclustering_matrix(draws, component);
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(m.size())));
  std::ostringstream out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k) out << ',';
      out << m[i * n + k];
    }
    out << '\n';
  }
  emit(a.out, out.str());
  return 0;
}

struct BenchmarkArgs {
  FitFlags flags;
  std::string data;
  std::string truth;
  int scenario = 0;
  std::size_t n = 500;
  std::uint64_t sim_seed = 1;
  std::vector<std::string> holdouts;
  std::uint64_t holdout_seed = 11;
  double epsilon = 1e-4;
  std::size_t replicates = 200;
  std::string out;
  std::string json_out;
};

int cmd_benchmark(const BenchmarkArgs& a, const CLI::App* sub) {
  itf::RunConfig base;
  base.sampler.init = itf::InitMode::random;
  base.sampler.init_clusters = 10;
  itf::BenchmarkConfig bc;
  bc.run = build_run_config(sub, a.flags, base);
  bc.holdouts = parse_holdouts(a.holdouts);
  bc.holdout_seed = a.holdout_seed;
  bc.epsilon = a.epsilon;
  bc.dependence.replicates = a.replicates;
  itf::MixedDataset ds;
  std::map<std::string, bool> truth;
  if (a.scenario != 0) {
    const auto g = itf::generate(itf::default_scenario(a.scenario, a.n, a.sim_seed));
    ds = g.data;
    truth = g.truth;
  } else {
    if (a.data.empty()) throw CLI::ValidationError("benchmark", "--data or --scenario required");
    ds = itf::load_dataset(a.data);
  }
  if (!a.truth.empty()) {
    const json j = json::parse(slurp(a.truth));
    truth = j.at("dependence").get<std::map<std::string, bool>>();
  }
  const auto report = itf::run_benchmark(ds, bc, truth);
  emit(a.out, itf::benchmark_to_csv(report));
  if (!a.json_out.empty()) emit(a.json_out, itf::benchmark_to_json(report) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinite tensor factorization mixtures for mixed-type data"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "generate a scenario dataset");
  s->add_option("--scenario", sim.scenario, "simulation design, 1 or 2")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  s->add_option("--n", sim.n, "observations")->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "64-bit seed");
  s->add_option("--out", sim.out, "output directory")->required();
  s->add_option("--spec", sim.spec, "JSON scenario parameters")->check(CLI::ExistingFile);
  s->add_option("--holdout", sim.holdouts, "NAME=COUNT rows to hide (repeatable)");
  s->add_option("--holdout-seed", sim.holdout_seed, "seed of the hold-out mask");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "run the ITF or DPM sampler");
  add_fit_flags(f, fit.flags, true);
  f->add_option("--data", fit.data, "dataset schema.json")->required()->check(CLI::ExistingFile);
  f->add_option("--kernels", fit.kernels, "JSON kernel priors keyed by component")
      ->check(CLI::ExistingFile);
  f->add_option("--out", fit.out, "draw stream (newline-delimited JSON)");
  f->add_option("--manifest", fit.manifest, "run manifest path");
  f->add_option("--checkpoint", fit.checkpoint, "checkpoint path prefix");
  f->add_option("--checkpoint-every", fit.checkpoint_every, "sweeps between checkpoints");
  f->add_flag("--resume", fit.resume, "continue from the checkpoint");
  f->add_option("--halt-after", fit.halt_after, "stop after this sweep, keeping a checkpoint");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "predict held-out cells from draws");
  p->add_option("--data", pr.data, "dataset with held-out cells")
      ->required()
      ->check(CLI::ExistingFile);
  p->add_option("--draws", pr.draws, "draw stream")->required()->check(CLI::ExistingFile);
  p->add_option("--answers", pr.answers, "answer key; restricts targets and reports scores")
      ->check(CLI::ExistingFile);
  p->add_option("--epsilon", pr.epsilon, "truncation mass")->check(CLI::Range(1e-300, 0.5));
  p->add_option("--seed", pr.seed, "seed for stick completion");
  p->add_option("--out", pr.out, "predictions CSV (default stdout)");
  p->add_option("--scores", pr.scores, "scores CSV (default stderr)");

  DependArgs dp;
  auto* d = app.add_subcommand("depend", "test pairwise dependence from draws");
  d->add_option("--draws", dp.draws, "draw stream")->required()->check(CLI::ExistingFile);
  d->add_option("--pair", dp.pairs, "A:B component pair (repeatable; default all)");
  d->add_option("--replicates", dp.replicates, "null replicates")->check(CLI::PositiveNumber);
  d->add_option("--level", dp.level, "null quantile")->check(CLI::Range(0.5, 0.999999));
  d->add_option("--seed", dp.seed, "seed of the null resampling");
  d->add_option("--out", dp.out, "CSV report (default stdout)");
  d->add_option("--json", dp.json_out, "JSON report with null quantiles");

  CoclusterArgs cc;
  auto* c = app.add_subcommand("cocluster", "posterior co-assignment matrix");
  c->add_option("--draws", cc.draws, "draw stream")->required()->check(CLI::ExistingFile);
  c->add_option("--level", cc.level, "'top' or a component name");
  c->add_option("--out", cc.out, "dense CSV (default stdout)");

  BenchmarkArgs bm;
  auto* b = app.add_subcommand("benchmark", "compare ITF with the joint DPM");
  add_fit_flags(b, bm.flags, false);
  b->add_option("--data", bm.data, "dataset schema.json")->check(CLI::ExistingFile);
  b->add_option("--truth", bm.truth, "truth.json with a dependence table")
      ->check(CLI::ExistingFile);
  b->add_option("--scenario", bm.scenario, "simulate scenario 1 or 2 instead of --data")
      ->check(CLI::IsMember({1, 2}));
  b->add_option("--n", bm.n, "observations when simulating")->check(CLI::PositiveNumber);
  b->add_option("--sim-seed", bm.sim_seed, "simulation seed");
  b->add_option("--holdout", bm.holdouts, "NAME=COUNT rows to hide (default T, C2, C3 at n/5)");
  b->add_option("--holdout-seed", bm.holdout_seed, "seed of the hold-out mask");
  b->add_option("--epsilon", bm.epsilon, "truncation mass")->check(CLI::Range(1e-300, 0.5));
  b->add_option("--replicates", bm.replicates, "dependence null replicates")
      ->check(CLI::PositiveNumber);
  b->add_option("--out", bm.out, "CSV report (default stdout)");
  b->add_option("--json", bm.json_out, "JSON report");

  CLI11_PARSE(app, argc, argv);

  std::string command;
  for (int k = 0; k < argc; ++k) command += (k ? " " : "") + std::string(argv[k]);
  try {
    if (s->parsed()) return cmd_simulate(sim, s);
    if (f->parsed()) return cmd_fit(fit, f, command);
    if (p->parsed()) return cmd_predict(pr);
    if (d->parsed()) return cmd_depend(dp);
    if (c->parsed()) return cmd_cocluster(cc);
    if (b->parsed()) return cmd_benchmark(bm, b);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const itf::DataError& e) {
    std::cerr << "itf: data error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "itf: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
