// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/runner.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "itf/simgen.hpp"
#include "json_io.hpp"

namespace itf {

using detail::json;

namespace {

json gamma_json(const GammaPrior& g) { return {{"shape", g.shape}, {"rate", g.rate}}; }

GammaPrior gamma_from(const json& j, GammaPrior base) {
  base.shape = j.value("shape", base.shape);
  base.rate = j.value("rate", base.rate);
  if (!(base.shape > 0) || !(base.rate > 0)) {
    throw std::invalid_argument("gamma prior: shape and rate must be positive");
  }
  return base;
}

std::filesystem::path chain_path(const std::filesystem::path& base, std::size_t chain) {
  return base.string() + ".chain" + std::to_string(chain);
}

bool retained(const RunConfig& c, std::size_t sweep) {
  return sweep > c.burn_in && (sweep - c.burn_in) % c.thin == 0;
}

void restore(ItfSampler& s, Checkpoint& c) { s.set_state(std::move(c.itf)); }
void restore(DpmSampler& s, Checkpoint& c) { s.set_state(std::move(c.dpm)); }
void store(const ItfSampler& s, Checkpoint& c) { c.itf = s.state(); }
void store(const DpmSampler& s, Checkpoint& c) { c.dpm = s.state(); }

struct ChainOutput {
  std::vector<Draw> draws;
  std::size_t sweeps = 0;
  bool completed = true;
};

template <class Sampler>
ChainOutput run_chain(const MixedDataset& data, const std::vector<Kernel>& kernels,
                      const RunConfig& cfg, std::size_t chain) {
  Rng rng(derive_seed(cfg.seed, chain));
  Sampler sampler(data, kernels, cfg.sampler);
  ChainOutput out;
  std::size_t start = 0;
  const auto ck_path = chain_path(cfg.checkpoint, chain);
  if (cfg.resume) {
    Checkpoint ck = load_checkpoint(ck_path);
    if (ck.model != cfg.model || ck.chain != chain) {
      throw std::runtime_error("checkpoint " + ck_path.string() +
                               " belongs to a different model or chain");
    }
    restore(sampler, ck);
    set_rng_state(rng, ck.rng);
    start = ck.sweep;
    out.draws = std::move(ck.draws);
  } else {
    sampler.initialize(rng);
  }
  auto save = [&](std::size_t sweep) {
    Checkpoint ck;
    ck.model = cfg.model;
    ck.sweep = sweep;
    ck.chain = chain;
    ck.rng = rng_state(rng);
    store(sampler, ck);
    ck.draws = out.draws;
    save_checkpoint(ck, ck_path);
  };
  for (std::size_t sweep = start + 1; sweep <= cfg.iterations; ++sweep) {
    sampler.sweep(rng);
    out.sweeps = sweep;
    if (retained(cfg, sweep)) out.draws.push_back(snapshot(sampler, sweep, chain));
    const bool halt = cfg.halt_after != 0 && sweep == cfg.halt_after;
    if (!cfg.checkpoint.empty() &&
        ((cfg.checkpoint_every != 0 && sweep % cfg.checkpoint_every == 0) || halt)) {
      save(sweep);
    }
    if (halt) {
      out.completed = sweep == cfg.iterations;
      break;
    }
  }
  if (out.sweeps == 0) out.sweeps = start;
  return out;
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.iterations == 0) throw std::invalid_argument("iterations must be positive");
  if (c.burn_in >= c.iterations) {
    throw std::invalid_argument("burn-in must be smaller than the iteration count");
  }
  if (c.thin == 0) throw std::invalid_argument("thinning must be positive");
  if (c.chains == 0) throw std::invalid_argument("at least one chain is required");
  if ((c.resume || c.checkpoint_every != 0 || c.halt_after != 0) && c.checkpoint.empty()) {
    throw std::invalid_argument("checkpointing needs a checkpoint path");
  }
  if (!(c.sampler.initial_alpha > 0) || !(c.sampler.initial_beta > 0)) {
    throw std::invalid_argument("initial concentrations must be positive");
  }
}

std::string run_config_to_json(const RunConfig& c) {
  const auto& s = c.sampler;
  const json j{
      {"model", to_string(c.model)},
      {"iterations", c.iterations},
      {"burn_in", c.burn_in},
      {"thin", c.thin},
      {"chains", c.chains},
      {"seed", c.seed},
      {"checkpoint_every", c.checkpoint_every},
      {"checkpoint", c.checkpoint.string()},
      {"sampler",
       {{"alpha_prior", gamma_json(s.alpha_prior)},
        {"beta_prior", gamma_json(s.beta_prior)},
        {"scheme", s.scheme == ConcentrationScheme::labeled ? "labeled" : "exchangeable"},
        {"init", s.init == InitMode::random ? "random" : "single"},
        {"init_clusters", s.init_clusters},
        {"initial_alpha", s.initial_alpha},
        {"initial_beta", s.initial_beta},
        {"sample_alpha", s.sample_alpha},
        {"sample_beta", s.sample_beta},
        {"label_moves", s.label_moves}}}};
  return j.dump();
}

RunConfig run_config_from_json(const std::string& text, RunConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }
  if (j.contains("model")) c.model = parse_model_kind(j.at("model").get<std::string>());
  c.iterations = j.value("iterations", c.iterations);
  c.burn_in = j.value("burn_in", c.burn_in);
  c.thin = j.value("thin", c.thin);
  c.chains = j.value("chains", c.chains);
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  if (j.contains("checkpoint")) c.checkpoint = j.at("checkpoint").get<std::string>();
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    auto& o = c.sampler;
    if (s.contains("alpha_prior")) o.alpha_prior = gamma_from(s.at("alpha_prior"), o.alpha_prior);
    if (s.contains("beta_prior")) o.beta_prior = gamma_from(s.at("beta_prior"), o.beta_prior);
    if (s.contains("scheme")) {
      const auto v = s.at("scheme").get<std::string>();
      if (v == "labeled") {
        o.scheme = ConcentrationScheme::labeled;
      } else if (v == "exchangeable") {
        o.scheme = ConcentrationScheme::exchangeable;
      } else {
        throw std::invalid_argument("config: unknown scheme '" + v + "'");
      }
    }
    if (s.contains("init")) {
      const auto v = s.at("init").get<std::string>();
      if (v == "random") {
        o.init = InitMode::random;
      } else if (v == "single") {
        o.init = InitMode::single;
      } else {
        throw std::invalid_argument("config: unknown init '" + v + "'");
      }
    }
    o.init_clusters = s.value("init_clusters", o.init_clusters);
    o.initial_alpha = s.value("initial_alpha", o.initial_alpha);
    o.initial_beta = s.value("initial_beta", o.initial_beta);
    o.sample_alpha = s.value("sample_alpha", o.sample_alpha);
    o.sample_beta = s.value("sample_beta", o.sample_beta);
    o.label_moves = s.value("label_moves", o.label_moves);
  }
  return c;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

FitResult fit(const MixedDataset& data, const std::vector<Kernel>& kernels,
              const RunConfig& config) {
  validate(config);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ChainOutput> outputs(config.chains);
  std::vector<std::exception_ptr> errors(config.chains);
  auto work = [&](std::size_t k) {
    try {
      outputs[k] = config.model == ModelKind::itf
                       ? run_chain<ItfSampler>(data, kernels, config, k)
                       : run_chain<DpmSampler>(data, kernels, config, k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (config.chains == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k < config.chains; ++k) threads.emplace_back(work, k);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  FitResult r;
  r.draws.header = StreamHeader{config.model, config.seed, run_config_to_json(config), kernels, {}};
  for (const auto& s : data.specs()) r.draws.header.components.push_back(s.name);
  for (auto& o : outputs) {
    r.sweeps = std::max(r.sweeps, o.sweeps);
    r.completed = r.completed && o.completed;
    for (auto& d : o.draws) r.draws.draws.push_back(std::move(d));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void write_manifest(const std::filesystem::path& path, const RunConfig& config,
                    const MixedDataset& data, const FitResult& result,
                    const std::string& command) {
  const std::string cfg = run_config_to_json(config);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg)));
  json names = json::array();
  for (const auto& s : data.specs()) names.push_back(s.name);
  const json j{{"command", command},
               {"model", to_string(config.model)},
               {"seed", config.seed},
               {"config", json::parse(cfg)},
               {"config_hash", hash},
               {"chains", config.chains},
               {"sweeps", result.sweeps},
               {"draws", result.draws.draws.size()},
               {"completed", result.completed},
               {"seconds", result.seconds},
               {"dataset", {{"n", data.size()}, {"components", names}}}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

BenchmarkReport run_benchmark(const MixedDataset& data, const BenchmarkConfig& config,
                              const std::map<std::string, bool>& truth) {
  auto holdouts = config.holdouts;
  if (holdouts.empty()) {
    for (const char* name : {"T", "C2", "C3"}) holdouts.emplace_back(name, data.size() / 5);
  }
  Rng hrng(config.holdout_seed);
  const HoldoutResult h = apply_holdout(data, holdouts, hrng);
  const auto kernels = default_kernels(h.masked);

  BenchmarkReport rep;
  std::map<std::string, std::map<ModelKind, double>> losses;
  std::map<ModelKind, PosteriorDraws> fitted;
  for (ModelKind model : {ModelKind::itf, ModelKind::dpm}) {
    RunConfig rc = config.run;
    rc.model = model;
    FitResult fr = fit(h.masked, kernels, rc);
    (model == ModelKind::itf ? rep.itf_seconds : rep.dpm_seconds) = fr.seconds;
    (model == ModelKind::itf ? rep.itf_draws : rep.dpm_draws) = fr.draws.draws.size();
    const Predictor pred(fr.draws, config.epsilon, rc.seed);
    const AnswerKey guesses = predict_holdouts(pred, h.masked, h.answers);
    for (const auto& [name, answers] : h.answers) {
      const auto kind = data.component(data.index_of(name)).kind;
      losses[name][model] = score_predictions(answers, guesses.at(name), kind);
    }
    fitted[model] = std::move(fr.draws);
  }
  for (const auto& [name, count] : holdouts) {
    (void)count;
    LossRow row;
    row.component = name;
    row.kind = data.component(data.index_of(name)).kind;
    row.itf = losses[name][ModelKind::itf];
    row.dpm = losses[name][ModelKind::dpm];
    rep.losses.push_back(row);
  }
  for (const auto& [a, b] : tested_pairs()) {
    const auto ja = data.find(a), jb = data.find(b);
    if (!ja || !jb) continue;
    DependenceRow row;
    row.pair = a + "-" + b;
    if (auto it = truth.find(row.pair); it != truth.end()) row.truth = it->second;
    row.itf = dependence_statistic(fitted[ModelKind::itf], *ja, *jb, config.dependence);
    row.dpm = dependence_statistic(fitted[ModelKind::dpm], *ja, *jb, config.dependence);
    rep.dependence.push_back(row);
  }
  return rep;
}

std::string benchmark_to_csv(const BenchmarkReport& r) {
  std::ostringstream out;
  out << "table,row,itf,dpm,truth,itf_statistic,itf_threshold,dpm_statistic,"
         "dpm_threshold\n";
  for (const auto& l : r.losses) {
    out << "prediction," << l.component << ',' << l.itf << ',' << l.dpm << ",,,,,\n";
  }
  auto yn = [](bool v) { return v ? "Yes" : "No"; };
  for (const auto& d : r.dependence) {
    out << "dependence," << d.pair << ',' << yn(d.itf.dependent) << ','
        << yn(d.dpm.dependent) << ',' << (d.truth ? yn(*d.truth) : "") << ','
        << d.itf.statistic << ',' << d.itf.threshold << ',' << d.dpm.statistic << ','
        << d.dpm.threshold << '\n';
  }
  return out.str();
}

std::string benchmark_to_json(const BenchmarkReport& r) {
  auto dep_json = [](const DependenceReport& d) {
    return json{{"statistic", d.statistic},     {"threshold", d.threshold},
                {"level", d.level},             {"null_quantiles", d.null_quantiles},
                {"p_value", d.p_value},         {"dependent", d.dependent}};
  };
  json losses = json::array();
  for (const auto& l : r.losses) {
    losses.push_back({{"component", l.component},
                      {"loss", l.kind == ComponentKind::categorical
                                   ? "misclassification_percent"
                                   : "relative_predictive_error"},
                      {"itf", l.itf},
                      {"dpm", l.dpm}});
  }
  json deps = json::array();
  for (const auto& d : r.dependence) {
    json row{{"pair", d.pair}, {"itf", dep_json(d.itf)}, {"dpm", dep_json(d.dpm)}};
    if (d.truth) row["truth"] = *d.truth;
    deps.push_back(std::move(row));
  }
  return json{{"prediction", losses},
              {"dependence", deps},
              {"itf_seconds", r.itf_seconds},
              {"dpm_seconds", r.dpm_seconds},
              {"itf_draws", r.itf_draws},
              {"dpm_draws", r.dpm_draws}}
      .dump(2);
}

}  // namespace itf
