// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/draws.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json_io.hpp"

namespace itf {

using detail::json;

namespace detail {

json atom_to_json(const Atom& a) {
  if (const auto* g = std::get_if<GaussianAtom>(&a)) {
    return {{"mean", g->mean}, {"var", g->var}};
  }
  if (const auto* c = std::get_if<CategoricalAtom>(&a)) return {{"prob", c->prob}};
  const auto& r = std::get<Ar1Atom>(a);
  return {{"level", r.level}, {"coef", r.coef}, {"var", r.var}};
}

Atom atom_from_json(const json& j) {
  if (j.contains("prob")) return CategoricalAtom{j.at("prob").get<std::vector<double>>()};
  if (j.contains("coef")) {
    return Ar1Atom{j.at("level").get<double>(), j.at("coef").get<double>(),
                   j.at("var").get<double>()};
  }
  return GaussianAtom{j.at("mean").get<std::vector<double>>(),
                      j.at("var").get<std::vector<double>>()};
}

json prior_to_json(const KernelPrior& p) {
  if (const auto* g = std::get_if<GaussianDiagPrior>(&p)) {
    return {{"family", "gaussian-diag"}, {"mean", g->mean},   {"kappa", g->kappa},
            {"shape", g->shape},         {"scale", g->scale}};
  }
  if (const auto* c = std::get_if<CategoricalPrior>(&p)) {
    return {{"family", "categorical"}, {"concentration", c->concentration}};
  }
  const auto& a = std::get<Ar1Prior>(p);
  return {{"family", "ar1"},
          {"length", a.length},
          {"level_mean", a.level_mean},
          {"level_scale", a.level_scale},
          {"coef_mean", a.coef_mean},
          {"coef_scale", a.coef_scale},
          {"shape", a.shape},
          {"scale", a.scale},
          {"presample", a.presample}};
}

KernelPrior prior_from_json(const json& j) {
  const auto family = j.at("family").get<std::string>();
  if (family == "gaussian-diag") {
    return GaussianDiagPrior{j.at("mean").get<std::vector<double>>(),
                             j.at("kappa").get<double>(), j.at("shape").get<double>(),
                             j.at("scale").get<std::vector<double>>()};
  }
  if (family == "categorical") {
    return CategoricalPrior{j.at("concentration").get<std::vector<double>>()};
  }
  if (family == "ar1") {
    Ar1Prior a;
    a.length = j.at("length").get<std::size_t>();
    a.level_mean = j.at("level_mean").get<double>();
    a.level_scale = j.at("level_scale").get<double>();
    a.coef_mean = j.at("coef_mean").get<double>();
    a.coef_scale = j.at("coef_scale").get<double>();
    a.shape = j.at("shape").get<double>();
    a.scale = j.at("scale").get<double>();
    a.presample = j.at("presample").get<double>();
    return a;
  }
  throw std::invalid_argument("unknown kernel family '" + family + "'");
}

json stick_to_json(const StickMeasure& m) {
  const auto f = m.fractions();
  return {{"concentration", m.concentration()},
          {"fractions", std::vector<double>(f.begin(), f.end())}};
}

StickMeasure stick_from_json(const json& j) {
  return StickMeasure(j.at("concentration").get<double>(),
                      j.at("fractions").get<std::vector<double>>());
}

}  // namespace detail

namespace {

json atoms_to_json(const std::vector<std::vector<Atom>>& theta) {
  json out = json::array();
  for (const auto& atoms : theta) {
    json col = json::array();
    for (const auto& a : atoms) col.push_back(detail::atom_to_json(a));
    out.push_back(std::move(col));
  }
  return out;
}

std::vector<std::vector<Atom>> atoms_from_json(const json& j) {
  std::vector<std::vector<Atom>> theta;
  for (const auto& col : j) {
    auto& atoms = theta.emplace_back();
    for (const auto& a : col) atoms.push_back(detail::atom_from_json(a));
  }
  return theta;
}

json rows_to_json(const std::vector<std::vector<StickMeasure>>& psi) {
  json out = json::array();
  for (const auto& rows : psi) {
    json r = json::array();
    for (const auto& m : rows) {
      const auto f = m.fractions();
      r.push_back(std::vector<double>(f.begin(), f.end()));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<StickMeasure>> rows_from_json(const json& j,
                                                      const std::vector<double>& beta) {
  std::vector<std::vector<StickMeasure>> psi;
  for (const auto& rows : j) {
    auto& out = psi.emplace_back();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.emplace_back(beta.at(k), rows[k].get<std::vector<double>>());
    }
  }
  return psi;
}

json itf_state_to_json(const ItfState& s) {
  return {{"c0", s.c0},
          {"c", s.c},
          {"u0", s.u0},
          {"u", s.u},
          {"alpha", s.alpha},
          {"beta", s.beta},
          {"lambda", detail::stick_to_json(s.lambda)},
          {"psi", rows_to_json(s.psi)},
          {"theta", atoms_to_json(s.theta)}};
}

ItfState itf_state_from_json(const json& j) {
  ItfState s;
  s.c0 = j.at("c0").get<std::vector<std::size_t>>();
  s.c = j.at("c").get<std::vector<std::vector<std::size_t>>>();
  s.u0 = j.at("u0").get<std::vector<double>>();
  s.u = j.at("u").get<std::vector<std::vector<double>>>();
  s.alpha = j.at("alpha").get<double>();
  s.beta = j.at("beta").get<std::vector<double>>();
  s.lambda = detail::stick_from_json(j.at("lambda"));
  s.psi = rows_from_json(j.at("psi"), s.beta);
  s.theta = atoms_from_json(j.at("theta"));
  return s;
}

json dpm_state_to_json(const DpmState& s) {
  return {{"c", s.c},
          {"u", s.u},
          {"alpha", s.alpha},
          {"lambda", detail::stick_to_json(s.lambda)},
          {"theta", atoms_to_json(s.theta)}};
}

DpmState dpm_state_from_json(const json& j) {
  DpmState s;
  s.c = j.at("c").get<std::vector<std::size_t>>();
  s.u = j.at("u").get<std::vector<double>>();
  s.alpha = j.at("alpha").get<double>();
  s.lambda = detail::stick_from_json(j.at("lambda"));
  s.theta = atoms_from_json(j.at("theta"));
  return s;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string(what) + ": malformed JSON: " + e.what());
  }
}

}  // namespace

const char* to_string(ModelKind m) { return m == ModelKind::itf ? "itf" : "dpm"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "itf") return ModelKind::itf;
  if (s == "dpm") return ModelKind::dpm;
  throw std::invalid_argument("unknown model '" + s + "' (expected itf or dpm)");
}

Draw snapshot(const ItfSampler& s, std::size_t sweep, std::size_t chain) {
  const auto& st = s.state();
  return Draw{sweep, chain, st.alpha, st.beta, st.lambda, st.psi, st.theta, st.c0, st.c};
}

Draw snapshot(const DpmSampler& s, std::size_t sweep, std::size_t chain) {
  const auto& st = s.state();
  return Draw{sweep, chain, st.alpha, {}, st.lambda, {}, st.theta, st.c, {}};
}

std::string header_line(const StreamHeader& h) {
  json kernels = json::array();
  for (const auto& k : h.kernels) kernels.push_back(detail::prior_to_json(k.prior()));
  const json j{{"format", "itf-draws"},
               {"version", 1},
               {"model", to_string(h.model)},
               {"seed", h.seed},
               {"config", parse_json(h.config, "header config")},
               {"kernels", kernels},
               {"components", h.components}};
  return j.dump();
}

StreamHeader parse_header_line(const std::string& line) {
  const json j = parse_json(line, "draw stream header");
  if (j.value("format", "") != "itf-draws") {
    throw std::runtime_error("not a draw stream (missing format tag)");
  }
  StreamHeader h;
  h.model = parse_model_kind(j.at("model").get<std::string>());
  h.seed = j.at("seed").get<std::uint64_t>();
  h.config = j.at("config").dump();
  for (const auto& k : j.at("kernels")) h.kernels.emplace_back(detail::prior_from_json(k));
  h.components = j.value("components", std::vector<std::string>{});
  return h;
}

namespace {

json draw_to_json(const Draw& d) {
  const auto w = d.lambda.weights();
  return {{"sweep", d.sweep},
          {"chain", d.chain},
          {"alpha", d.alpha},
          {"beta", d.beta},
          {"lambda", std::vector<double>(w.begin(), w.end())},
          {"lambda_fractions", detail::stick_to_json(d.lambda).at("fractions")},
          {"psi_fractions", rows_to_json(d.psi)},
          {"theta", atoms_to_json(d.theta)},
          {"c0", d.c0},
          {"c", d.c}};
}

Draw draw_from_json(const json& j) {
  Draw d;
  d.sweep = j.at("sweep").get<std::size_t>();
  d.chain = j.at("chain").get<std::size_t>();
  d.alpha = j.at("alpha").get<double>();
  d.beta = j.at("beta").get<std::vector<double>>();
  d.lambda = StickMeasure(d.alpha, j.at("lambda_fractions").get<std::vector<double>>());
  d.psi = rows_from_json(j.at("psi_fractions"), d.beta);
  d.theta = atoms_from_json(j.at("theta"));
  d.c0 = j.at("c0").get<std::vector<std::size_t>>();
  d.c = j.at("c").get<std::vector<std::vector<std::size_t>>>();
  return d;
}

}  // namespace

std::string draw_line(const Draw& d) { return draw_to_json(d).dump(); }

Draw parse_draw_line(const std::string& line) {
  return draw_from_json(parse_json(line, "draw record"));
}

void write_draws(std::ostream& out, const PosteriorDraws& d) {
  out << header_line(d.header) << '\n';
  for (const auto& draw : d.draws) out << draw_line(draw) << '\n';
}

PosteriorDraws read_draws(std::istream& in) {
  PosteriorDraws d;
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw std::runtime_error("draw stream is empty");
  }
  d.header = parse_header_line(line);
  while (std::getline(in, line)) {
    if (!line.empty()) d.draws.push_back(parse_draw_line(line));
  }
  if (d.draws.empty()) throw std::runtime_error("draw stream holds no draws");
  return d;
}

PosteriorDraws read_draws(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open draws file " + path.string());
  return read_draws(in);
}

std::string kernel_to_json(const Kernel& k) {
  return detail::prior_to_json(k.prior()).dump();
}

Kernel kernel_from_json(const std::string& text) {
  return Kernel(detail::prior_from_json(parse_json(text, "kernel")));
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  json j{{"format", "itf-checkpoint"},
         {"model", to_string(c.model)},
         {"sweep", c.sweep},
         {"chain", c.chain},
         {"rng", c.rng}};
  j["state"] = c.model == ModelKind::itf ? itf_state_to_json(c.itf)
                                         : dpm_state_to_json(c.dpm);
  json draws = json::array();
  for (const auto& d : c.draws) draws.push_back(draw_to_json(d));
  j["draws"] = std::move(draws);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  const json j = parse_json(text, "checkpoint");
  if (j.value("format", "") != "itf-checkpoint") {
    throw std::runtime_error(path.string() + " is not a checkpoint");
  }
  Checkpoint c;
  c.model = parse_model_kind(j.at("model").get<std::string>());
  c.sweep = j.at("sweep").get<std::size_t>();
  c.chain = j.at("chain").get<std::size_t>();
  c.rng = j.at("rng").get<std::string>();
  if (c.model == ModelKind::itf) {
    c.itf = itf_state_from_json(j.at("state"));
  } else {
    c.dpm = dpm_state_from_json(j.at("state"));
  }
  for (const auto& d : j.at("draws")) c.draws.push_back(draw_from_json(d));
  return c;
}

}  // namespace itf
