// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace itf {
namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

bool is_missing(const std::string& field) {
  return field.empty() || field == "NA" || field == "nan" || field == "NaN";
}

double parse_number(const std::string& field, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw DataError("not a finite number: '" + field + "'", row, col);
  }
  return v;
}

std::vector<std::string> column_names(const ComponentSpec& spec) {
  if (spec.width == 1) return {spec.name};
  std::vector<std::string> names;
  for (std::size_t d = 0; d < spec.width; ++d) {
    names.push_back(spec.name + "_" + std::to_string(d + 1));
  }
  return names;
}

json spec_to_json(const ComponentSpec& spec) {
  json j = {{"name", spec.name}, {"kind", to_string(spec.kind)},
            {"file", spec.name + ".csv"}};
  switch (spec.kind) {
    case ComponentKind::real: j["dim"] = spec.width; break;
    case ComponentKind::categorical: j["levels"] = spec.levels; break;
    case ComponentKind::series: j["length"] = spec.width; break;
  }
  return j;
}

ComponentSpec spec_from_json(const json& j) {
  if (!j.contains("name") || !j.contains("kind")) {
    throw DataError("schema component needs 'name' and 'kind'");
  }
  const auto name = j.at("name").get<std::string>();
  const auto kind = parse_component_kind(j.at("kind").get<std::string>());
  auto positive = [&](const char* key) {
    if (!j.contains(key)) {
      throw DataError("component '" + name + "' is missing '" + key + "'");
    }
    const long long v = j.at(key).get<long long>();
    if (v <= 0) {
      throw DataError("component '" + name + "': '" + key + "' must be positive");
    }
    return static_cast<std::size_t>(v);
  };
  switch (kind) {
    case ComponentKind::real: return ComponentSpec::real(name, positive("dim"));
    case ComponentKind::categorical:
      return ComponentSpec::categorical(name, positive("levels"));
    case ComponentKind::series:
      return ComponentSpec::series(name, positive("length"));
  }
  throw DataError("unreachable component kind");
}

}  // namespace

const char* to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::real: return "real";
    case ComponentKind::categorical: return "categorical";
    case ComponentKind::series: return "series";
  }
  return "?";
}

ComponentKind parse_component_kind(const std::string& s) {
  if (s == "real") return ComponentKind::real;
  if (s == "categorical") return ComponentKind::categorical;
  if (s == "series") return ComponentKind::series;
  throw DataError("unknown component kind '" + s + "'");
}

ComponentSpec ComponentSpec::real(std::string name, std::size_t dim) {
  return {std::move(name), ComponentKind::real, dim, 0};
}
ComponentSpec ComponentSpec::categorical(std::string name, std::size_t levels) {
  return {std::move(name), ComponentKind::categorical, 1, levels};
}
ComponentSpec ComponentSpec::series(std::string name, std::size_t length) {
  return {std::move(name), ComponentKind::series, length, 0};
}

DataError::DataError(const std::string& what, std::size_t row, std::size_t column)
    : std::runtime_error([&] {
        std::string msg = what;
        if (row > 0) msg += " (row " + std::to_string(row);
        if (row > 0 && column > 0) msg += ", column " + std::to_string(column);
        if (row > 0) msg += ")";
        return msg;
      }()),
      detail_(what),
      row_(row),
      column_(column) {}

MixedDataset::MixedDataset(std::vector<ComponentSpec> components, std::size_t n)
    : specs_(std::move(components)), n_(n) {
  std::set<std::string> names;
  for (const auto& s : specs_) {
    if (s.name.empty()) throw DataError("component name must not be empty");
    if (!names.insert(s.name).second) {
      throw DataError("duplicate component name '" + s.name + "'");
    }
    if (s.width == 0) throw DataError("component '" + s.name + "' has zero width");
    if (s.kind == ComponentKind::categorical && (s.levels == 0 || s.width != 1)) {
      throw DataError("categorical component '" + s.name + "' needs levels >= 1");
    }
    columns_.push_back(Column{std::vector<double>(n * s.width, std::nan("")),
                              std::vector<char>(n, 0)});
  }
}

std::optional<std::size_t> MixedDataset::find(const std::string& name) const {
  for (std::size_t j = 0; j < specs_.size(); ++j) {
    if (specs_[j].name == name) return j;
  }
  return std::nullopt;
}

std::size_t MixedDataset::index_of(const std::string& name) const {
  auto j = find(name);
  if (!j) throw std::out_of_range("no component named '" + name + "'");
  return *j;
}

void MixedDataset::check_index(std::size_t i, std::size_t j) const {
  if (j >= specs_.size() || i >= n_) {
    throw std::out_of_range("dataset cell index out of range");
  }
}

bool MixedDataset::observed(std::size_t i, std::size_t j) const {
  check_index(i, j);
  return columns_[j].observed[i] != 0;
}

std::span<const double> MixedDataset::cell(std::size_t i, std::size_t j) const {
  check_index(i, j);
  if (!columns_[j].observed[i]) {
    throw std::logic_error("read of held-out cell (" + std::to_string(i) + ", " +
                           specs_[j].name + ")");
  }
  const std::size_t w = specs_[j].width;
  return std::span<const double>(columns_[j].values).subspan(i * w, w);
}

void MixedDataset::set_cell(std::size_t i, std::size_t j,
                            std::span<const double> value) {
  check_index(i, j);
  const auto& spec = specs_[j];
  if (value.size() != spec.width) {
    throw DataError("component '" + spec.name + "' expects width " +
                        std::to_string(spec.width),
                    i + 1, j + 1);
  }
  for (double v : value) {
    if (!std::isfinite(v)) {
      throw DataError("non-finite value in '" + spec.name + "'", i + 1, j + 1);
    }
  }
  if (spec.kind == ComponentKind::categorical) {
    const double v = value[0];
    if (v != std::floor(v) || v < 0 || v >= static_cast<double>(spec.levels)) {
      throw DataError("category outside the declared " +
                          std::to_string(spec.levels) + " levels of '" +
                          spec.name + "'",
                      i + 1, j + 1);
    }
  }
  std::copy(value.begin(), value.end(),
            columns_[j].values.begin() + static_cast<std::ptrdiff_t>(i * spec.width));
  columns_[j].observed[i] = 1;
}

void MixedDataset::set_category(std::size_t i, std::size_t j, int level) {
  const double v = level;
  set_cell(i, j, std::span<const double>(&v, 1));
}

void MixedDataset::hide(std::size_t i, std::size_t j) {
  check_index(i, j);
  const std::size_t w = specs_[j].width;
  std::fill_n(columns_[j].values.begin() + static_cast<std::ptrdiff_t>(i * w), w,
              std::nan(""));
  columns_[j].observed[i] = 0;
}

std::size_t MixedDataset::observed_count(std::size_t j) const {
  const auto& obs = columns_.at(j).observed;
  return static_cast<std::size_t>(std::count(obs.begin(), obs.end(), 1));
}

MixedDataset load_dataset(const std::filesystem::path& schema_path) {
  std::ifstream in(schema_path);
  if (!in) throw DataError("cannot open schema " + schema_path.string());
  json schema;
  try {
    in >> schema;
  } catch (const json::exception& e) {
    throw DataError("malformed schema JSON: " + std::string(e.what()));
  }
  if (!schema.contains("n") || !schema.contains("components")) {
    throw DataError("schema needs 'n' and 'components'");
  }
  const long long n_raw = schema.at("n").get<long long>();
  if (n_raw <= 0) throw DataError("dataset is empty (n must be positive)");
  const auto n = static_cast<std::size_t>(n_raw);

  std::vector<ComponentSpec> specs;
  std::vector<std::string> files;
  for (const auto& c : schema.at("components")) {
    specs.push_back(spec_from_json(c));
    files.push_back(c.value("file", specs.back().name + ".csv"));
  }
  if (specs.empty()) throw DataError("schema declares no components");
  MixedDataset ds(specs, n);

  const auto base = schema_path.parent_path();
  for (std::size_t j = 0; j < specs.size(); ++j) {
    const auto path = base / files[j];
    std::ifstream csv(path);
    if (!csv) throw DataError("cannot open data file " + path.string());
    std::string line;
    if (!std::getline(csv, line) || line.empty()) {
      throw DataError("empty data file " + path.string());
    }
    const auto header = split_csv_line(line);
    if (header.size() != specs[j].width) {
      throw DataError(path.filename().string() + ": header has " +
                          std::to_string(header.size()) + " columns, expected " +
                          std::to_string(specs[j].width),
                      0, 0);
    }
    std::size_t row = 0;
    std::vector<double> value(specs[j].width);
    while (std::getline(csv, line)) {
      if (line.empty() || line == "\r") continue;
      const std::size_t rownum = row + 1;
      if (row >= n) {
        throw DataError(path.filename().string() + ": more rows than n=" +
                            std::to_string(n),
                        rownum);
      }
      const auto fields = split_csv_line(line);
      if (fields.size() != specs[j].width) {
        throw DataError(path.filename().string() + ": ragged row with " +
                            std::to_string(fields.size()) + " fields",
                        rownum);
      }
      const bool missing = std::all_of(fields.begin(), fields.end(), is_missing);
      if (!missing) {
        for (std::size_t d = 0; d < fields.size(); ++d) {
          if (is_missing(fields[d])) {
            throw DataError(path.filename().string() +
                                ": partially missing cell",
                            rownum, d + 1);
          }
          value[d] = parse_number(fields[d], rownum, d + 1);
        }
        try {
          ds.set_cell(row, j, value);
        } catch (const DataError& e) {
          throw DataError(path.filename().string() + ": " + e.detail(), rownum,
                          specs[j].width == 1 ? 1 : 0);
        }
      }
      ++row;
    }
    if (row != n) {
      throw DataError(path.filename().string() + ": expected " +
                      std::to_string(n) + " rows, found " + std::to_string(row));
    }
  }
  return ds;
}

std::filesystem::path save_dataset(const MixedDataset& ds,
                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json schema;
  schema["n"] = ds.size();
  schema["components"] = json::array();
  for (std::size_t j = 0; j < ds.components(); ++j) {
    const auto& spec = ds.component(j);
    schema["components"].push_back(spec_to_json(spec));
    std::ofstream csv(dir / (spec.name + ".csv"));
    const auto names = column_names(spec);
    for (std::size_t d = 0; d < names.size(); ++d) {
      csv << (d ? "," : "") << names[d];
    }
    csv << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
      for (std::size_t d = 0; d < spec.width; ++d) {
        if (d) csv << ',';
        if (!ds.observed(i, j)) {
          csv << "NA";
        } else if (spec.kind == ComponentKind::categorical) {
          csv << static_cast<long long>(ds.cell(i, j)[0]);
        } else {
          csv << format_double(ds.cell(i, j)[d]);
        }
      }
      csv << '\n';
    }
    if (!csv) throw DataError("failed writing " + (dir / (spec.name + ".csv")).string());
  }
  const auto path = dir / "schema.json";
  std::ofstream out(path);
  out << schema.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
  return path;
}

void save_answer_key(const AnswerKey& key, const std::filesystem::path& path) {
  json j;
  j["components"] = json::object();
  for (const auto& [name, answers] : key) {
    j["components"][name] = {{"rows", answers.rows}, {"values", answers.values}};
  }
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

AnswerKey load_answer_key(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open answer key " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed answer key JSON: " + std::string(e.what()));
  }
  AnswerKey key;
  for (const auto& [name, entry] : j.at("components").items()) {
    ComponentAnswers a;
    a.rows = entry.at("rows").get<std::vector<std::size_t>>();
    a.values = entry.at("values").get<std::vector<std::vector<double>>>();
    if (a.rows.size() != a.values.size()) {
      throw DataError("answer key '" + name + "': rows and values differ in length");
    }
    key.emplace(name, std::move(a));
  }
  return key;
}

HoldoutResult apply_holdout(
    const MixedDataset& ds,
    const std::vector<std::pair<std::string, std::size_t>>& counts, Rng& rng) {
  HoldoutResult out{ds, {}};
  for (const auto& [name, count] : counts) {
    const std::size_t j = ds.index_of(name);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (out.masked.observed(i, j)) candidates.push_back(i);
    }
    if (count > candidates.size()) {
      throw std::invalid_argument("cannot hold out " + std::to_string(count) +
                                  " rows of '" + name + "': only " +
                                  std::to_string(candidates.size()) + " observed");
    }
    // Partial Fisher-Yates: the first `count` entries form a uniform subset.
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t pick = k + uniform_index(rng, candidates.size() - k);
      std::swap(candidates[k], candidates[pick]);
    }
    std::vector<std::size_t> chosen(candidates.begin(),
                                    candidates.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(chosen.begin(), chosen.end());
    auto& answers = out.answers[name];
    for (std::size_t i : chosen) {
      const auto v = out.masked.cell(i, j);
      answers.rows.push_back(i);
      answers.values.emplace_back(v.begin(), v.end());
      out.masked.hide(i, j);
    }
  }
  return out;
}

namespace {

void check_aligned(const ComponentAnswers& truth, const ComponentAnswers& pred) {
  if (truth.rows != pred.rows || truth.values.size() != pred.values.size()) {
    throw std::invalid_argument("predictions are not aligned with the answer key");
  }
  for (std::size_t k = 0; k < truth.values.size(); ++k) {
    if (truth.values[k].size() != pred.values[k].size()) {
      throw std::invalid_argument("prediction width differs from the answer key");
    }
  }
  if (truth.rows.empty()) throw std::invalid_argument("no held-out rows to score");
}

}  // namespace

double misclassification_percent(const ComponentAnswers& truth,
                                 const ComponentAnswers& predicted) {
  check_aligned(truth, predicted);
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < truth.values.size(); ++k) {
    if (truth.values[k] != predicted.values[k]) ++wrong;
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(truth.values.size());
}

double relative_predictive_error(const ComponentAnswers& truth,
                                 const ComponentAnswers& predicted) {
  check_aligned(truth, predicted);
  const std::size_t w = truth.values.front().size();
  std::vector<double> mean(w, 0.0);
  for (const auto& v : truth.values) {
    for (std::size_t d = 0; d < w; ++d) mean[d] += v[d];
  }
  for (double& m : mean) m /= static_cast<double>(truth.values.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < truth.values.size(); ++k) {
    for (std::size_t d = 0; d < w; ++d) {
      const double e = predicted.values[k][d] - truth.values[k][d];
      const double c = truth.values[k][d] - mean[d];
      num += e * e;
      den += c * c;
    }
  }
  if (!(den > 0.0)) {
    throw std::domain_error("relative error undefined: held-out values are constant");
  }
  return num / den;
}

double score_predictions(const ComponentAnswers& truth,
                         const ComponentAnswers& predicted, ComponentKind kind) {
  return kind == ComponentKind::categorical
             ? misclassification_percent(truth, predicted)
             : relative_predictive_error(truth, predicted);
}

}  // namespace itf
