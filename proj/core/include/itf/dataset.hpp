// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "itf/random.hpp"

namespace itf {

enum class ComponentKind { real, categorical, series };

const char* to_string(ComponentKind kind);
ComponentKind parse_component_kind(const std::string& s);

struct ComponentSpec {
  std::string name;
  ComponentKind kind = ComponentKind::real;
  /// Vector dimension (real), series length (series) or 1 (categorical).
  std::size_t width = 1;
  /// Number of levels; categorical only.
  std::size_t levels = 0;

  static ComponentSpec real(std::string name, std::size_t dim);
  static ComponentSpec categorical(std::string name, std::size_t levels);
  static ComponentSpec series(std::string name, std::size_t length);
};

/// Parse or validation failure carrying the offending coordinates (1-based
/// data row, 1-based column; 0 when not applicable).
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::size_t row = 0, std::size_t column = 0);
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }
  /// The message without coordinates.
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  std::size_t row_;
  std::size_t column_;
};

/// n observations of p heterogeneous components. Each cell is a fixed-width
/// vector of doubles; categorical cells hold a single 0-based level index.
/// Held-out cells keep no value and refuse to be read.
class MixedDataset {
 public:
  MixedDataset() = default;
  MixedDataset(std::vector<ComponentSpec> components, std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t components() const { return specs_.size(); }
  const ComponentSpec& component(std::size_t j) const { return specs_.at(j); }
  const std::vector<ComponentSpec>& specs() const { return specs_; }
  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  bool observed(std::size_t i, std::size_t j) const;
  /// Throws std::logic_error for a held-out cell.
  std::span<const double> cell(std::size_t i, std::size_t j) const;
  /// Validates the value against the component kind and marks it observed.
  void set_cell(std::size_t i, std::size_t j, std::span<const double> value);
  void set_category(std::size_t i, std::size_t j, int level);
  void hide(std::size_t i, std::size_t j);
  std::size_t observed_count(std::size_t j) const;

 private:
  struct Column {
    std::vector<double> values;
    std::vector<char> observed;
  };
  void check_index(std::size_t i, std::size_t j) const;

  std::vector<ComponentSpec> specs_;
  std::size_t n_ = 0;
  std::vector<Column> columns_;
};

/// Per-component answers, aligned by row: values[k] belongs to rows[k].
struct ComponentAnswers {
  std::vector<std::size_t> rows;
  std::vector<std::vector<double>> values;
};
using AnswerKey = std::map<std::string, ComponentAnswers>;

/// Reads a JSON schema and the per-component CSV files it names (paths
/// relative to the schema's directory).
MixedDataset load_dataset(const std::filesystem::path& schema_path);
/// Writes <dir>/schema.json plus one <name>.csv per component. Returns the
/// schema path.
std::filesystem::path save_dataset(const MixedDataset& ds,
                                   const std::filesystem::path& dir);

void save_answer_key(const AnswerKey& key, const std::filesystem::path& path);
AnswerKey load_answer_key(const std::filesystem::path& path);

struct HoldoutResult {
  MixedDataset masked;
  AnswerKey answers;
};

/// Hides `count` uniformly chosen observed rows of each named component.
HoldoutResult apply_holdout(
    const MixedDataset& ds,
    const std::vector<std::pair<std::string, std::size_t>>& counts, Rng& rng);

/// Percent of rows whose predicted level differs from the truth.
double misclassification_percent(const ComponentAnswers& truth,
                                 const ComponentAnswers& predicted);
/// sum ||yhat - y||^2 / sum ||y - ybar||^2, ybar the mean held-out vector.
double relative_predictive_error(const ComponentAnswers& truth,
                                 const ComponentAnswers& predicted);
/// Dispatches on kind: categorical -> percent, otherwise relative error.
double score_predictions(const ComponentAnswers& truth,
                         const ComponentAnswers& predicted, ComponentKind kind);

}  // namespace itf
