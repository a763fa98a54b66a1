// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "itf/dataset.hpp"
#include "support.hpp"

using namespace itf;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

void write_schema(const fs::path& dir, std::size_t n, const std::string& components) {
  write_file(dir / "schema.json",
             "{\"n\": " + std::to_string(n) + ", \"components\": [" + components + "]}");
}

const std::string kCat = R"({"name": "C", "kind": "categorical", "levels": 3})";

}  // namespace

TEST_CASE("round trip reproduces every cell bit for bit") {
  Rng rng(1);
  auto ds = test::mixed_toy(25, rng);
  ds.hide(3, 0);
  ds.hide(7, 2);
  const double awkward[2] = {0.1 + 0.2, -1.0 / 3.0};
  ds.set_cell(0, 0, awkward);
  test::TempDir dir;
  const auto schema = save_dataset(ds, dir.path);
  const auto back = load_dataset(schema);
  REQUIRE(back.size() == ds.size());
  REQUIRE(back.components() == ds.components());
  for (std::size_t j = 0; j < ds.components(); ++j) {
    CHECK(back.component(j).name == ds.component(j).name);
    CHECK(back.component(j).kind == ds.component(j).kind);
    CHECK(back.component(j).width == ds.component(j).width);
    CHECK(back.component(j).levels == ds.component(j).levels);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      REQUIRE(back.observed(i, j) == ds.observed(i, j));
      if (!ds.observed(i, j)) continue;
      const auto a = ds.cell(i, j), b = back.cell(i, j);
      for (std::size_t d = 0; d < a.size(); ++d) CHECK(a[d] == b[d]);
    }
  }
}

TEST_CASE("an empty data file is an error, not an empty dataset") {
  test::TempDir dir;
  write_schema(dir.path, 2, kCat);
  write_file(dir.path / "C.csv", "");
  CHECK_THROWS_AS(load_dataset(dir.path / "schema.json"), DataError);
  write_schema(dir.path, 0, kCat);
  CHECK_THROWS_AS(load_dataset(dir.path / "schema.json"), DataError);
}

TEST_CASE("out-of-range category is rejected with coordinates") {
  test::TempDir dir;
  write_schema(dir.path, 3, kCat);
  write_file(dir.path / "C.csv", "C_1\n0\n2\n3\n");
  try {
    load_dataset(dir.path / "schema.json");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 1);
  }
}

TEST_CASE("malformed inputs give descriptive errors") {
  test::TempDir dir;
  const std::string real = R"({"name": "R", "kind": "real", "dim": 2})";
  write_schema(dir.path, 2, real);
  write_file(dir.path / "R.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.path / "schema.json"),
                       doctest::Contains("ragged"), DataError);
  write_file(dir.path / "R.csv", "a,b\n1,2\nx,4\n");
  try {
    load_dataset(dir.path / "schema.json");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == 1);
  }
  write_file(dir.path / "R.csv", "a,b\n1,2\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.path / "schema.json"),
                       doctest::Contains("expected 2 rows"), DataError);
  write_file(dir.path / "R.csv", "a,b\n1,2\n1,NA\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.path / "schema.json"),
                       doctest::Contains("partially missing"), DataError);
  write_file(dir.path / "schema.json", "{not json");
  CHECK_THROWS_AS(load_dataset(dir.path / "schema.json"), DataError);
  write_schema(dir.path, 2, R"({"name": "S", "kind": "series"})");
  CHECK_THROWS_WITH_AS(load_dataset(dir.path / "schema.json"),
                       doctest::Contains("length"), DataError);
  write_schema(dir.path, 2, R"({"name": "S", "kind": "tree", "dim": 1})");
  CHECK_THROWS_AS(load_dataset(dir.path / "schema.json"), DataError);
  CHECK_THROWS_AS(load_dataset(dir.path / "missing.json"), DataError);
}

TEST_CASE("missing fields load as held-out cells") {
  test::TempDir dir;
  write_schema(dir.path, 3, kCat);
  write_file(dir.path / "C.csv", "C_1\n1\nNA\n 2 \n");
  const auto ds = load_dataset(dir.path / "schema.json");
  CHECK(ds.observed(0, 0));
  CHECK_FALSE(ds.observed(1, 0));
  CHECK(ds.cell(2, 0)[0] == 2.0);
  CHECK_THROWS_AS(ds.cell(1, 0), std::logic_error);
}

TEST_CASE("cells are validated against their component") {
  MixedDataset ds({ComponentSpec::categorical("C", 2), ComponentSpec::real("R", 1)}, 2);
  CHECK_THROWS_AS(ds.set_category(0, 0, 2), DataError);
  const double half[1] = {0.5};
  CHECK_THROWS_AS(ds.set_cell(0, 0, half), DataError);
  const double two[2] = {1.0, 2.0};
  CHECK_THROWS_AS(ds.set_cell(0, 1, two), DataError);
  const double inf[1] = {INFINITY};
  CHECK_THROWS_AS(ds.set_cell(0, 1, inf), DataError);
  CHECK_THROWS_AS(MixedDataset({ComponentSpec::real("R", 1), ComponentSpec::real("R", 2)}, 1),
                  DataError);
  CHECK_THROWS_AS(ds.index_of("Z"), std::out_of_range);
}

TEST_CASE("hold-out masks uniformly chosen rows") {
  Rng rng(2);
  const auto ds = test::mixed_toy(30, rng);
  SUBCASE("count zero is the identity") {
    const auto h = apply_holdout(ds, {{"C", 0}}, rng);
    CHECK(h.masked.observed_count(1) == 30);
    CHECK((h.answers.count("C") == 0 || h.answers.at("C").rows.empty()));
  }
  SUBCASE("count n hides the whole component") {
    const auto h = apply_holdout(ds, {{"T", 30}}, rng);
    CHECK(h.masked.observed_count(2) == 0);
    CHECK(h.answers.at("T").rows.size() == 30);
  }
  SUBCASE("answers hold the original values") {
    const auto h = apply_holdout(ds, {{"R", 7}, {"C", 4}}, rng);
    CHECK(h.masked.observed_count(0) == 23);
    CHECK(h.masked.observed_count(1) == 26);
    const auto& a = h.answers.at("R");
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      CHECK_FALSE(h.masked.observed(a.rows[k], 0));
      const auto v = ds.cell(a.rows[k], 0);
      CHECK(std::vector<double>(v.begin(), v.end()) == a.values[k]);
    }
  }
  SUBCASE("over-masking is an error") {
    CHECK_THROWS_AS(apply_holdout(ds, {{"C", 31}}, rng), std::invalid_argument);
  }
}

TEST_CASE("hold-out rows are uniform over the dataset") {
  MixedDataset ds({ComponentSpec::categorical("C", 2)}, 10);
  for (std::size_t i = 0; i < 10; ++i) ds.set_category(i, 0, 0);
  Rng rng(3);
  std::vector<int> hits(10, 0);
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    const auto h = apply_holdout(ds, {{"C", 3}}, rng);
    for (std::size_t i : h.answers.at("C").rows) ++hits[i];
  }
  // Each row is hidden with probability 0.3.
  const double se = std::sqrt(0.3 * 0.7 / reps);
  for (int h : hits) CHECK(std::abs(h / double(reps) - 0.3) < 4.0 * se);
}

TEST_CASE("answer keys round trip") {
  AnswerKey key;
  key["T"] = {{1, 4}, {{0.5, 1.5}, {2.0, -1.0}}};
  key["C"] = {{2}, {{1.0}}};
  test::TempDir dir;
  save_answer_key(key, dir.path / "answers.json");
  const auto back = load_answer_key(dir.path / "answers.json");
  CHECK(back.at("T").rows == key["T"].rows);
  CHECK(back.at("T").values == key["T"].values);
  CHECK(back.at("C").values == key["C"].values);
}

TEST_CASE("scores for perfect, constant and random predictors") {
  ComponentAnswers truth{{0, 1, 2, 3}, {{1.0}, {2.0}, {4.0}, {5.0}}};
  CHECK(relative_predictive_error(truth, truth) == 0.0);
  CHECK(misclassification_percent(truth, truth) == 0.0);
  ComponentAnswers constant = truth;
  for (auto& v : constant.values) v = {3.0};
  CHECK(relative_predictive_error(truth, constant) == doctest::Approx(1.0));

  Rng rng(4);
  const std::size_t k = 4, n = 40000;
  ComponentAnswers labels, guesses;
  for (std::size_t i = 0; i < n; ++i) {
    labels.rows.push_back(i);
    guesses.rows.push_back(i);
    labels.values.push_back({static_cast<double>(uniform_index(rng, k))});
    guesses.values.push_back({static_cast<double>(uniform_index(rng, k))});
  }
  const double se = 100.0 * std::sqrt(0.75 * 0.25 / n);
  CHECK(std::abs(misclassification_percent(labels, guesses) - 75.0) < 4.0 * se);
  CHECK(score_predictions(labels, guesses, ComponentKind::categorical) ==
        misclassification_percent(labels, guesses));
}

TEST_CASE("misaligned predictions are rejected") {
  ComponentAnswers truth{{0, 1}, {{1.0}, {2.0}}};
  ComponentAnswers shifted{{0, 2}, {{1.0}, {2.0}}};
  ComponentAnswers wide{{0, 1}, {{1.0, 0.0}, {2.0, 0.0}}};
  CHECK_THROWS_AS(relative_predictive_error(truth, shifted), std::invalid_argument);
  CHECK_THROWS_AS(relative_predictive_error(truth, wide), std::invalid_argument);
  ComponentAnswers flat{{0, 1}, {{1.0}, {1.0}}};
  CHECK_THROWS_AS(relative_predictive_error(flat, flat), std::domain_error);
}
