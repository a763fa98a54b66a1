// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "itf/counts.hpp"
#include "support.hpp"

using namespace itf;

TEST_CASE("tables computed from labels") {
  const std::vector<std::size_t> c0{0, 2, 2, 0, 2};
  const std::vector<std::vector<std::size_t>> c{{1, 0, 0, 1, 3}};
  const auto t = CountTables::compute(c0, c);
  CHECK(t.top(0) == 2);
  CHECK(t.top(1) == 0);
  CHECK(t.top(2) == 3);
  CHECK(t.top(7) == 0);
  CHECK(t.top_extent() == 3);
  CHECK(t.lower_extent(0) == 4);
  CHECK(t.lower(0, 0, 1) == 2);
  CHECK(t.lower(0, 2, 0) == 2);
  CHECK(t.lower(0, 2, 3) == 1);
  CHECK(t.lower_total(0, 1) == 2);
  CHECK(t.occupied_top() == std::vector<std::size_t>{0, 2});
  CHECK(t.occupied_lower(0) == std::vector<std::size_t>{0, 1, 3});
  CHECK(t.occupied_in_row(0, 2) == 2);
  CHECK(t.lower_row(0, 1).empty());
}

TEST_CASE("row sums match top counts") {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + uniform_index(rng, 40), p = 1 + uniform_index(rng, 3);
    std::vector<std::size_t> c0(n);
    std::vector<std::vector<std::size_t>> c(p, std::vector<std::size_t>(n));
    for (auto& h : c0) h = uniform_index(rng, 6);
    for (auto& row : c) for (auto& k : row) k = uniform_index(rng, 5);
    const auto t = CountTables::compute(c0, c);
    int total = 0;
    for (int m : t.top_counts()) total += m;
    CHECK(total == static_cast<int>(n));
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t h = 0; h < t.top_extent(); ++h) {
        int s = 0;
        for (int m : t.lower_row(j, h)) s += m;
        CHECK(s == t.top(h));
      }
    }
  }
}

TEST_CASE("incremental edits agree with a recount") {
  Rng rng(2);
  const std::size_t n = 30, p = 2;
  std::vector<std::size_t> c0(n, 0);
  std::vector<std::vector<std::size_t>> c(p, std::vector<std::size_t>(n, 0));
  auto t = CountTables::compute(c0, c);
  for (int step = 0; step < 2000; ++step) {
    const std::size_t i = uniform_index(rng, n);
    std::vector<std::size_t> labels{c[0][i], c[1][i]};
    switch (uniform_index(rng, 4)) {
      case 0: {
        t.remove(c0[i], labels);
        c0[i] = uniform_index(rng, 5);
        t.add(c0[i], labels);
        break;
      }
      case 1: {
        const std::size_t j = uniform_index(rng, p), k = uniform_index(rng, 4);
        t.move_lower(j, c0[i], c[j][i], k);
        c[j][i] = k;
        break;
      }
      case 2: {
        const std::size_t a = uniform_index(rng, 5), b = uniform_index(rng, 5);
        for (auto& h : c0) h = h == a ? b : h == b ? a : h;
        t.swap_top(a, b);
        break;
      }
      default: {
        const std::size_t j = uniform_index(rng, p);
        const std::size_t a = uniform_index(rng, 4), b = uniform_index(rng, 4);
        for (auto& k : c[j]) k = k == a ? b : k == b ? a : k;
        t.swap_lower(j, a, b);
      }
    }
    REQUIRE(t == CountTables::compute(c0, c));
  }
}

TEST_CASE("equality ignores trailing zeros") {
  CountTables a(1), b(1);
  const std::size_t l0[1] = {0}, l3[1] = {3};
  a.add(0, l0);
  b.add(0, l0);
  b.add(4, l3);
  b.remove(4, l3);
  CHECK(a == b);
}

TEST_CASE("removing from empty cells is a logic error") {
  CountTables t(1);
  const std::size_t l0[1] = {0}, l1[1] = {1};
  CHECK_THROWS_AS(t.remove(0, l0), std::logic_error);
  t.add(0, l0);
  CHECK_THROWS_AS(t.remove(0, l1), std::logic_error);
  CHECK_THROWS_AS(t.move_lower(0, 0, 1, 0), std::logic_error);
  const std::size_t two[2] = {0, 0};
  CHECK_THROWS_AS(t.add(0, two), std::invalid_argument);
}
