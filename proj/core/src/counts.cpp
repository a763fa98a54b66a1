// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/counts.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace itf {
namespace {

std::size_t extent(std::span<const int> v) {
  std::size_t e = v.size();
  while (e > 0 && v[e - 1] == 0) --e;
  return e;
}

bool equal_trimmed(std::span<const int> a, std::span<const int> b) {
  const std::size_t ea = extent(a);
  return ea == extent(b) && std::equal(a.begin(), a.begin() + ea, b.begin());
}

}  // namespace

CountTables::CountTables(std::size_t components) : mj_(components) {}

CountTables CountTables::compute(std::span<const std::size_t> c0,
                                 const std::vector<std::vector<std::size_t>>& c) {
  CountTables t(c.size());
  std::vector<std::size_t> labels(c.size());
  for (std::size_t i = 0; i < c0.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) labels[j] = c[j].at(i);
    t.add(c0[i], labels);
  }
  return t;
}

int CountTables::lower(std::size_t j, std::size_t h, std::size_t k) const {
  const auto& rows = mj_.at(j);
  if (h >= rows.size() || k >= rows[h].size()) return 0;
  return rows[h][k];
}

std::span<const int> CountTables::lower_row(std::size_t j, std::size_t h) const {
  const auto& rows = mj_.at(j);
  if (h >= rows.size()) return {};
  return rows[h];
}

int CountTables::lower_total(std::size_t j, std::size_t k) const {
  int total = 0;
  for (const auto& row : mj_.at(j)) {
    if (k < row.size()) total += row[k];
  }
  return total;
}

std::size_t CountTables::top_extent() const { return extent(m0_); }

std::size_t CountTables::lower_extent(std::size_t j) const {
  std::size_t e = 0;
  for (const auto& row : mj_.at(j)) e = std::max(e, extent(row));
  return e;
}

std::vector<std::size_t> CountTables::occupied_top() const {
  std::vector<std::size_t> out;
  for (std::size_t h = 0; h < m0_.size(); ++h) {
    if (m0_[h] > 0) out.push_back(h);
  }
  return out;
}

std::vector<std::size_t> CountTables::occupied_lower(std::size_t j) const {
  std::vector<std::size_t> out;
  const std::size_t e = lower_extent(j);
  for (std::size_t k = 0; k < e; ++k) {
    if (lower_total(j, k) > 0) out.push_back(k);
  }
  return out;
}

std::size_t CountTables::occupied_in_row(std::size_t j, std::size_t h) const {
  const auto row = lower_row(j, h);
  return static_cast<std::size_t>(
      std::count_if(row.begin(), row.end(), [](int m) { return m > 0; }));
}

void CountTables::reserve_top(std::size_t h) {
  if (h >= m0_.size()) m0_.resize(h + 1, 0);
}

void CountTables::reserve_lower(std::size_t j, std::size_t h, std::size_t k) {
  auto& rows = mj_.at(j);
  if (h >= rows.size()) rows.resize(h + 1);
  if (k >= rows[h].size()) rows[h].resize(k + 1, 0);
}

void CountTables::add(std::size_t h, std::span<const std::size_t> lower_labels) {
  if (lower_labels.size() != mj_.size()) {
    throw std::invalid_argument("counts: wrong number of lower labels");
  }
  reserve_top(h);
  ++m0_[h];
  for (std::size_t j = 0; j < mj_.size(); ++j) {
    reserve_lower(j, h, lower_labels[j]);
    ++mj_[j][h][lower_labels[j]];
  }
}

void CountTables::remove(std::size_t h, std::span<const std::size_t> lower_labels) {
  if (lower_labels.size() != mj_.size()) {
    throw std::invalid_argument("counts: wrong number of lower labels");
  }
  if (top(h) <= 0) throw std::logic_error("counts: removing from an empty cluster");
  for (std::size_t j = 0; j < mj_.size(); ++j) {
    if (lower(j, h, lower_labels[j]) <= 0) {
      throw std::logic_error("counts: removing from an empty lower cell");
    }
  }
  --m0_[h];
  for (std::size_t j = 0; j < mj_.size(); ++j) --mj_[j][h][lower_labels[j]];
}

void CountTables::move_lower(std::size_t j, std::size_t h, std::size_t from,
                             std::size_t to) {
  if (lower(j, h, from) <= 0) {
    throw std::logic_error("counts: moving from an empty lower cell");
  }
  reserve_lower(j, h, to);
  --mj_[j][h][from];
  ++mj_[j][h][to];
}

void CountTables::swap_top(std::size_t a, std::size_t b) {
  reserve_top(std::max(a, b));
  std::swap(m0_[a], m0_[b]);
  for (auto& rows : mj_) {
    if (std::max(a, b) >= rows.size()) rows.resize(std::max(a, b) + 1);
    std::swap(rows[a], rows[b]);
  }
}

void CountTables::swap_lower(std::size_t j, std::size_t a, std::size_t b) {
  for (auto& row : mj_.at(j)) {
    if (std::max(a, b) >= row.size()) {
      if (extent(row) <= std::min(a, b)) continue;
      row.resize(std::max(a, b) + 1, 0);
    }
    std::swap(row[a], row[b]);
  }
}

bool operator==(const CountTables& a, const CountTables& b) {
  if (!equal_trimmed(a.m0_, b.m0_) || a.mj_.size() != b.mj_.size()) return false;
  for (std::size_t j = 0; j < a.mj_.size(); ++j) {
    const std::size_t rows = std::max(a.mj_[j].size(), b.mj_[j].size());
    for (std::size_t h = 0; h < rows; ++h) {
      if (!equal_trimmed(a.lower_row(j, h), b.lower_row(j, h))) return false;
    }
  }
  return true;
}

}  // namespace itf
