// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace itf {

/// Occupancy counts for a two-level allocation: top labels c0[i] and, per
/// component j, lower labels c[j][i]. Labels are zero-based.
class CountTables {
 public:
  CountTables() = default;
  CountTables(std::size_t components);

  static CountTables compute(std::span<const std::size_t> c0,
                             const std::vector<std::vector<std::size_t>>& c);

  std::size_t components() const { return mj_.size(); }

  /// m_{0h}; zero past the end.
  int top(std::size_t h) const { return h < m0_.size() ? m0_[h] : 0; }
  std::span<const int> top_counts() const { return m0_; }
  /// m_{jhk}; zero past the end.
  int lower(std::size_t j, std::size_t h, std::size_t k) const;
  /// Row m_{jh.}; empty when the top label was never used.
  std::span<const int> lower_row(std::size_t j, std::size_t h) const;
  /// Column sums sum_h m_{jhk}.
  int lower_total(std::size_t j, std::size_t k) const;

  /// One past the largest occupied top label (k*_0 in one-based terms).
  std::size_t top_extent() const;
  /// One past the largest occupied lower label of component j over all rows.
  std::size_t lower_extent(std::size_t j) const;

  std::vector<std::size_t> occupied_top() const;
  std::vector<std::size_t> occupied_lower(std::size_t j) const;
  /// Distinct lower labels of component j inside top cluster h.
  std::size_t occupied_in_row(std::size_t j, std::size_t h) const;

  void add(std::size_t h, std::span<const std::size_t> lower_labels);
  void remove(std::size_t h, std::span<const std::size_t> lower_labels);
  void move_lower(std::size_t j, std::size_t h, std::size_t from, std::size_t to);

  void swap_top(std::size_t a, std::size_t b);
  void swap_lower(std::size_t j, std::size_t a, std::size_t b);

  /// Equality ignoring trailing zero entries.
  friend bool operator==(const CountTables& a, const CountTables& b);

 private:
  void reserve_top(std::size_t h);
  void reserve_lower(std::size_t j, std::size_t h, std::size_t k);

  std::vector<int> m0_;
  // mj_[j][h][k]
  std::vector<std::vector<std::vector<int>>> mj_;
};

}  // namespace itf
