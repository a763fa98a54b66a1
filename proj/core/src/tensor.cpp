// Apache License, Version 2.0, refer to LICENSE.txt

#include "itf/tensor.hpp"

#include <stdexcept>

namespace itf {

double tensor_cell_prob(const TensorView& t, std::span<const std::size_t> cell) {
  if (t.psi.size() != t.lambda.size()) {
    throw std::invalid_argument("tensor: one psi row set per top-level stick");
  }
  double total = 0.0;
  for (std::size_t h = 0; h < t.lambda.size(); ++h) {
    const auto& rows = t.psi[h];
    if (rows.size() != cell.size()) {
      throw std::invalid_argument("tensor: cell arity does not match components");
    }
    double prod = t.lambda.weight(h);
    for (std::size_t j = 0; j < cell.size(); ++j) {
      if (cell[j] >= rows[j].size()) {
        throw std::out_of_range(
            "tensor: lower index not instantiated; extend the psi rows first");
      }
      prod *= rows[j].weight(cell[j]);
    }
    total += prod;
  }
  return total;
}

double tensor_instantiated_mass(const TensorView& t) {
  double total = 0.0;
  for (std::size_t h = 0; h < t.lambda.size(); ++h) {
    double prod = t.lambda.weight(h);
    for (const auto& row : t.psi.at(h)) prod *= row.mass();
    total += prod;
  }
  return total;
}

double tensor_remainder(const TensorView& t) {
  double rem = t.lambda.leftover();
  for (std::size_t h = 0; h < t.lambda.size(); ++h) {
    double prod = 1.0;
    for (const auto& row : t.psi.at(h)) prod *= row.mass();
    rem += t.lambda.weight(h) * (1.0 - prod);
  }
  return rem;
}

void extend_tensor(TensorView& t, double epsilon, Rng& rng) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::domain_error("extend_tensor: epsilon must lie in (0, 1)");
  }
  if (t.psi.empty() && t.lambda.empty()) {
    throw std::invalid_argument("extend_tensor: need component concentrations");
  }
  const std::size_t p = t.components();
  std::vector<double> betas(p);
  for (std::size_t j = 0; j < p; ++j) betas[j] = t.psi.front()[j].concentration();
  // Split the budget: each of the p + 1 levels leaves at most epsilon/(p+1).
  const double share = epsilon / static_cast<double>(p + 1);
  extend_sticks_to_leftover(t.lambda, share, rng);
  while (t.psi.size() < t.lambda.size()) {
    std::vector<StickMeasure> rows;
    for (std::size_t j = 0; j < p; ++j) rows.emplace_back(betas[j]);
    t.psi.push_back(std::move(rows));
  }
  for (auto& rows : t.psi) {
    for (auto& row : rows) extend_sticks_to_leftover(row, share, rng);
  }
}

TensorView draw_tensor_prior(double alpha, std::span<const double> betas,
                             double epsilon, Rng& rng) {
  TensorView t{StickMeasure(alpha), {}};
  // Seed one row set so extend_tensor can read the concentrations.
  std::vector<StickMeasure> rows;
  for (double b : betas) rows.emplace_back(b);
  t.lambda.push_back(beta(rng, 1.0, alpha));
  t.psi.push_back(std::move(rows));
  extend_tensor(t, epsilon, rng);
  return t;
}

}  // namespace itf
