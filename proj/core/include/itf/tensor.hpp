// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "itf/random.hpp"
#include "itf/stick.hpp"

namespace itf {

/// Top-level weights lambda plus, for every top-level index h and component
/// j, a lower stick measure psi[h][j]. Cell probabilities are
///   pi(c_1..c_p) = sum_h lambda_h prod_j psi[h][j]_{c_j}.
struct TensorView {
  StickMeasure lambda;
  std::vector<std::vector<StickMeasure>> psi;

  std::size_t components() const { return psi.empty() ? 0 : psi.front().size(); }
};

/// Truncated cell probability over the instantiated top-level sticks.
/// Throws std::out_of_range if some psi row does not reach the requested
/// index; extend the rows first.
double tensor_cell_prob(const TensorView& t, std::span<const std::size_t> cell);

/// Sum of tensor_cell_prob over every instantiated cell, in closed form
/// (sum_h lambda_h prod_j mass(psi[h][j])).
double tensor_instantiated_mass(const TensorView& t);

/// Upper bound on the mass outside the instantiated cells:
/// leftover(lambda) + sum_h lambda_h * (1 - prod_j mass(psi[h][j])).
double tensor_remainder(const TensorView& t);

/// Draws a tensor from the ITF prior, extending every measure until the
/// total uninstantiated mass is below epsilon.
TensorView draw_tensor_prior(double alpha, std::span<const double> betas,
                             double epsilon, Rng& rng);

/// Extends lambda and every psi row so that tensor_remainder < epsilon.
void extend_tensor(TensorView& t, double epsilon, Rng& rng);

}  // namespace itf
