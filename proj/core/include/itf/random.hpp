// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace itf {

/// The single engine type used throughout. Its textual state is part of
/// every checkpoint, so swapping it changes the on-disk format.
using Rng = std::mt19937_64;

/// Uniform on the open interval (0, 1); never returns 0 or 1.
double uniform01(Rng& rng);

double uniform(Rng& rng, double lo, double hi);
double normal(Rng& rng, double mean = 0.0, double sd = 1.0);

/// Gamma with the given shape and *rate*.
double gamma(Rng& rng, double shape, double rate);

/// Beta(a, b), clamped into the open unit interval.
double beta(Rng& rng, double a, double b);

std::size_t uniform_index(Rng& rng, std::size_t n);

/// Draws an index with probability proportional to exp(log_weights[k]).
/// Entries equal to -inf are never chosen. Throws if all are -inf.
std::size_t categorical_log(Rng& rng, std::span<const double> log_weights);

double log_sum_exp(std::span<const double> values);

std::string rng_state(const Rng& rng);
void set_rng_state(Rng& rng, const std::string& state);

/// Deterministic seed derivation for independent chains (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace itf
