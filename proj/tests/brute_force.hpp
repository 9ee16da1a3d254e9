#ifndef MROKIT_TESTS_BRUTE_FORCE_HPP
#define MROKIT_TESTS_BRUTE_FORCE_HPP

#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "mrokit/core.hpp"

namespace mrokit::testing {

/// Brute-force oracle for the bounded-weight inner problem: maximize
/// (1/n) sum_i w_i d_i over {0 <= w_i <= B, sum_i w_i = n} by enumerating
/// every vertex of the polytope (all-B subsets plus at most one fractional
/// coordinate). Exponential in n; fine for n <= 12.
inline double bounded_weight_lp_max(const std::vector<double>& d, double B) {
  const std::size_t n = d.size();
  const double n_real = static_cast<double>(n);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < (1u << n); ++mask) {
    double mass = 0.0, dot = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        mass += B;
        dot += B * d[i];
      }
    if (mass > n_real + 1e-9) continue;
    const double rem = n_real - mass;
    if (rem <= 1e-12) {
      best = std::max(best, dot / n_real);
      continue;
    }
    if (rem > B + 1e-9) continue;  // no single coordinate can absorb the rest
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (1u << j)) continue;
      best = std::max(best, (dot + rem * d[j]) / n_real);
    }
  }
  return best;
}

/// A dataset whose empirical risk table is exactly a given |F| x |W|
/// matrix: one sample per weight column (tagged), identity-scaled weights,
/// absolute loss against zero labels, and candidates that read the tag.
struct MatrixGameInstance {
  Dataset data;
  WeightFamily family;
  FunctionClass function_class;
  LossSpec loss;
  std::vector<std::vector<double>> risk_matrix;  // [candidate][weight]
};

inline MatrixGameInstance matrix_game_instance(
    const std::vector<std::vector<double>>& risk_matrix) {
  const std::size_t K = risk_matrix.size();
  const std::size_t W = risk_matrix.front().size();
  std::vector<Sample> samples;
  Matrix weights(W, W, 0.0);
  for (std::size_t j = 0; j < W; ++j) {
    samples.push_back(Sample{{}, 0.0, static_cast<int>(j)});
    weights(j, j) = static_cast<double>(W);
  }
  WeightFamily family;
  for (std::size_t j = 0; j < W; ++j) {
    family.names.push_back("w" + std::to_string(j));
    family.per_weight_bound.push_back(static_cast<double>(W));
  }
  family.family_bound = static_cast<double>(W);
  std::vector<std::vector<double>> tables(K);
  for (std::size_t k = 0; k < K; ++k) tables[k] = risk_matrix[k];
  return MatrixGameInstance{
      Dataset(std::move(samples), std::move(weights), family.names),
      std::move(family), FunctionClass::finite(std::move(tables)),
      LossSpec::absolute(1.0), risk_matrix};
}

inline MatrixGameInstance random_matrix_game(std::mt19937_64& rng, std::size_t max_rows,
                                             std::size_t max_cols) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t K = 1 + rng() % max_rows;
  const std::size_t W = 2 + rng() % (max_cols - 1);
  std::vector<std::vector<double>> risks(K, std::vector<double>(W));
  for (auto& row : risks)
    for (double& v : row) v = unif(rng);
  return matrix_game_instance(risks);
}

}  // namespace mrokit::testing

#endif  // MROKIT_TESTS_BRUTE_FORCE_HPP
