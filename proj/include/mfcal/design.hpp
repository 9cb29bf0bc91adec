#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace mfcal {

/// n x d random Latin hypercube on [0, 1). Each column has exactly one
/// point in every stratum [k/n, (k+1)/n).
struct DesignMatrix {
  Eigen::MatrixXd points;
  std::uint64_t seed = 0;
};

/// Independent stratum permutation per column with uniform jitter inside
/// each stratum. Throws InvalidArgumentError for n = 0 or d = 0.
DesignMatrix lhs(std::size_t n, std::size_t d, std::uint64_t seed);

/// True if every column of `points` has one value per stratum.
bool is_latin_hypercube(const Eigen::MatrixXd& points);

}  // namespace mfcal
