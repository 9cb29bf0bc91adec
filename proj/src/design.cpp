#include "mfcal/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mfcal/error.hpp"
#include "mfcal/rng.hpp"

namespace mfcal {

DesignMatrix lhs(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) {
    throw InvalidArgumentError("lhs: n and d must both be at least 1 (got n=" + std::to_string(n) +
                               ", d=" + std::to_string(d) + ")");
  }
  Rng rng(seed);
  DesignMatrix out;
  out.seed = seed;
  out.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> strata(n);
  const double dn = static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    std::shuffle(strata.begin(), strata.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double k = static_cast<double>(strata[i]);
      double v = (k + uniform01(rng)) / dn;
      // rounding can land exactly on the upper edge
      const double edge = (k + 1.0) / dn;
      if (v >= edge) v = std::nextafter(edge, 0.0);
      if (v < k / dn) v = k / dn;
      out.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

bool is_latin_hypercube(const Eigen::MatrixXd& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) return false;
  const double dn = static_cast<double>(n);
  std::vector<char> seen(n);
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    std::fill(seen.begin(), seen.end(), 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const double v = points(i, j);
      if (!(v >= 0.0 && v < 1.0)) return false;
      auto k = static_cast<std::size_t>(std::floor(v * dn));
      // floor(v*n) can misplace values sitting next to a stratum edge
      if (k < n && v < static_cast<double>(k) / dn) --k;
      if (k + 1 < n && v >= static_cast<double>(k + 1) / dn) ++k;
      if (k >= n || seen[k]) return false;
      seen[k] = 1;
    }
  }
  return true;
}

}  // namespace mfcal
