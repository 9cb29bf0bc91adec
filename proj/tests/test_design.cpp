#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfcal/design.hpp"
#include "mfcal/error.hpp"

using namespace mfcal;

TEST_CASE("lhs puts one point in every stratum of every column") {
  for (std::size_t n : {1u, 2u, 7u, 40u, 250u}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const DesignMatrix d = lhs(n, 4, seed);
      REQUIRE(d.points.rows() == static_cast<Eigen::Index>(n));
      REQUIRE(d.points.cols() == 4);
      CHECK(d.seed == seed);
      for (Eigen::Index j = 0; j < 4; ++j) {
        std::vector<int> hits(n, 0);
        for (Eigen::Index i = 0; i < d.points.rows(); ++i) {
          const double v = d.points(i, j);
          REQUIRE(v >= 0.0);
          REQUIRE(v < 1.0);
          ++hits[static_cast<std::size_t>(std::floor(v * static_cast<double>(n)))];
        }
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
      }
      CHECK(is_latin_hypercube(d.points));
    }
  }
}

TEST_CASE("lhs is seed-deterministic") {
  CHECK(lhs(20, 3, 5).points == lhs(20, 3, 5).points);
  CHECK(lhs(20, 3, 5).points != lhs(20, 3, 6).points);
  // columns are permuted independently
  const auto p = lhs(30, 2, 1).points;
  CHECK(p.col(0) != p.col(1));
}

TEST_CASE("lhs marginals are uniform on average") {
  double sum = 0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = lhs(5, 2, seed).points;
    sum += p.sum();
    count += static_cast<std::size_t>(p.size());
  }
  // Within-stratum jitter is U(0, 1/5): sd of the mean is tiny.
  CHECK(sum / static_cast<double>(count) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("lhs argument errors and detector negatives") {
  CHECK_THROWS_AS(lhs(0, 2, 1), InvalidArgumentError);
  CHECK_THROWS_AS(lhs(3, 0, 1), InvalidArgumentError);
  Eigen::MatrixXd bad(3, 1);
  bad << 0.1, 0.2, 0.9;
  CHECK_FALSE(is_latin_hypercube(bad));
  bad << 0.1, 0.5, 0.9;
  CHECK(is_latin_hypercube(bad));
  bad << 0.1, 0.5, 1.2;
  CHECK_FALSE(is_latin_hypercube(bad));
}
