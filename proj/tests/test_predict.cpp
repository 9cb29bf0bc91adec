#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfcal/error.hpp"
#include "mfcal/kernel.hpp"
#include "mfcal/log.hpp"
#include "mfcal/predict.hpp"
#include "support.hpp"

using namespace mfcal;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MultiFidelityDataSet small_dataset(std::uint64_t seed = 1) {
  auto raw = testing::random_dataset(4, 5, 8, {2, 1, 1, 1}, seed);
  raw.field.y = raw.field.y * 3.0 + VectorXd::Constant(raw.field.y.size(), 10.0);
  raw.high.y = raw.high.y * 3.0 + VectorXd::Constant(raw.high.y.size(), 10.0);
  raw.low.y = raw.low.y * 3.0 + VectorXd::Constant(raw.low.y.size(), 10.0);
  return standardize_responses(raw);
}

Chain short_chain(const MultiFidelityDataSet& ds, std::size_t retained, std::uint64_t seed = 9) {
  McmcConfig cfg;
  cfg.burn_in = 50;
  cfg.steps = 50 + retained;
  cfg.seed = seed;
  return run_chain(ds, PriorConfig{}, ParameterState::initial(ds.dims), cfg);
}

}  // namespace

TEST_CASE("conditional_mvn equals the partitioned-precision oracle") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const MatrixXd s = testing::random_spd(10, rng);
    const VectorXd y = testing::normal_vector(7, rng);
    const CovarianceAssembly a(s, BlockIndex{7, 0, 0, 3}, 0.0);
    const ConditionalNormal c = conditional_mvn(a, y);

    // Conditional covariance is the inverse of the precision's new-new block;
    // the mean is -P22^{-1} P21 y.
    const MatrixXd prec = s.fullPivLu().inverse();
    const MatrixXd p22_inv = prec.bottomRightCorner(3, 3).fullPivLu().inverse();
    const VectorXd mean = -p22_inv * prec.bottomLeftCorner(3, 7) * y;
    CHECK((c.mean - mean).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((c.covariance - p22_inv).cwiseAbs().maxCoeff() < 1e-9);
    CHECK_FALSE(c.clipped);
  }
}

TEST_CASE("conditional_mvn bivariate and uncorrelated cases") {
  MatrixXd s(2, 2);
  s << 1.0, 0.6, 0.6, 1.0;
  const CovarianceAssembly a(s, BlockIndex{1, 0, 0, 1}, 0.0);
  const auto c = conditional_mvn(a, VectorXd::Constant(1, 2.0));
  CHECK(c.mean[0] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(c.covariance(0, 0) == doctest::Approx(0.64).epsilon(1e-12));

  MatrixXd d = MatrixXd::Identity(3, 3) * 2.0;
  const CovarianceAssembly b(d, BlockIndex{2, 0, 0, 1}, 0.0);
  const auto u = conditional_mvn(b, VectorXd::Constant(2, 5.0));
  CHECK(u.mean[0] == 0.0);
  CHECK(u.covariance(0, 0) == 2.0);

  CHECK_THROWS_AS(conditional_mvn(b, VectorXd::Zero(3)), DimensionError);
  const CovarianceAssembly none(d, BlockIndex{3, 0, 0, 0}, 0.0);
  CHECK_THROWS_AS(conditional_mvn(none, VectorXd::Zero(3)), InvalidArgumentError);
}

TEST_CASE("coincident noise-free points are interpolated") {
  Rng rng(5);
  const MatrixXd pts = testing::uniform_matrix(12, 3, rng);
  const VectorXd rho = VectorXd::Constant(3, 0.4);
  MatrixXd all(15, 3);
  all << pts, pts.topRows(3);
  const MatrixXd s = correlation_matrix(all, rho) / 0.5;
  const VectorXd y = testing::normal_vector(12, rng);
  const CovarianceAssembly a(s, BlockIndex{0, 0, 12, 3});
  const auto c = conditional_mvn(a, y);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(c.mean[i] - y[i]) < 1e-4);
    CHECK(std::abs(c.covariance(i, i)) < 1e-4);
  }
}

TEST_CASE("more training data never raises predictive variance") {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const MatrixXd s = testing::random_spd(9, rng);
    // Same target row, training sets {0..6} and {0..7}.
    std::vector<int> order_small{0, 1, 2, 3, 4, 5, 6, 8};
    MatrixXd small(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) small(i, j) = s(order_small[i], order_small[j]);
    const VectorXd y = testing::normal_vector(8, rng);
    const auto big = conditional_mvn(CovarianceAssembly(s, BlockIndex{8, 0, 0, 1}, 0.0), y);
    const auto few = conditional_mvn(CovarianceAssembly(small, BlockIndex{7, 0, 0, 1}, 0.0), y.head(7));
    CHECK(big.covariance(0, 0) <= few.covariance(0, 0) + 1e-12);
  }
}

TEST_CASE("sample_quantile and rmspe examples") {
  CHECK(sample_quantile({4, 1, 3, 2}, 0.5) == 2.5);
  CHECK(sample_quantile({4, 1, 3, 2}, 0.25) == doctest::Approx(1.75));
  CHECK(sample_quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(sample_quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(sample_quantile({7}, 0.3) == 7.0);
  CHECK_THROWS_AS(sample_quantile({}, 0.5), InvalidArgumentError);

  const std::vector<double> a{1, 2}, b{1, 4};
  CHECK(rmspe(a, b) == doctest::Approx(std::sqrt(2.0)));
  CHECK(rmspe(a, a) == 0.0);
  const std::vector<double> c{1, 2, 3};
  CHECK_THROWS_AS(rmspe(a, c), DimensionError);
  CHECK_THROWS_AS(rmspe(std::vector<double>{}, std::vector<double>{}), InvalidArgumentError);
}

TEST_CASE("posterior_predictive moments, noise and back-transform") {
  const auto ds = small_dataset(2);
  const Chain chain = short_chain(ds, 40);
  Rng rng(8);
  const MatrixXd x_new = testing::uniform_matrix(5, 2, rng);

  PredictionOptions opt;
  opt.include_noise = false;
  const auto clean = posterior_predictive(ds, chain, x_new, opt);
  opt.include_noise = true;
  const auto noisy = posterior_predictive(ds, chain, x_new, opt);
  REQUIRE(clean.size() == 5);

  double inv_lambda_y = 0;
  for (std::size_t r = 0; r < chain.size(); ++r) inv_lambda_y += 1.0 / chain.state(r).precisions.lambda_y;
  inv_lambda_y /= static_cast<double>(chain.size());
  const double scale2 = ds.transform.invert_variance(1.0);

  const VectorXd pm = posterior_mean(ds, chain, x_new);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(clean[i].mean == doctest::Approx(noisy[i].mean).epsilon(1e-12));
    CHECK(noisy[i].variance - clean[i].variance == doctest::Approx(scale2 * inv_lambda_y).epsilon(1e-8));
    CHECK(clean[i].mean == doctest::Approx(pm[static_cast<Eigen::Index>(i)]).epsilon(1e-12));
    CHECK(clean[i].lower <= clean[i].upper);
    CHECK(noisy[i].upper - noisy[i].lower > 0.0);
    CHECK(clean[i].n_draws == chain.size());
  }

  // Reference: mean and variance assembled by hand from each sample.
  const VectorXd y = joint_response_vector(ds);
  VectorXd m = VectorXd::Zero(5), m2 = VectorXd::Zero(5);
  for (std::size_t r = 0; r < chain.size(); ++r) {
    const auto a = extend_for_prediction(ds, chain.state(r), x_new, false);
    const MatrixXd s11 = a.sigma_11();
    const MatrixXd s21 = a.sigma_21();
    const VectorXd mu = s21 * s11.fullPivLu().solve(y);
    const VectorXd var = (a.sigma_22() - s21 * s11.fullPivLu().solve(s21.transpose())).diagonal();
    m += mu;
    m2 += var + mu.cwiseAbs2();
  }
  m /= static_cast<double>(chain.size());
  m2 /= static_cast<double>(chain.size());
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(clean[static_cast<std::size_t>(i)].mean == doctest::Approx(ds.transform.invert(m[i])).epsilon(1e-8));
    CHECK(clean[static_cast<std::size_t>(i)].variance ==
          doctest::Approx(ds.transform.invert_variance(m2[i] - m[i] * m[i])).epsilon(1e-6));
  }
}

TEST_CASE("pooled draws converge to the reported moments") {
  const auto ds = small_dataset(3);
  const Chain chain = short_chain(ds, 1);
  const MatrixXd x_new = (MatrixXd(1, 2) << 0.4, 0.7).finished();
  PredictionOptions opt;
  opt.draws_per_sample = 200000;
  const auto s = posterior_predictive(ds, chain, x_new, opt).front();
  const double sd = std::sqrt(s.variance);
  CHECK(std::abs(s.draws_mean - s.mean) < 5 * sd / std::sqrt(200000.0));
  CHECK(s.lower == doctest::Approx(s.mean - 1.959964 * sd).epsilon(0.01));
  CHECK(s.upper == doctest::Approx(s.mean + 1.959964 * sd).epsilon(0.01));

  opt.level = 0.5;
  const auto narrow = posterior_predictive(ds, chain, x_new, opt).front();
  CHECK(narrow.upper - narrow.lower < s.upper - s.lower);
  CHECK(narrow.upper - narrow.lower == doctest::Approx(2 * 0.6744898 * sd).epsilon(0.01));
}

TEST_CASE("posterior_predictive is deterministic and thread-count invariant") {
  const auto ds = small_dataset(4);
  const Chain chain = short_chain(ds, 30);
  Rng rng(10);
  const MatrixXd x_new = testing::uniform_matrix(4, 2, rng);
  PredictionOptions opt;
  opt.draws_per_sample = 7;
  opt.seed = 123;
  const auto a = posterior_predictive(ds, chain, x_new, opt);
  opt.threads = 4;
  const auto b = posterior_predictive(ds, chain, x_new, opt);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean == b[i].mean);
    CHECK(a[i].variance == b[i].variance);
    CHECK(a[i].lower == b[i].lower);
    CHECK(a[i].upper == b[i].upper);
  }
  opt.seed = 124;
  const auto c = posterior_predictive(ds, chain, x_new, opt);
  CHECK(c[0].mean == a[0].mean);
  CHECK(c[0].lower != a[0].lower);

  opt.thin = 3;
  CHECK(posterior_predictive(ds, chain, x_new, opt)[0].n_draws == 10 * 7);
  CHECK(posterior_predictive(ds, chain, MatrixXd(0, 2), opt).empty());
  opt.level = 1.0;
  CHECK_THROWS_AS(posterior_predictive(ds, chain, x_new, opt), InvalidArgumentError);

  auto wrong = testing::random_dataset(4, 5, 8, {1, 1, 1, 1}, 5);
  CHECK_THROWS_AS(posterior_predictive(standardize_responses(wrong), chain, x_new.leftCols(1), PredictionOptions{}),
                  DimensionError);
}

TEST_CASE("leave-one-out returns one held-out prediction per field point") {
  const auto ds = small_dataset(6);
  FitOptions fit;
  fit.tune = false;
  fit.mcmc.steps = 120;
  fit.mcmc.burn_in = 20;
  set_log_level(LogLevel::quiet);
  const LooResult r = loo(ds, fit, PredictionOptions{}, 42, 2);
  const LooResult again = loo(ds, fit, PredictionOptions{}, 42, 1);
  set_log_level(LogLevel::warning);
  REQUIRE(r.predictions.size() == ds.n_field());
  CHECK(r.covered.size() == ds.n_field());
  const auto raw = ds.destandardized();
  for (std::size_t i = 0; i < ds.n_field(); ++i) {
    CHECK(r.actual[static_cast<Eigen::Index>(i)] == doctest::Approx(raw.field.y[static_cast<Eigen::Index>(i)]));
    CHECK(r.covered[i] == (r.predictions[i].lower <= r.actual[static_cast<Eigen::Index>(i)] &&
                           r.actual[static_cast<Eigen::Index>(i)] <= r.predictions[i].upper));
    CHECK(r.predictions[i].lower == again.predictions[i].lower);
    CHECK((r.predictions[i].x_new - raw.field.x.row(static_cast<Eigen::Index>(i)).transpose()).norm() == 0.0);
  }
  CHECK(r.n_covered() <= ds.n_field());

  auto one = testing::random_dataset(1, 3, 4, {2, 1, 1, 1}, 1);
  CHECK_THROWS_AS(loo(standardize_responses(one), fit, PredictionOptions{}, 1), InvalidArgumentError);
}
