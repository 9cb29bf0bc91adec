#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mfcal/error.hpp"
#include "mfcal/inference.hpp"
#include "mfcal/log.hpp"
#include "support.hpp"

using namespace mfcal;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Dense LU route, independent of the Cholesky factor.
double dense_loglik(const MatrixXd& sigma, const VectorXd& y) {
  Eigen::FullPivLU<MatrixXd> lu(sigma);
  const double logdet = lu.matrixLU().diagonal().cwiseAbs().array().log().sum();
  return -0.5 * logdet - 0.5 * y.dot(lu.solve(y));
}

// Prior written out term by term from the printed densities.
double reference_prior(const ParameterState& s, const PriorConfig& p) {
  auto gam = [](double l, double a, double b) { return a * std::log(l) - b * l; };
  auto bet = [&](const VectorXd& r) {
    double t = 0;
    for (double v : r) t += (p.beta_a - 1) * std::log(v) + (p.beta_b - 1) * std::log(1 - v);
    return t;
  };
  return gam(s.precisions.lambda_eta_l, p.a_eta_l, p.b_eta_l) + gam(s.precisions.lambda_2, p.a_star, p.b_star) +
         gam(s.precisions.lambda_f, p.a_star, p.b_star) +
         gam(s.precisions.lambda_y, p.a_y.value_or(p.a_star), p.b_y.value_or(p.b_star)) +
         bet(s.correlations.rho_eta_l) + bet(s.correlations.rho_2) + bet(s.correlations.rho_f);
}

MultiFidelityDataSet small_dataset(std::uint64_t seed = 1) {
  return standardize_responses(testing::random_dataset(3, 4, 6, {2, 1, 1, 1}, seed));
}

ParameterId id(ParameterGroup g, std::size_t i = 0) { return {g, i}; }

}  // namespace

TEST_CASE("log_likelihood examples") {
  const CovarianceAssembly eye(MatrixXd::Identity(3, 3), BlockIndex{3, 0, 0, 0}, 0.0);
  CHECK(log_likelihood(VectorXd::Zero(3), eye) == 0.0);
  const CovarianceAssembly four(MatrixXd::Constant(1, 1, 4.0), BlockIndex{1, 0, 0, 0}, 0.0);
  CHECK(log_likelihood(VectorXd::Constant(1, 2.0), four) == doctest::Approx(-1.1931472).epsilon(1e-7));
  CHECK_THROWS_AS(log_likelihood(VectorXd::Zero(2), eye), DimensionError);
}

TEST_CASE("log_likelihood agrees with a dense LU oracle") {
  Rng rng(99);
  for (int n = 0; n < 200; ++n) {
    const MatrixXd s = testing::random_spd(8, rng);
    const VectorXd y = testing::normal_vector(8, rng);
    const CovarianceAssembly a(s, BlockIndex{8, 0, 0, 0}, 0.0);
    CHECK(std::abs(log_likelihood(y, a) - dense_loglik(s, y)) < 1e-10);
  }
}

TEST_CASE("log_prior examples and support") {
  const Dimensions dims{2, 1, 1, 1};
  ParameterState s = ParameterState::initial(dims);
  PriorConfig p;
  SUBCASE("gamma term for lambda_eta_l at 1 with a = b = 5") {
    ParameterState t = s;
    t.precisions.lambda_eta_l = 2.0;
    const double contribution_at_2 = 5 * std::log(2.0) - 10;
    CHECK(log_prior(s, p) - log_prior(t, p) == doctest::Approx(-5.0 - contribution_at_2).epsilon(1e-12));
  }
  SUBCASE("beta term at 0.5") {
    ParameterState t = s;
    t.correlations.rho_f[0] = 0.5;
    ParameterState base = s;
    base.correlations.rho_f[0] = 1e-9;  // term is ~0 here: (b - 1) ln(1 - 1e-9)
    const double base_term = (0.001 - 1) * std::log1p(-1e-9);
    CHECK(log_prior(t, p) - log_prior(base, p) + base_term == doctest::Approx(0.6925).epsilon(1e-4));
  }
  SUBCASE("support") {
    s.theta.theta_f[0] = 1.2;
    CHECK(log_prior(s, p) == -kInf);
    s.theta.theta_f[0] = -0.01;
    CHECK(log_prior(s, p) == -kInf);
  }
  SUBCASE("lambda_y cap and override") {
    s.precisions.lambda_y = 2e6;
    CHECK(log_prior(s, p) == -kInf);
    p.lambda_y_cap = 0.0;
    CHECK(std::isfinite(log_prior(s, p)));
    p.a_y = 10000.0;
    p.b_y = 10000.0;
    s.precisions.lambda_y = 1.0;
    CHECK(log_prior(s, p) == doctest::Approx(reference_prior(s, p)).epsilon(1e-12));
  }
  SUBCASE("matches the written-out density on random states") {
    Rng rng(4);
    for (int n = 0; n < 500; ++n) {
      const ParameterState r = testing::random_state(dims, rng);
      CHECK(log_prior(r, p) == doctest::Approx(reference_prior(r, p)).epsilon(1e-12));
    }
  }
  SUBCASE("single-level form ignores the delta_2 block") {
    const Dimensions d1{2, 1, 0, 1};
    ParameterState r = ParameterState::initial(d1);
    r.correlations.rho_2.resize(0);
    r.precisions.lambda_2 = -1.0;  // not part of the model
    CHECK(std::isfinite(log_prior(r, p, ModelForm::single_level)));
  }
  CHECK_THROWS_AS([] { PriorConfig q; q.b_star = 0; q.validate(); }(), InvalidArgumentError);
}

TEST_CASE("log_posterior is likelihood plus prior") {
  const auto ds = small_dataset();
  Rng rng(5);
  const PriorConfig p;
  for (int n = 0; n < 20; ++n) {
    const ParameterState s = testing::random_state(ds.dims, rng);
    const double lp = log_prior(s, p);
    const double ll = log_likelihood(joint_response_vector(ds), assemble_sigma_Y(ds, s));
    CHECK(std::abs(log_posterior(ds, s, p) - (ll + lp)) <= 1e-12 * std::max(1.0, std::abs(ll + lp)));
  }
  ParameterState out = ParameterState::initial(ds.dims);
  out.theta.theta_l[0] = 1.5;
  CHECK(log_posterior(ds, out, p) == -kInf);
}

TEST_CASE("PosteriorEvaluator matches a full recomputation for every parameter") {
  const auto ds = small_dataset(3);
  const PriorConfig p;
  Rng rng(6);
  PosteriorEvaluator eval(ds, p);
  ParameterState s = testing::random_state(ds.dims, rng);
  CHECK(eval.reset(s) == doctest::Approx(log_posterior(ds, s, p)).epsilon(1e-12));
  const auto layout = parameter_layout(ds.dims, ds.form);
  for (int round = 0; round < 3; ++round) {
    for (const auto& pid : layout) {
      const double v = get_parameter(s, pid);
      const double proposal = pid.is_precision() ? v * (0.8 + 0.4 * uniform01(rng))
                                                 : std::clamp(v + 0.2 * (uniform01(rng) - 0.5), 0.01, 0.99);
      ParameterState t = s;
      set_parameter(t, pid, proposal);
      const double expect = log_posterior(ds, t, p);
      CHECK(eval.propose(pid, proposal) == doctest::Approx(expect).epsilon(1e-10));
      if (uniform01(rng) < 0.5) {
        eval.accept();
        s = t;
        CHECK(eval.current() == doctest::Approx(expect).epsilon(1e-10));
      }
    }
  }
  CHECK(flatten(eval.state(), layout) == flatten(s, layout));
}

TEST_CASE("metropolis_step on a flat posterior") {
  const auto ds = small_dataset();
  PosteriorEvaluator eval(ds, PriorConfig{}, false);
  eval.reset(ParameterState::initial(ds.dims));
  Rng rng(12);
  const ParameterId th = id(ParameterGroup::theta_f);

  SUBCASE("ties are accepted") {
    for (int i = 0; i < 1000; ++i) CHECK(metropolis_step(eval, th, 1e-6, rng));
  }
  SUBCASE("long-run acceptance equals the interior fraction") {
    // For v ~ U(0,1) and width w, P(v' in [0,1]) = 1 - w/4.
    std::size_t acc = 0;
    const std::size_t n = 50000;
    for (std::size_t i = 0; i < n; ++i) acc += metropolis_step(eval, th, 0.2, rng);
    const double rate = static_cast<double>(acc) / n;
    const double se = std::sqrt(0.95 * 0.05 / n);
    CHECK(rate > 0.9);
    CHECK(std::abs(rate - 0.95) < 5 * se * 3);  // autocorrelated draws: inflate
  }
  SUBCASE("proposals outside the support are rejected") {
    ParameterState s = ParameterState::initial(ds.dims);
    s.theta.theta_f[0] = 0.0;
    eval.reset(s);
    // From 0 with width 0.2 every rejection is a negative proposal.
    for (int i = 0; i < 2000; ++i) {
      set_parameter(s, th, 0.0);
      eval.reset(s);
      const bool ok = metropolis_step(eval, th, 0.2, rng);
      if (ok) CHECK(eval.state().theta.theta_f[0] >= 0.0);
      else CHECK(eval.state().theta.theta_f[0] == 0.0);
    }
  }
}

TEST_CASE("hastings_step_precision") {
  const auto ds = small_dataset();
  const ParameterId lam = id(ParameterGroup::lambda_eta_l);

  SUBCASE("acceptance on a flat target includes the reversibility guard") {
    // r = lambda'/lambda ~ U(0.85, 1.15). Irreversible for r < 1/1.15, else
    // accepted with min(1, 1/r): (1 - 1/1.15 + ln 1.15) / 0.3.
    PriorConfig flat;
    flat.a_eta_l = 1e-300;
    flat.b_eta_l = 1e-300;
    PosteriorEvaluator eval(ds, flat, false);
    eval.reset(ParameterState::initial(ds.dims));
    Rng rng(21);
    std::size_t acc = 0;
    const std::size_t n = 200000;
    for (std::size_t i = 0; i < n; ++i) acc += hastings_step_precision(eval, lam, rng);
    const double expect = (1.0 - 1.0 / 1.15 + std::log(1.15)) / 0.3;
    CHECK(static_cast<double>(acc) / n == doctest::Approx(expect).epsilon(0.01));
  }
  SUBCASE("prior-only chain recovers the printed gamma mean") {
    PosteriorEvaluator eval(ds, PriorConfig{}, false);
    eval.reset(ParameterState::initial(ds.dims));
    Rng rng(22);
    double sum = 0;
    const int n = 50000, thin = 10;
    for (int i = 0; i < 2000; ++i) hastings_step_precision(eval, lam, rng);
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < thin; ++t) hastings_step_precision(eval, lam, rng);
      sum += eval.state().precisions.lambda_eta_l;
    }
    CHECK(sum / n == doctest::Approx(1.2).epsilon(0.05));
  }
  SUBCASE("only precisions are accepted") {
    PosteriorEvaluator eval(ds, PriorConfig{}, false);
    eval.reset(ParameterState::initial(ds.dims));
    Rng rng(1);
    CHECK_THROWS_AS(hastings_step_precision(eval, id(ParameterGroup::theta_f), rng), InvalidArgumentError);
  }
}

TEST_CASE("detailed balance on a discretized one-dimensional posterior") {
  // theta_l alone moves under the full likelihood; flows between bins of a
  // stationary reversible chain are symmetric.
  const auto ds = small_dataset(8);
  PosteriorEvaluator eval(ds, PriorConfig{});
  ParameterState s = ParameterState::initial(ds.dims);
  s.correlations = CorrelationParams(VectorXd::Constant(4, 0.3), VectorXd::Constant(4, 0.5), VectorXd::Constant(2, 0.5));
  eval.reset(s);
  Rng rng(31);
  const ParameterId th = id(ParameterGroup::theta_l);
  const int bins = 8;
  std::map<std::pair<int, int>, double> flow;
  auto bin = [&](double v) { return std::min(bins - 1, static_cast<int>(v * bins)); };
  for (int i = 0; i < 2000; ++i) metropolis_step(eval, th, 0.3, rng);
  int prev = bin(eval.state().theta.theta_l[0]);
  for (int i = 0; i < 100000; ++i) {
    metropolis_step(eval, th, 0.3, rng);
    const int cur = bin(eval.state().theta.theta_l[0]);
    if (cur != prev) flow[{prev, cur}] += 1;
    prev = cur;
  }
  double chi2 = 0;
  int df = 0;
  for (int a = 0; a < bins; ++a) {
    for (int b = a + 1; b < bins; ++b) {
      const double nab = flow[{a, b}], nba = flow[{b, a}];
      if (nab + nba < 20) continue;
      chi2 += (nab - nba) * (nab - nba) / (nab + nba);
      ++df;
    }
  }
  REQUIRE(df > 5);
  const boost::math::chi_squared dist(df);
  // Successive flows are dependent, so use a generous threshold.
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

TEST_CASE("adjust_width") {
  CHECK(adjust_width(0.3, 0.44) == doctest::Approx(0.3));
  CHECK(adjust_width(0.3, 0.65) == doctest::Approx(0.6));
  CHECK(adjust_width(0.3, 0.05) == doctest::Approx(0.15));
  CHECK(adjust_width(0.3, 0.6) == doctest::Approx(0.6));
  CHECK(adjust_width(0.3, 0.2) == doctest::Approx(0.15));
  CHECK(adjust_width(0.3, 0.32) == doctest::Approx(0.225));
  CHECK(adjust_width(0.8, 0.9) == 1.0);
  CHECK(adjust_width(1.5e-4, 0.0) == 1e-4);
  double prev = 0;
  for (double r = 0.0; r <= 1.0; r += 0.01) {
    const double w = adjust_width(0.1, r);
    CHECK(w >= prev);
    prev = w;
  }
}

TEST_CASE("tune_widths drives a flat direction to the width cap with a warning") {
  // Without high-fidelity runs theta_h only enters delta_2 through field
  // rows that all share it, so the posterior is flat in theta_h.
  auto raw = testing::random_dataset(3, 0, 8, {2, 1, 1, 1}, 17);
  const auto ds = standardize_responses(raw);
  set_log_level(LogLevel::quiet);
  const auto t = tune_widths(ds, ParameterState::initial(ds.dims), PriorConfig{}, 200, 5);
  set_log_level(LogLevel::warning);
  const auto layout = parameter_layout(ds.dims, ds.form);
  const auto k = static_cast<std::size_t>(
      std::find(layout.begin(), layout.end(), id(ParameterGroup::theta_h)) - layout.begin());
  CHECK(t.widths[k] == 1.0);
  CHECK(t.acceptance[k] > 0.6);
  const bool warned = std::any_of(t.warnings.begin(), t.warnings.end(),
                                  [](const std::string& w) { return w.find("theta_h[0]") != std::string::npos; });
  CHECK(warned);
  for (std::size_t j = 0; j < layout.size(); ++j) {
    if (layout[j].is_precision()) CHECK(t.widths[j] == kPrecisionRelativeWidth);
  }
  CHECK_THROWS_AS(tune_widths(ds, ParameterState::initial(ds.dims), PriorConfig{}, 199, 5), InvalidArgumentError);
}

TEST_CASE("run_chain bookkeeping and determinism") {
  const auto ds = small_dataset(2);
  McmcConfig cfg;
  cfg.steps = 600;
  cfg.burn_in = 100;
  cfg.seed = 77;
  const auto init = ParameterState::initial(ds.dims);
  const Chain a = run_chain(ds, PriorConfig{}, init, cfg);
  const Chain b = run_chain(ds, PriorConfig{}, init, cfg);
  CHECK(a.size() == 500);
  CHECK(a.samples == b.samples);
  CHECK(a.log_posteriors == b.log_posteriors);
  for (std::size_t k = 0; k < a.layout.size(); ++k) {
    CHECK(a.proposals[k] == 600);
    CHECK(a.accepts[k] <= a.proposals[k]);
  }
  cfg.seed = 78;
  CHECK(run_chain(ds, PriorConfig{}, init, cfg).samples != a.samples);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.log_posteriors[i] == doctest::Approx(log_posterior(ds, a.state(i), PriorConfig{})).epsilon(1e-9));
  }

  cfg.thin = 7;
  CHECK(run_chain(ds, PriorConfig{}, init, cfg).size() == 72);

  ParameterState bad = init;
  bad.theta.theta_f[0] = 1.5;
  CHECK_THROWS_AS(run_chain(ds, PriorConfig{}, bad, cfg), InvalidInitError);
  cfg.burn_in = cfg.steps;
  CHECK_THROWS_AS(run_chain(ds, PriorConfig{}, init, cfg), InvalidArgumentError);
}

TEST_CASE("default run lengths retain 8000 samples from the standard start") {
  const auto ds = small_dataset(4);
  McmcConfig cfg;
  cfg.use_likelihood = false;
  const Chain c = run_chain(ds, PriorConfig{}, ParameterState::initial(ds.dims), cfg);
  CHECK(c.size() == 8000);
  const ParameterState s0 = ParameterState::initial(ds.dims);
  CHECK(s0.theta.theta_f[0] == 0.5);
  CHECK(s0.theta.theta_h[0] == 0.5);
  CHECK(s0.theta.theta_l[0] == 0.5);
  CHECK(s0.precisions.lambda_eta_l == 1.0);
  CHECK(s0.precisions.lambda_2 == 20.0);
  CHECK(s0.precisions.lambda_f == 20.0);
  CHECK(s0.precisions.lambda_y == 20.0);
  CHECK((s0.correlations.rho_eta_l.array() == 0.1).all());
  CHECK((s0.correlations.rho_2.array() == 0.1).all());
  CHECK((s0.correlations.rho_f.array() == 0.1).all());
}

TEST_CASE("prior-only sampling of theta and the printed gamma prior") {
  const auto ds = small_dataset(5);
  McmcConfig cfg;
  cfg.use_likelihood = false;
  cfg.steps = 2000 + 20000 * 5;
  cfg.burn_in = 2000;
  cfg.thin = 5;
  cfg.seed = 3;
  cfg.widths = std::vector<double>(parameter_layout(ds.dims, ds.form).size(), 0.5);
  for (std::size_t k = 0; k < cfg.widths.size(); ++k) {
    if (parameter_layout(ds.dims, ds.form)[k].is_precision()) cfg.widths[k] = kPrecisionRelativeWidth;
  }
  const Chain c = run_chain(ds, PriorConfig{}, ParameterState::initial(ds.dims), cfg);
  auto ks = [](VectorXd v, auto cdf) {
    std::sort(v.data(), v.data() + v.size());
    double d = 0;
    const double n = static_cast<double>(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double f = cdf(v[i]);
      d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    return d;
  };
  CHECK(ks(c.column("theta_f[0]"), [](double x) { return x; }) < 0.03);
  CHECK(ks(c.column("lambda_eta_l"), [](double x) { return boost::math::gamma_p(6.0, 5.0 * x); }) < 0.03);
}

TEST_CASE("fit_model is reproducible and records tuning") {
  const auto ds = small_dataset(6);
  FitOptions opt;
  opt.mcmc.steps = 300;
  opt.mcmc.burn_in = 50;
  opt.mcmc.seed = 5;
  set_log_level(LogLevel::quiet);
  const FitResult a = fit_model(ds, opt);
  const FitResult b = fit_model(ds, opt);
  set_log_level(LogLevel::warning);
  REQUIRE(a.tuning.has_value());
  CHECK(a.chain.widths == a.tuning->widths);
  CHECK(a.chain.samples == b.chain.samples);
  opt.tune = false;
  const FitResult c = fit_model(ds, opt);
  CHECK_FALSE(c.tuning.has_value());
  for (std::size_t k = 0; k < c.chain.layout.size(); ++k) {
    CHECK(c.chain.widths[k] == (c.chain.layout[k].is_precision() ? kPrecisionRelativeWidth : 0.1));
  }
}
