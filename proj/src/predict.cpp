#include "mfcal/predict.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "mfcal/error.hpp"
#include "mfcal/log.hpp"
#include "mfcal/parallel.hpp"
#include "mfcal/rng.hpp"

namespace mfcal {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Square-root factor A with A A' = cov for a PSD matrix.
MatrixXd psd_sqrt(const MatrixXd& cov) {
  if (cov.rows() == 1) {
    MatrixXd a(1, 1);
    a(0, 0) = std::sqrt(std::max(cov(0, 0), 0.0));
    return a;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  const VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

struct SampleMoments {
  VectorXd mean;
  VectorXd variance;
  MatrixXd draws;  // n_new x draws_per_sample, standardized scale
};

std::vector<std::size_t> thinned_rows(const Chain& chain, std::size_t thin) {
  if (chain.size() == 0) throw InvalidArgumentError("prediction needs a non-empty chain");
  if (thin == 0) throw InvalidArgumentError("thin must be at least 1");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < chain.size(); i += thin) rows.push_back(i);
  return rows;
}

void check_chain(const MultiFidelityDataSet& dataset, const Chain& chain) {
  if (!(chain.dims == dataset.dims) || chain.form != dataset.form) {
    throw DimensionError("chain was sampled for different dataset dimensions");
  }
}

}  // namespace

ConditionalNormal conditional_mvn(const CovarianceAssembly& assembly, const VectorXd& y) {
  const BlockIndex& ix = assembly.index();
  if (ix.n_new == 0) throw InvalidArgumentError("conditional_mvn needs at least one new point");
  if (y.size() != static_cast<Index>(ix.n_train())) {
    throw DimensionError("conditional_mvn: response length does not match Sigma_11");
  }
  const auto lower = assembly.factor().matrixL();
  const MatrixXd v = lower.solve(assembly.sigma_12());  // L^{-1} Sigma_12
  const VectorXd z = lower.solve(y);                    // L^{-1} Y

  ConditionalNormal out;
  out.mean = v.transpose() * z;
  MatrixXd cov = assembly.sigma_22() - v.transpose() * v;
  cov = 0.5 * (cov + cov.transpose());

  if (cov.rows() == 1) {
    if (cov(0, 0) < 0.0) {
      if (cov(0, 0) < -kVarianceClipTolerance) {
        log_warning("conditional_mvn: clipped predictive variance " + std::to_string(cov(0, 0)));
      }
      cov(0, 0) = 0.0;
      out.clipped = true;
    }
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < 0.0) {
      if (min_eig < -kVarianceClipTolerance) {
        log_warning("conditional_mvn: clipped negative eigenvalue " + std::to_string(min_eig));
      }
      cov = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
            eig.eigenvectors().transpose();
      cov = 0.5 * (cov + cov.transpose());
      out.clipped = true;
    }
  }
  out.covariance = std::move(cov);
  return out;
}

std::vector<PredictiveSummary> posterior_predictive(const MultiFidelityDataSet& dataset,
                                                    const Chain& chain, const MatrixXd& x_new,
                                                    const PredictionOptions& options) {
  check_chain(dataset, chain);
  if (options.draws_per_sample == 0) throw InvalidArgumentError("draws_per_sample must be >= 1");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw InvalidArgumentError("interval level must lie in (0, 1)");
  }
  const Index n_new = x_new.rows();
  if (n_new == 0) return {};

  const std::vector<std::size_t> rows = thinned_rows(chain, options.thin);
  const VectorXd y = joint_response_vector(dataset);
  std::vector<SampleMoments> moments(rows.size());

  parallel_for(rows.size(), options.threads, [&](std::size_t k) {
    const ParameterState state = chain.state(rows[k]);
    const CovarianceAssembly assembly =
        extend_for_prediction(dataset, state, x_new, options.include_noise);
    const ConditionalNormal cond = conditional_mvn(assembly, y);
    SampleMoments& m = moments[k];
    m.mean = cond.mean;
    m.variance = cond.covariance.diagonal();
    const MatrixXd root = psd_sqrt(cond.covariance);
    Rng rng(derive_seed(options.seed, rows[k]));
    m.draws.resize(n_new, static_cast<Index>(options.draws_per_sample));
    VectorXd z(n_new);
    for (std::size_t d = 0; d < options.draws_per_sample; ++d) {
      for (Index i = 0; i < n_new; ++i) z[i] = standard_normal(rng);
      m.draws.col(static_cast<Index>(d)) = cond.mean + root * z;
    }
  });

  const StandardizationTransform& tr = dataset.transform;
  const double n_samples = static_cast<double>(rows.size());
  const double tail = 0.5 * (1.0 - options.level);
  std::vector<PredictiveSummary> out(static_cast<std::size_t>(n_new));
  for (Index i = 0; i < n_new; ++i) {
    double mean = 0.0;
    double mean_var = 0.0;
    for (const auto& m : moments) {
      mean += m.mean[i];
      mean_var += m.variance[i];
    }
    mean /= n_samples;
    mean_var /= n_samples;
    double spread = 0.0;
    for (const auto& m : moments) spread += (m.mean[i] - mean) * (m.mean[i] - mean);
    spread /= n_samples;

    std::vector<double> pooled;
    pooled.reserve(rows.size() * options.draws_per_sample);
    for (const auto& m : moments) {
      for (Index d = 0; d < m.draws.cols(); ++d) pooled.push_back(tr.invert(m.draws(i, d)));
    }
    double draws_mean = 0.0;
    for (double v : pooled) draws_mean += v;
    draws_mean /= static_cast<double>(pooled.size());

    PredictiveSummary& s = out[static_cast<std::size_t>(i)];
    s.x_new = x_new.row(i).transpose();
    s.mean = tr.invert(mean);
    s.variance = tr.invert_variance(mean_var + spread);
    s.n_draws = pooled.size();
    s.draws_mean = draws_mean;
    s.lower = sample_quantile(pooled, tail);
    s.upper = sample_quantile(std::move(pooled), 1.0 - tail);
  }
  return out;
}

VectorXd posterior_mean(const MultiFidelityDataSet& dataset, const Chain& chain,
                        const MatrixXd& x_new, std::size_t thin) {
  check_chain(dataset, chain);
  const std::vector<std::size_t> rows = thinned_rows(chain, thin);
  const VectorXd y = joint_response_vector(dataset);
  VectorXd sum = VectorXd::Zero(x_new.rows());
  if (x_new.rows() == 0) return sum;
  for (std::size_t r : rows) {
    const CovarianceAssembly assembly = extend_for_prediction(dataset, chain.state(r), x_new, false);
    const auto lower = assembly.factor().matrixL();
    const MatrixXd v = lower.solve(assembly.sigma_12());
    sum += v.transpose() * lower.solve(y);
  }
  sum /= static_cast<double>(rows.size());
  for (Index i = 0; i < sum.size(); ++i) sum[i] = dataset.transform.invert(sum[i]);
  return sum;
}

double rmspe(std::span<const double> predictions, std::span<const double> actuals) {
  if (predictions.size() != actuals.size()) {
    throw DimensionError("rmspe: " + std::to_string(predictions.size()) + " predictions but " +
                         std::to_string(actuals.size()) + " actual values");
  }
  if (predictions.empty()) throw InvalidArgumentError("rmspe needs at least one value");
  double ss = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - actuals[i];
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(predictions.size()));
}

double rmspe(const VectorXd& predictions, const VectorXd& actuals) {
  return rmspe(std::span<const double>(predictions.data(), static_cast<std::size_t>(predictions.size())),
               std::span<const double>(actuals.data(), static_cast<std::size_t>(actuals.size())));
}

double sample_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgumentError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::size_t LooResult::n_covered() const {
  return static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
}

LooResult loo(const MultiFidelityDataSet& dataset, const FitOptions& fit,
              const PredictionOptions& prediction, std::uint64_t root_seed, std::size_t threads) {
  const std::size_t n = dataset.n_field();
  if (n < 2) throw InvalidArgumentError("leave-one-out needs at least two field observations");
  const MultiFidelityDataSet raw = dataset.destandardized();

  LooResult result;
  result.predictions.resize(n);
  result.actual = raw.field.y;
  result.covered.assign(n, false);

  std::vector<char> covered(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    const MultiFidelityDataSet train = standardize_responses(raw.without_field_row(i));
    FitOptions options = fit;
    options.mcmc.seed = derive_seed(root_seed, 2 * i);
    options.mcmc.progress = nullptr;
    const FitResult fitted = fit_model(train, options);
    PredictionOptions popts = prediction;
    popts.include_noise = true;
    popts.seed = derive_seed(root_seed, 2 * i + 1);
    popts.threads = 1;
    const Eigen::MatrixXd x = raw.field.x.row(static_cast<Index>(i));
    PredictiveSummary s = posterior_predictive(train, fitted.chain, x, popts).front();
    const double actual = raw.field.y[static_cast<Index>(i)];
    covered[i] = (s.lower <= actual && actual <= s.upper) ? 1 : 0;
    result.predictions[i] = std::move(s);
  });
  for (std::size_t i = 0; i < n; ++i) result.covered[i] = covered[i] != 0;
  return result;
}

}  // namespace mfcal
