#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mfcal/data.hpp"
#include "mfcal/inference.hpp"
#include "mfcal/kernel.hpp"

namespace mfcal {

/// Tolerance below which negative predictive variance is treated as round-off.
inline constexpr double kVarianceClipTolerance = 1e-10;

struct ConditionalNormal {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  bool clipped = false;  // negative eigenvalues were set to zero
};

/// Sigma_21 Sigma_11^{-1} Y and Sigma_22 - Sigma_21 Sigma_11^{-1} Sigma_12,
/// via triangular solves against the assembly's factor.
ConditionalNormal conditional_mvn(const CovarianceAssembly& assembly, const Eigen::VectorXd& y);

/// Per-target posterior predictive summary on the original response scale.
/// `mean` and `variance` average the conditional moments over chain samples;
/// the interval is equal-tailed over the pooled draws.
struct PredictiveSummary {
  Eigen::VectorXd x_new;  // unit-cube coordinates
  double mean = 0.0;
  double variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double draws_mean = 0.0;
  std::size_t n_draws = 0;
};

struct PredictionOptions {
  bool include_noise = true;
  std::size_t draws_per_sample = 1;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  double level = 0.95;
  std::size_t threads = 1;
};

std::vector<PredictiveSummary> posterior_predictive(const MultiFidelityDataSet& dataset,
                                                    const Chain& chain,
                                                    const Eigen::MatrixXd& x_new,
                                                    const PredictionOptions& options);

/// Posterior mean only (no draws), original response scale.
Eigen::VectorXd posterior_mean(const MultiFidelityDataSet& dataset, const Chain& chain,
                               const Eigen::MatrixXd& x_new, std::size_t thin = 1);

double rmspe(std::span<const double> predictions, std::span<const double> actuals);
double rmspe(const Eigen::VectorXd& predictions, const Eigen::VectorXd& actuals);

/// Type-7 (linear interpolation) sample quantile.
double sample_quantile(std::vector<double> values, double q);

struct LooResult {
  std::vector<PredictiveSummary> predictions;  // one per field point
  Eigen::VectorXd actual;                      // held-out responses, original scale
  std::vector<bool> covered;
  std::size_t n_covered() const;
};

/// Refits once per field observation with that point removed (responses
/// re-standardized per fold) and predicts it with observation noise.
LooResult loo(const MultiFidelityDataSet& dataset, const FitOptions& fit,
              const PredictionOptions& prediction, std::uint64_t root_seed,
              std::size_t threads = 1);

}  // namespace mfcal
