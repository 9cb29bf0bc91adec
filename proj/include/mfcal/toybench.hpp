#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfcal/data.hpp"
#include "mfcal/inference.hpp"
#include "mfcal/rng.hpp"

namespace mfcal {

struct ToyTruth {
  static constexpr double theta_f = 0.2;
  static constexpr double theta_h = 0.3;
  static constexpr double theta_l = 0.1;
  static constexpr double noise_sd = 0.5;
};

/// Low fidelity code. x2 = 0 uses the limit value 1 for the leading factor.
double eta_l_toy(const Eigen::Vector2d& x, double t_f, double t_l);
/// High-minus-low discrepancy, with 0^0 = 1.
double delta_2_toy(const Eigen::Vector2d& x, double t_f, double t_h);
double delta_f_toy(const Eigen::Vector2d& x);
/// High fidelity code: eta_l at theta_l = 0.1 plus delta_2.
double y_h_toy(const Eigen::Vector2d& x, double t_f, double t_h);
/// Noise-free physical process at the true calibration values.
double field_mean_toy(const Eigen::Vector2d& x);
double y_f_toy(const Eigen::Vector2d& x, Rng& rng);

struct ValidationSet {
  Eigen::MatrixXd x;     // n x 2
  Eigen::VectorXd y;     // noisy observations
  Eigen::VectorXd mean;  // noise-free process value
};

struct ToyData {
  MultiFidelityDataSet dataset;  // raw responses, two-level form
  ValidationSet validation;
};

/// Two design columns, one shared and one level-specific calibration input.
inline Dimensions toy_dimensions() { return {2, 1, 1, 1}; }

ToyData generate_toy_data(std::size_t n_l, std::size_t n_h, std::size_t n_f,
                          std::size_t validation_n, std::uint64_t seed);

enum class ToyModel { D1, D2, D3 };
std::string to_string(ToyModel m);
ToyModel toy_model_from_string(const std::string& s);

/// Standardized dataset for one study model built from two-level raw toy data.
/// D1: field + low runs; D2: field + high runs as the only simulator;
/// D3: everything.
MultiFidelityDataSet model_dataset(const MultiFidelityDataSet& raw, ToyModel model);

struct StudyConfig {
  std::size_t n_l = 40;
  std::size_t n_h = 10;
  std::size_t n_f = 3;
  std::size_t replicates = 100;
  std::size_t validation_n = 25;
  std::vector<ToyModel> models{ToyModel::D1, ToyModel::D2, ToyModel::D3};
  std::uint64_t seed = 1;
  FitOptions fit;  // mcmc.seed is overwritten per replicate and model
  std::size_t thin = 1;
  std::size_t threads = 1;
  std::function<void(std::size_t, std::size_t)> progress;  // (replicates done, total)

  void validate() const;
};

struct ModelSummary {
  ToyModel model;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct StudyResult {
  std::vector<ToyModel> models;
  Eigen::MatrixXd rmspe;  // replicate x model; NaN marks a failed fit
  std::vector<std::string> failures;
  std::vector<ModelSummary> summaries;

  const ModelSummary& summary(ToyModel m) const;
};

StudyResult run_sim_study(const StudyConfig& config);

}  // namespace mfcal
