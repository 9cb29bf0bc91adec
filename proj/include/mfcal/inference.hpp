#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfcal/data.hpp"
#include "mfcal/kernel.hpp"
#include "mfcal/rng.hpp"
#include "mfcal/state.hpp"

namespace mfcal {

/// Hyperparameters. Precision priors use the density lambda^a exp(-b lambda);
/// every correlation gets rho^(beta_a - 1) (1 - rho)^(beta_b - 1).
struct PriorConfig {
  double a_eta_l = 5.0;
  double b_eta_l = 5.0;
  double a_star = 1.0;
  double b_star = 0.001;
  double beta_a = 1.0;
  double beta_b = 0.001;
  /// Overrides (a_star, b_star) for lambda_y when set.
  std::optional<double> a_y;
  std::optional<double> b_y;
  /// Proposals with lambda_y above the cap are rejected. Non-positive disables it.
  double lambda_y_cap = 1e6;

  void validate() const;
};

/// -1/2 log det(Sigma) - 1/2 (Y - mu)' Sigma^{-1} (Y - mu), dropping the
/// 2 pi constant. Uses the assembly's Cholesky factor.
double log_likelihood(const Eigen::VectorXd& y, const CovarianceAssembly& assembly,
                      double mu = 0.0);

/// Sum of log prior densities up to constants; -infinity outside the support.
double log_prior(const ParameterState& state, const PriorConfig& priors,
                 ModelForm form = ModelForm::two_level);

/// Log prior plus log likelihood. Singular covariances give -infinity and a warning.
double log_posterior(const MultiFidelityDataSet& dataset, const ParameterState& state,
                     const PriorConfig& priors);

/// Log posterior for single-site updates. Keeps the correlation blocks of
/// the current state so a proposal only rebuilds the blocks it touches.
class PosteriorEvaluator {
 public:
  PosteriorEvaluator(const MultiFidelityDataSet& dataset, PriorConfig priors,
                     bool use_likelihood = true);

  /// Sets the current state and returns its log posterior.
  double reset(const ParameterState& state);

  const ParameterState& state() const { return state_; }
  double current() const { return current_; }
  const MultiFidelityDataSet& dataset() const { return *dataset_; }
  const PriorConfig& priors() const { return priors_; }

  /// Log posterior of the current state with `id` set to `value`. The
  /// proposal stays staged until accept() or the next propose().
  double propose(ParameterId id, double value);
  void accept();

  std::size_t lambda_y_cap_rejections() const { return cap_rejections_; }
  std::size_t singular_evaluations() const { return singular_; }

 private:
  double evaluate_staged();

  const MultiFidelityDataSet* dataset_;
  PriorConfig priors_;
  bool use_likelihood_;
  Eigen::VectorXd y_;

  ParameterState state_;
  CorrelationBlocks blocks_;
  double current_ = 0.0;

  ParameterState staged_;
  Eigen::MatrixXd staged_eta_;
  Eigen::MatrixXd staged_delta_;
  Eigen::MatrixXd staged_field_;
  bool dirty_eta_ = false;
  bool dirty_delta_ = false;
  bool dirty_field_ = false;
  double staged_value_ = 0.0;
  bool has_staged_ = false;

  std::size_t cap_rejections_ = 0;
  std::size_t singular_ = 0;
};

/// Uniform(v - width/2, v + width/2) proposal for a calibration or
/// correlation parameter. Returns whether the move was accepted.
bool metropolis_step(PosteriorEvaluator& evaluator, ParameterId id, double width, Rng& rng);

inline constexpr double kPrecisionRelativeWidth = 0.3;

/// Hastings update for a precision: lambda' ~ Uniform(0.85 lambda, 1.15 lambda),
/// accepted with min(1, exp(delta) * lambda / lambda'). Irreversible moves
/// (lambda outside the reverse proposal's support) are rejected.
bool hastings_step_precision(PosteriorEvaluator& evaluator, ParameterId id, Rng& rng);

// ---------------------------------------------------------------------------

inline constexpr double kTargetAcceptance = 0.44;
inline constexpr double kAcceptanceLow = 0.25;
inline constexpr double kAcceptanceHigh = 0.75;

/// One tuning round: x2 above 0.6, x0.5 below 0.2, piecewise-linear in
/// between with factor 1 at 0.44. Result is clipped to [1e-4, cap].
double adjust_width(double width, double acceptance, double cap = 1.0);

struct TuningResult {
  std::vector<double> widths;      // per layout entry; precisions hold the relative width
  std::vector<double> acceptance;  // measured on a final pilot with `widths`
  std::vector<std::string> warnings;
  bool in_band = true;             // every tuned rate inside [0.25, 0.75]
};

TuningResult tune_widths(const MultiFidelityDataSet& dataset, const ParameterState& init,
                         const PriorConfig& priors, std::size_t pilot_steps, std::uint64_t seed,
                         std::size_t rounds = 5, double initial_width = 0.1,
                         std::size_t warmup_steps = 0);

struct McmcConfig {
  std::size_t steps = 10000;
  std::size_t burn_in = 2000;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  /// Per layout entry. Empty means 0.1 for every Metropolis parameter.
  std::vector<double> widths;
  bool use_likelihood = true;
  /// Called after every sweep with (completed, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Post-burn-in samples; one row per retained sweep, one column per layout entry.
struct Chain {
  Dimensions dims;
  ModelForm form = ModelForm::two_level;
  std::vector<ParameterId> layout;
  Eigen::MatrixXd samples;
  std::vector<double> log_posteriors;
  std::vector<std::size_t> proposals;
  std::vector<std::size_t> accepts;
  std::vector<double> widths;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::size_t lambda_y_cap_rejections = 0;

  std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
  ParameterState state(std::size_t i) const;
  std::vector<double> acceptance_rates() const;
  /// Column of the named parameter; throws if absent.
  Eigen::VectorXd column(const std::string& name) const;
};

/// One sweep updates every theta and rho (Metropolis) then every lambda
/// (Hastings). Throws InvalidInitError when `init` has -infinite posterior.
Chain run_chain(const MultiFidelityDataSet& dataset, const PriorConfig& priors,
                const ParameterState& init, const McmcConfig& config);

struct FitOptions {
  PriorConfig priors;
  McmcConfig mcmc;
  bool tune = true;
  std::size_t pilot_steps = 200;
  /// Unmeasured sweeps run before the first tuning round.
  std::size_t warmup_steps = 0;
  std::optional<ParameterState> init;
};

struct FitResult {
  Chain chain;
  std::optional<TuningResult> tuning;
};

/// Tunes widths (unless disabled or widths were given) then runs the chain.
FitResult fit_model(const MultiFidelityDataSet& dataset, const FitOptions& options);

}  // namespace mfcal
