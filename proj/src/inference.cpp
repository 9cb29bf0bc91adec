#include "mfcal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfcal/error.hpp"
#include "mfcal/log.hpp"

namespace mfcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double gamma_term(double lambda, double a, double b) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) return kNegInf;
  return a * std::log(lambda) - b * lambda;
}

double beta_term(double rho, double a, double b) {
  if (!(rho > 0.0 && rho < 1.0)) return kNegInf;
  return (a - 1.0) * std::log(rho) + (b - 1.0) * std::log1p(-rho);
}

double unit_term(const Eigen::VectorXd& theta) {
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= 0.0 && theta[i] <= 1.0)) return kNegInf;
  }
  return 0.0;
}

double beta_sum(const Eigen::VectorXd& rho, const PriorConfig& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < rho.size(); ++i) s += beta_term(rho[i], p.beta_a, p.beta_b);
  return s;
}

bool in_support(ParameterId id, double v) {
  if (id.is_calibration()) return v >= 0.0 && v <= 1.0;
  if (id.is_correlation()) return v > 0.0 && v < 1.0;
  return v > 0.0 && std::isfinite(v);
}

bool accept_move(double log_ratio, double u) {
  if (log_ratio >= 0.0) return true;
  return u < std::exp(log_ratio);
}

struct Affects {
  bool eta = false;
  bool delta = false;
  bool field = false;
};

Affects affected_blocks(ParameterGroup g, ModelForm form) {
  const bool two = form == ModelForm::two_level;
  switch (g) {
    case ParameterGroup::theta_f: return {true, two, false};
    case ParameterGroup::theta_h: return {false, two, false};
    case ParameterGroup::theta_l: return {true, false, false};
    case ParameterGroup::rho_eta_l: return {true, false, false};
    case ParameterGroup::rho_2: return {false, two, false};
    case ParameterGroup::rho_f: return {false, false, true};
    default: return {};
  }
}

struct SweepCounts {
  std::vector<std::size_t> proposals;
  std::vector<std::size_t> accepts;
  explicit SweepCounts(std::size_t n) : proposals(n, 0), accepts(n, 0) {}
};

void sweep(PosteriorEvaluator& eval, const std::vector<ParameterId>& layout,
           const std::vector<double>& widths, Rng& rng, SweepCounts& counts) {
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const ParameterId id = layout[k];
    const bool accepted = id.is_precision() ? hastings_step_precision(eval, id, rng)
                                            : metropolis_step(eval, id, widths[k], rng);
    ++counts.proposals[k];
    if (accepted) ++counts.accepts[k];
  }
}

std::vector<double> default_widths(const std::vector<ParameterId>& layout, double width) {
  std::vector<double> w(layout.size());
  for (std::size_t k = 0; k < layout.size(); ++k) {
    w[k] = layout[k].is_precision() ? kPrecisionRelativeWidth : width;
  }
  return w;
}

}  // namespace

void PriorConfig::validate() const {
  for (double v : {a_eta_l, b_eta_l, a_star, b_star, beta_a, beta_b}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgumentError("prior hyperparameters must be strictly positive");
    }
  }
  if (a_y.has_value() != b_y.has_value()) {
    throw InvalidArgumentError("lambda_y prior override needs both a_y and b_y");
  }
  if (a_y && (!(*a_y > 0.0) || !(*b_y > 0.0))) {
    throw InvalidArgumentError("lambda_y prior hyperparameters must be strictly positive");
  }
}

double log_likelihood(const Eigen::VectorXd& y, const CovarianceAssembly& assembly, double mu) {
  const auto n = static_cast<Eigen::Index>(assembly.index().n_train());
  if (y.size() != n) {
    throw DimensionError("log_likelihood: response vector length " + std::to_string(y.size()) +
                         " but covariance order " + std::to_string(n));
  }
  const Eigen::VectorXd r = y.array() - mu;
  const Eigen::VectorXd z = assembly.factor().matrixL().solve(r);
  return -0.5 * assembly.log_det() - 0.5 * z.squaredNorm();
}

double log_prior(const ParameterState& state, const PriorConfig& priors, ModelForm form) {
  const bool two = form == ModelForm::two_level;
  double lp = unit_term(state.theta.theta_f) + unit_term(state.theta.theta_l);
  if (two) lp += unit_term(state.theta.theta_h);
  if (lp == kNegInf) return lp;

  const PrecisionParams& lam = state.precisions;
  if (priors.lambda_y_cap > 0.0 && lam.lambda_y > priors.lambda_y_cap) return kNegInf;
  lp += gamma_term(lam.lambda_eta_l, priors.a_eta_l, priors.b_eta_l);
  if (two) lp += gamma_term(lam.lambda_2, priors.a_star, priors.b_star);
  lp += gamma_term(lam.lambda_f, priors.a_star, priors.b_star);
  lp += gamma_term(lam.lambda_y, priors.a_y.value_or(priors.a_star),
                   priors.b_y.value_or(priors.b_star));

  lp += beta_sum(state.correlations.rho_eta_l, priors);
  if (two) lp += beta_sum(state.correlations.rho_2, priors);
  lp += beta_sum(state.correlations.rho_f, priors);
  return lp;
}

double log_posterior(const MultiFidelityDataSet& dataset, const ParameterState& state,
                     const PriorConfig& priors) {
  const double lp = log_prior(state, priors, dataset.form);
  if (lp == kNegInf) return lp;
  try {
    const CovarianceAssembly assembly = assemble_sigma_Y(dataset, state);
    return log_likelihood(joint_response_vector(dataset), assembly) + lp;
  } catch (const SingularityError& e) {
    log_warning(std::string("log_posterior: ") + e.what());
    return kNegInf;
  }
}

// ---------------------------------------------------------------------------

PosteriorEvaluator::PosteriorEvaluator(const MultiFidelityDataSet& dataset, PriorConfig priors,
                                       bool use_likelihood)
    : dataset_(&dataset),
      priors_(std::move(priors)),
      use_likelihood_(use_likelihood),
      y_(joint_response_vector(dataset)) {
  priors_.validate();
}

double PosteriorEvaluator::reset(const ParameterState& state) {
  state.check_dimensions(dataset_->dims, dataset_->form);
  state_ = state;
  staged_ = state;
  has_staged_ = false;
  if (use_likelihood_) {
    blocks_ = correlation_blocks(*dataset_, state_);
  } else {
    blocks_ = CorrelationBlocks{};
    blocks_.index = dataset_->index();
  }
  dirty_eta_ = dirty_delta_ = dirty_field_ = false;
  current_ = evaluate_staged();
  return current_;
}

double PosteriorEvaluator::evaluate_staged() {
  const double lp = log_prior(staged_, priors_, dataset_->form);
  if (lp == kNegInf || !use_likelihood_) return lp;
  const Eigen::MatrixXd& eta = dirty_eta_ ? staged_eta_ : blocks_.eta_l;
  const Eigen::MatrixXd& delta = dirty_delta_ ? staged_delta_ : blocks_.delta_2;
  const Eigen::MatrixXd& field = dirty_field_ ? staged_field_ : blocks_.field;
  try {
    CovarianceAssembly assembly(
        combine_blocks(eta, delta, field, blocks_.index, staged_.precisions, dataset_->form),
        blocks_.index);
    return log_likelihood(y_, assembly) + lp;
  } catch (const SingularityError& e) {
    if (singular_++ == 0) log_warning(std::string("log_posterior: ") + e.what());
    return kNegInf;
  }
}

double PosteriorEvaluator::propose(ParameterId id, double value) {
  staged_ = state_;
  set_parameter(staged_, id, value);
  if (id.group == ParameterGroup::lambda_y && priors_.lambda_y_cap > 0.0 &&
      value > priors_.lambda_y_cap) {
    ++cap_rejections_;
  }
  dirty_eta_ = dirty_delta_ = dirty_field_ = false;
  if (use_likelihood_ && log_prior(staged_, priors_, dataset_->form) != kNegInf) {
    const Affects a = affected_blocks(id.group, dataset_->form);
    const Eigen::MatrixXd none;
    if (a.eta) {
      staged_eta_ = correlation_matrix(eta_l_block_inputs(*dataset_, staged_.theta, none),
                                       staged_.correlations.rho_eta_l);
      dirty_eta_ = true;
    }
    if (a.delta) {
      staged_delta_ = correlation_matrix(delta_2_block_inputs(*dataset_, staged_.theta, none),
                                         staged_.correlations.rho_2);
      dirty_delta_ = true;
    }
    if (a.field) {
      staged_field_ = correlation_matrix(field_block_inputs(*dataset_, none),
                                         staged_.correlations.rho_f);
      dirty_field_ = true;
    }
  }
  staged_value_ = evaluate_staged();
  has_staged_ = true;
  return staged_value_;
}

void PosteriorEvaluator::accept() {
  if (!has_staged_) throw InvalidArgumentError("accept() without a staged proposal");
  std::swap(state_, staged_);
  if (dirty_eta_) std::swap(blocks_.eta_l, staged_eta_);
  if (dirty_delta_) std::swap(blocks_.delta_2, staged_delta_);
  if (dirty_field_) std::swap(blocks_.field, staged_field_);
  dirty_eta_ = dirty_delta_ = dirty_field_ = false;
  current_ = staged_value_;
  has_staged_ = false;
}

bool metropolis_step(PosteriorEvaluator& eval, ParameterId id, double width, Rng& rng) {
  if (!(width > 0.0)) throw InvalidArgumentError("metropolis width must be positive");
  if (id.is_precision()) throw InvalidArgumentError("precisions use hastings_step_precision");
  const double u_prop = uniform01(rng);
  const double u_acc = uniform01(rng);
  const double v = get_parameter(eval.state(), id);
  const double proposal = v + width * (u_prop - 0.5);
  if (!in_support(id, proposal)) return false;
  const double delta = eval.propose(id, proposal) - eval.current();
  if (std::isnan(delta) || !accept_move(delta, u_acc)) return false;
  eval.accept();
  return true;
}

bool hastings_step_precision(PosteriorEvaluator& eval, ParameterId id, Rng& rng) {
  if (!id.is_precision()) throw InvalidArgumentError("hastings_step_precision needs a precision");
  const double u_prop = uniform01(rng);
  const double u_acc = uniform01(rng);
  const double lambda = get_parameter(eval.state(), id);
  const double half = 0.5 * kPrecisionRelativeWidth;
  const double proposal = lambda * (1.0 - half + kPrecisionRelativeWidth * u_prop);
  // The reverse move must be able to propose lambda from lambda'.
  if (lambda < (1.0 - half) * proposal || lambda > (1.0 + half) * proposal) return false;
  const double delta = eval.propose(id, proposal) - eval.current();
  const double log_ratio = delta + std::log(lambda / proposal);
  if (std::isnan(log_ratio) || !accept_move(log_ratio, u_acc)) return false;
  eval.accept();
  return true;
}

// ---------------------------------------------------------------------------

double adjust_width(double width, double acceptance, double cap) {
  double factor = 1.0;
  if (acceptance > 0.6) {
    factor = 2.0;
  } else if (acceptance < 0.2) {
    factor = 0.5;
  } else if (acceptance >= kTargetAcceptance) {
    factor = 1.0 + (acceptance - kTargetAcceptance) / (0.6 - kTargetAcceptance);
  } else {
    factor = 0.5 + 0.5 * (acceptance - 0.2) / (kTargetAcceptance - 0.2);
  }
  return std::clamp(width * factor, 1e-4, cap);
}

TuningResult tune_widths(const MultiFidelityDataSet& dataset, const ParameterState& init,
                         const PriorConfig& priors, std::size_t pilot_steps, std::uint64_t seed,
                         std::size_t rounds, double initial_width, std::size_t warmup_steps) {
  if (pilot_steps < 200) throw InvalidArgumentError("tune_widths needs pilot_steps >= 200");
  const auto layout = parameter_layout(dataset.dims, dataset.form);
  PosteriorEvaluator eval(dataset, priors);
  if (eval.reset(init) == kNegInf) {
    throw InvalidInitError("initial state has zero posterior density");
  }
  Rng rng(seed);
  TuningResult result;
  result.widths = default_widths(layout, initial_width);

  auto pilot = [&]() {
    SweepCounts counts(layout.size());
    for (std::size_t s = 0; s < pilot_steps; ++s) sweep(eval, layout, result.widths, rng, counts);
    std::vector<double> rates(layout.size());
    for (std::size_t k = 0; k < layout.size(); ++k) {
      rates[k] = static_cast<double>(counts.accepts[k]) / static_cast<double>(counts.proposals[k]);
    }
    return rates;
  };

  {
    SweepCounts ignored(layout.size());
    for (std::size_t s = 0; s < warmup_steps; ++s) sweep(eval, layout, result.widths, rng, ignored);
  }
  for (std::size_t r = 0; r < rounds; ++r) {
    const std::vector<double> rates = pilot();
    for (std::size_t k = 0; k < layout.size(); ++k) {
      if (!layout[k].is_precision()) result.widths[k] = adjust_width(result.widths[k], rates[k]);
    }
  }
  result.acceptance = pilot();

  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k].is_precision()) continue;
    const double rate = result.acceptance[k];
    const bool in_band = rate >= kAcceptanceLow && rate <= kAcceptanceHigh;
    const bool capped = result.widths[k] >= 1.0 && rate > 0.6;
    if (in_band && !capped) continue;
    if (!in_band) result.in_band = false;
    std::ostringstream msg;
    msg << layout[k].name() << ": pilot acceptance " << rate << " with width "
        << result.widths[k];
    if (capped) msg << " (width at cap; posterior is flat in this direction)";
    result.warnings.push_back(msg.str());
  }
  for (const auto& w : result.warnings) log_warning("tune_widths: " + w);
  return result;
}

// ---------------------------------------------------------------------------

ParameterState Chain::state(std::size_t i) const {
  return unflatten(samples.row(static_cast<Eigen::Index>(i)).transpose(), layout, dims);
}

std::vector<double> Chain::acceptance_rates() const {
  std::vector<double> out(layout.size(), 0.0);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (proposals[k] > 0) {
      out[k] = static_cast<double>(accepts[k]) / static_cast<double>(proposals[k]);
    }
  }
  return out;
}

Eigen::VectorXd Chain::column(const std::string& name) const {
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k].name() == name) return samples.col(static_cast<Eigen::Index>(k));
  }
  throw InvalidArgumentError("chain has no parameter named " + name);
}

Chain run_chain(const MultiFidelityDataSet& dataset, const PriorConfig& priors,
                const ParameterState& init, const McmcConfig& config) {
  if (!(config.steps > config.burn_in)) throw InvalidArgumentError("steps must exceed burn_in");
  if (config.thin == 0) throw InvalidArgumentError("thin must be at least 1");
  dataset.validate();
  init.check_dimensions(dataset.dims, dataset.form);

  Chain chain;
  chain.dims = dataset.dims;
  chain.form = dataset.form;
  chain.layout = parameter_layout(dataset.dims, dataset.form);
  chain.widths = config.widths.empty() ? default_widths(chain.layout, 0.1) : config.widths;
  if (chain.widths.size() != chain.layout.size()) {
    throw DimensionError("width vector does not match the parameter layout");
  }
  chain.seed = config.seed;
  chain.steps = config.steps;
  chain.burn_in = config.burn_in;
  chain.thin = config.thin;

  PosteriorEvaluator eval(dataset, priors, config.use_likelihood);
  if (eval.reset(init) == kNegInf) {
    throw InvalidInitError("initial state has zero posterior density (check theta in [0,1], "
                           "positive precisions and lambda_y below its cap)");
  }

  const std::size_t kept = (config.steps - config.burn_in + config.thin - 1) / config.thin;
  chain.samples.resize(static_cast<Eigen::Index>(kept),
                       static_cast<Eigen::Index>(chain.layout.size()));
  chain.log_posteriors.reserve(kept);

  Rng rng(config.seed);
  SweepCounts counts(chain.layout.size());
  std::size_t row = 0;
  for (std::size_t s = 0; s < config.steps; ++s) {
    sweep(eval, chain.layout, chain.widths, rng, counts);
    if (s >= config.burn_in && (s - config.burn_in) % config.thin == 0) {
      chain.samples.row(static_cast<Eigen::Index>(row++)) =
          flatten(eval.state(), chain.layout).transpose();
      chain.log_posteriors.push_back(eval.current());
    }
    if (config.progress) config.progress(s + 1, config.steps);
  }
  chain.proposals = std::move(counts.proposals);
  chain.accepts = std::move(counts.accepts);
  chain.lambda_y_cap_rejections = eval.lambda_y_cap_rejections();
  if (chain.lambda_y_cap_rejections > 0) {
    log_info("run_chain: " + std::to_string(chain.lambda_y_cap_rejections) +
             " lambda_y proposals rejected by the cap");
  }
  return chain;
}

FitResult fit_model(const MultiFidelityDataSet& dataset, const FitOptions& options) {
  const ParameterState init = options.init.value_or(ParameterState::initial(dataset.dims));
  FitResult result;
  McmcConfig mcmc = options.mcmc;
  if (options.tune && mcmc.widths.empty()) {
    result.tuning = tune_widths(dataset, init, options.priors, options.pilot_steps,
                                derive_seed(mcmc.seed, 0x74756e65), 5, 0.1, options.warmup_steps);
    mcmc.widths = result.tuning->widths;
  }
  result.chain = run_chain(dataset, options.priors, init, mcmc);
  return result;
}

}  // namespace mfcal
