#include "mfcal/toybench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>

#include "mfcal/design.hpp"
#include "mfcal/error.hpp"
#include "mfcal/log.hpp"
#include "mfcal/parallel.hpp"
#include "mfcal/predict.hpp"

namespace mfcal {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double eta_l_toy(const Eigen::Vector2d& x, double t_f, double t_l) {
  const double x1 = x[0];
  const double lead = x[1] == 0.0 ? 1.0 : 1.0 - std::exp(-1.0 / (2.0 * x[1]));
  const double num = 1000.0 * t_f * x1 * x1 * x1 + 1900.0 * x1 * x1 + 2092.0 * x1 + 60.0;
  const double den = 1000.0 * t_l * x1 * x1 * x1 + 500.0 * x1 * x1 + 4.0 * x1 + 20.0;
  return lead * num / den;
}

double delta_2_toy(const Eigen::Vector2d& x, double t_f, double t_h) {
  const double pow_x1 = t_h == 0.0 ? 1.0 : std::pow(x[0], t_h);
  return 5.0 * std::exp(-t_f) * pow_x1 / (100.0 * (std::pow(x[1], 2.0 + t_h) + 1.0));
}

double delta_f_toy(const Eigen::Vector2d& x) {
  return (10.0 * x[0] * x[0] + 4.0 * x[1] * x[1]) / (50.0 * x[0] * x[1] + 10.0);
}

double y_h_toy(const Eigen::Vector2d& x, double t_f, double t_h) {
  return eta_l_toy(x, t_f, ToyTruth::theta_l) + delta_2_toy(x, t_f, t_h);
}

double field_mean_toy(const Eigen::Vector2d& x) {
  return y_h_toy(x, ToyTruth::theta_f, ToyTruth::theta_h) + delta_f_toy(x);
}

double y_f_toy(const Eigen::Vector2d& x, Rng& rng) {
  return field_mean_toy(x) + ToyTruth::noise_sd * standard_normal(rng);
}

namespace {

MatrixXd design(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0) return MatrixXd(0, static_cast<Index>(d));
  return lhs(n, d, seed).points;
}

SimulatorTable simulator_table(const MatrixXd& pts) {
  SimulatorTable t;
  t.x = pts.leftCols(2);
  t.t_shared = pts.col(2);
  t.t_own = pts.col(3);
  t.y.resize(pts.rows());
  return t;
}

}  // namespace

ToyData generate_toy_data(std::size_t n_l, std::size_t n_h, std::size_t n_f,
                          std::size_t validation_n, std::uint64_t seed) {
  if (n_l == 0) throw InvalidArgumentError("toy data needs at least one low fidelity run");
  if (n_f == 0) throw InvalidArgumentError("toy data needs at least one field observation");

  ToyData out;
  MultiFidelityDataSet& ds = out.dataset;
  ds.dims = toy_dimensions();
  ds.form = ModelForm::two_level;

  ds.low = simulator_table(design(n_l, 4, derive_seed(seed, 1)));
  for (Index i = 0; i < ds.low.y.size(); ++i) {
    ds.low.y[i] = eta_l_toy(ds.low.x.row(i).transpose(), ds.low.t_shared(i, 0), ds.low.t_own(i, 0));
  }
  ds.high = simulator_table(design(n_h, 4, derive_seed(seed, 2)));
  for (Index i = 0; i < ds.high.y.size(); ++i) {
    ds.high.y[i] = y_h_toy(ds.high.x.row(i).transpose(), ds.high.t_shared(i, 0), ds.high.t_own(i, 0));
  }

  Rng noise(derive_seed(seed, 3));
  ds.field.x = design(n_f, 2, derive_seed(seed, 4));
  ds.field.y.resize(ds.field.x.rows());
  for (Index i = 0; i < ds.field.y.size(); ++i) ds.field.y[i] = y_f_toy(ds.field.x.row(i).transpose(), noise);

  ValidationSet& v = out.validation;
  v.x = design(validation_n, 2, derive_seed(seed, 5));
  v.y.resize(v.x.rows());
  v.mean.resize(v.x.rows());
  for (Index i = 0; i < v.x.rows(); ++i) {
    v.mean[i] = field_mean_toy(v.x.row(i).transpose());
    v.y[i] = y_f_toy(v.x.row(i).transpose(), noise);
  }
  ds.validate();
  return out;
}

std::string to_string(ToyModel m) {
  switch (m) {
    case ToyModel::D1: return "D1";
    case ToyModel::D2: return "D2";
    case ToyModel::D3: return "D3";
  }
  return "?";
}

ToyModel toy_model_from_string(const std::string& s) {
  if (s == "D1") return ToyModel::D1;
  if (s == "D2") return ToyModel::D2;
  if (s == "D3") return ToyModel::D3;
  throw InvalidArgumentError("unknown model '" + s + "' (expected D1, D2 or D3)");
}

MultiFidelityDataSet model_dataset(const MultiFidelityDataSet& raw, ToyModel model) {
  MultiFidelityDataSet ds = raw.transform.is_identity() ? raw : raw.destandardized();
  switch (model) {
    case ToyModel::D3:
      break;
    case ToyModel::D1:
      ds.form = ModelForm::single_level;
      ds.dims.m_h = 0;
      ds.high = SimulatorTable{MatrixXd(0, static_cast<Index>(ds.dims.p)),
                               MatrixXd(0, static_cast<Index>(ds.dims.m_f)), MatrixXd(0, 0),
                               VectorXd(0)};
      break;
    case ToyModel::D2:
      if (ds.n_high() == 0) throw InvalidArgumentError("model D2 needs high fidelity runs");
      ds.form = ModelForm::single_level;
      ds.dims.m_l = ds.dims.m_h;
      ds.dims.m_h = 0;
      ds.low = ds.high;
      ds.high = SimulatorTable{MatrixXd(0, static_cast<Index>(ds.dims.p)),
                               MatrixXd(0, static_cast<Index>(ds.dims.m_f)), MatrixXd(0, 0),
                               VectorXd(0)};
      break;
  }
  ds.validate();
  return standardize_responses(ds);
}

void StudyConfig::validate() const {
  if (models.empty()) throw InvalidArgumentError("simulation study needs at least one model");
  if (replicates == 0) throw InvalidArgumentError("simulation study needs at least one replicate");
  if (validation_n == 0) throw InvalidArgumentError("simulation study needs validation points");
  if (n_l == 0 || n_f == 0) throw InvalidArgumentError("simulation study needs n_l >= 1 and n_f >= 1");
  const bool needs_high = std::any_of(models.begin(), models.end(),
                                      [](ToyModel m) { return m != ToyModel::D1; });
  if (needs_high && n_h == 0) throw InvalidArgumentError("models D2 and D3 need n_h >= 1");
}

const ModelSummary& StudyResult::summary(ToyModel m) const {
  for (const auto& s : summaries) {
    if (s.model == m) return s;
  }
  throw InvalidArgumentError("model " + to_string(m) + " was not part of the study");
}

StudyResult run_sim_study(const StudyConfig& config) {
  config.validate();
  const std::size_t n_models = config.models.size();
  StudyResult result;
  result.models = config.models;
  result.rmspe = MatrixXd::Constant(static_cast<Index>(config.replicates), static_cast<Index>(n_models),
                                    std::numeric_limits<double>::quiet_NaN());
  std::vector<std::vector<std::string>> failures(config.replicates);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  parallel_for(config.replicates, config.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(config.seed, r);
    const ToyData data =
        generate_toy_data(config.n_l, config.n_h, config.n_f, config.validation_n, rep_seed);
    for (std::size_t k = 0; k < n_models; ++k) {
      const ToyModel model = config.models[k];
      try {
        const MultiFidelityDataSet ds = model_dataset(data.dataset, model);
        FitOptions options = config.fit;
        options.mcmc.seed = derive_seed(rep_seed, 100 + static_cast<std::uint64_t>(model));
        options.mcmc.progress = nullptr;
        const FitResult fit = fit_model(ds, options);
        const VectorXd pred = posterior_mean(ds, fit.chain, data.validation.x, config.thin);
        result.rmspe(static_cast<Index>(r), static_cast<Index>(k)) = rmspe(pred, data.validation.y);
      } catch (const Error& e) {
        failures[r].push_back("replicate " + std::to_string(r) + " model " + to_string(model) + ": " +
                              e.what());
      }
    }
    const std::size_t finished = ++done;
    if (config.progress) {
      std::lock_guard lock(progress_mutex);
      config.progress(finished, config.replicates);
    }
  });

  for (auto& f : failures) {
    for (auto& msg : f) {
      log_warning("sim-study: " + msg);
      result.failures.push_back(std::move(msg));
    }
  }

  for (std::size_t k = 0; k < n_models; ++k) {
    ModelSummary s;
    s.model = config.models[k];
    std::vector<double> ok;
    for (Index r = 0; r < result.rmspe.rows(); ++r) {
      const double v = result.rmspe(r, static_cast<Index>(k));
      if (std::isnan(v)) {
        ++s.n_failed;
      } else {
        ok.push_back(v);
      }
    }
    s.n_ok = ok.size();
    if (!ok.empty()) {
      s.min = *std::min_element(ok.begin(), ok.end());
      s.max = *std::max_element(ok.begin(), ok.end());
      s.q1 = sample_quantile(ok, 0.25);
      s.median = sample_quantile(ok, 0.5);
      s.q3 = sample_quantile(ok, 0.75);
    } else {
      s.min = s.q1 = s.median = s.q3 = s.max = std::numeric_limits<double>::quiet_NaN();
    }
    result.summaries.push_back(s);
  }
  return result;
}

}  // namespace mfcal
