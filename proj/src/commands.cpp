#include "mfcal/commands.hpp"

#include <cstdio>

#include "mfcal/design.hpp"
#include "mfcal/error.hpp"
#include "mfcal/log.hpp"

namespace mfcal {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

ProgressReporter::ProgressReporter(std::string label) : label_(std::move(label)) {}

void ProgressReporter::operator()(std::size_t done, std::size_t total) {
  if (log_level() == LogLevel::quiet) return;
  const auto now = Clock::now();
  const bool last = done == total;
  if (!last && printed_ && now - last_ < std::chrono::seconds(1)) return;
  last_ = now;
  printed_ = true;
  std::fprintf(stderr, "%s: %zu/%zu\n", label_.c_str(), done, total);
}

namespace {

const DataConfig& require_data(const RunConfig& config, const char* cmd) {
  if (!config.data) throw SchemaError(std::string(cmd) + ": the config has no 'data' section");
  return *config.data;
}

FitOptions fit_options(const RunConfig& config, const MultiFidelityDataSet& ds) {
  FitOptions options = config.fit;
  if (!config.widths.empty()) {
    options.mcmc.widths = resolve_widths(config, parameter_layout(ds.dims, ds.form));
  }
  return options;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> numbered(const std::string& stem, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(stem + std::to_string(i + 1));
  return out;
}

}  // namespace

Outputs cmd_fit(const RunConfig& config) {
  const auto t0 = Clock::now();
  const DataConfig& dc = require_data(config, "fit");
  const MultiFidelityDataSet ds = standardize_responses(load_dataset(dc));
  FitOptions options = fit_options(config, ds);
  ProgressReporter progress("fit");
  options.mcmc.progress = [&progress](std::size_t d, std::size_t t) { progress(d, t); };
  const FitResult fit = fit_model(ds, options);

  Outputs out{config.output_dir / "chain.csv", config.output_dir / "chain.json",
              config.output_dir / "posterior_summary.csv", config.output_dir / "timing.json"};
  write_chain_csv(out[0], fit.chain);
  Json sidecar = chain_sidecar(fit.chain, fit.tuning, config.source);
  sidecar["standardization"] = {{"center", ds.transform.center()}, {"scale", ds.transform.scale()}};
  write_json(out[1], sidecar);
  write_posterior_summary(out[2], summarize_chain(fit.chain));
  write_json(out[3], Json{{"command", "fit"}, {"seconds", seconds_since(t0)}});
  return out;
}

Outputs cmd_predict(const RunConfig& config) {
  const DataConfig& dc = require_data(config, "predict");
  if (!config.x_new) throw SchemaError("predict: set prediction.x_new to a CSV of target inputs");
  const MultiFidelityDataSet ds = standardize_responses(load_dataset(dc));
  const fs::path chain_path = config.chain ? *config.chain : config.output_dir / "chain.csv";
  const Chain chain = read_chain_csv(chain_path, ds.dims, ds.form);
  const PredictionInputs in = load_prediction_inputs(*config.x_new, dc);

  PredictionOptions options = config.prediction;
  options.threads = config.threads;
  const auto preds = posterior_predictive(ds, chain, in.x_scaled, options);

  Outputs out{config.output_dir / "predictions.csv"};
  write_predictions(out[0], dc.columns.x, in.x_raw, preds);
  if (in.y) {
    const Index n = in.y->size();
    MatrixXd pva(n, 4);
    MatrixXd resid(n, in.x_raw.cols() + 1);
    for (Index i = 0; i < n; ++i) {
      const auto& s = preds[static_cast<std::size_t>(i)];
      pva.row(i) << (*in.y)[i], s.mean, s.lower, s.upper;
      resid.row(i).head(in.x_raw.cols()) = in.x_raw.row(i);
      resid(i, in.x_raw.cols()) = (*in.y)[i] - s.mean;
    }
    out.push_back(config.output_dir / "predicted_vs_actual.csv");
    write_csv(out.back(), {"actual", "predicted", "lower", "upper"}, pva);
    std::vector<std::string> header = dc.columns.x;
    header.emplace_back("residual");
    out.push_back(config.output_dir / "residuals.csv");
    write_csv(out.back(), header, resid);
  }
  return out;
}

Outputs cmd_loo(const RunConfig& config) {
  const DataConfig& dc = require_data(config, "loo");
  const MultiFidelityDataSet ds = standardize_responses(load_dataset(dc));
  FitOptions options = fit_options(config, ds);
  ProgressReporter progress("loo");
  const LooResult res = loo(ds, options, config.prediction, config.fit.mcmc.seed, config.threads);
  progress(ds.n_field(), ds.n_field());

  const MatrixXd x_raw = unscale_inputs(ds.field.x, dc.bounds.x);
  std::vector<std::string> header{"index"};
  header.insert(header.end(), dc.columns.x.begin(), dc.columns.x.end());
  for (const char* h : {"actual", "mean", "variance", "lower", "upper", "covered"}) header.emplace_back(h);
  const Index p = x_raw.cols();
  MatrixXd values(static_cast<Index>(ds.n_field()), static_cast<Index>(header.size()));
  for (std::size_t i = 0; i < ds.n_field(); ++i) {
    const Index r = static_cast<Index>(i);
    const auto& s = res.predictions[i];
    values(r, 0) = static_cast<double>(i);
    values.row(r).segment(1, p) = x_raw.row(r);
    values.row(r).tail(6) << res.actual[r], s.mean, s.variance, s.lower, s.upper, res.covered[i] ? 1.0 : 0.0;
  }
  Outputs out{config.output_dir / "loo.csv", config.output_dir / "loo.json"};
  write_csv(out[0], header, values);
  write_json(out[1], Json{{"n", ds.n_field()}, {"covered", res.n_covered()}, {"level", config.prediction.level}});
  return out;
}

Outputs cmd_toy_gen(const StudySettings& sizes, std::uint64_t seed, const fs::path& out_dir) {
  const ToyData data = generate_toy_data(sizes.n_l, sizes.n_h, sizes.n_f, sizes.validation_n, seed);
  const MultiFidelityDataSet& ds = data.dataset;
  Outputs out{out_dir / "field.csv", out_dir / "high.csv", out_dir / "low.csv", out_dir / "validation.csv",
              out_dir / "config.json"};

  MatrixXd field(ds.n_field(), 3);
  field << ds.field.x, ds.field.y;
  write_csv(out[0], {"x1", "x2", "y"}, field);
  auto sim = [](const SimulatorTable& t) {
    MatrixXd m(t.y.size(), 5);
    if (t.y.size() > 0) m << t.x, t.t_shared, t.t_own, t.y;
    return m;
  };
  write_csv(out[1], {"x1", "x2", "t_f1", "t_h1", "y"}, sim(ds.high));
  write_csv(out[2], {"x1", "x2", "t_f1", "t_l1", "y"}, sim(ds.low));
  MatrixXd val(data.validation.x.rows(), 4);
  if (val.rows() > 0) val << data.validation.x, data.validation.y, data.validation.mean;
  write_csv(out[3], {"x1", "x2", "y", "mean"}, val);

  const Json unit = Json::array({Json::array({0.0, 1.0})});
  Json cfg = {
      {"data",
       {{"field", "field.csv"},
        {"high", "high.csv"},
        {"low", "low.csv"},
        {"form", "two_level"},
        {"p", 2},
        {"m_f", 1},
        {"m_h", 1},
        {"m_l", 1},
        {"columns", {{"x", {"x1", "x2"}}, {"t_f", {"t_f1"}}, {"t_h", {"t_h1"}}, {"t_l", {"t_l1"}}, {"y", "y"}}},
        {"bounds",
         {{"x", Json::array({Json::array({0.0, 1.0}), Json::array({0.0, 1.0})})},
          {"t_f", unit},
          {"t_h", unit},
          {"t_l", unit}}}}},
      {"mcmc", {{"steps", 10000}, {"burn_in", 2000}, {"seed", seed}}},
      {"prediction", {{"x_new", "validation.csv"}}},
      {"output_dir", "out"}};
  write_json(out[4], cfg);
  return out;
}

Outputs cmd_sim_study(const RunConfig& config) {
  const auto t0 = Clock::now();
  const StudySettings& s = config.study;
  StudyConfig study;
  study.n_l = s.n_l;
  study.n_h = s.n_h;
  study.n_f = s.n_f;
  study.replicates = s.replicates;
  study.validation_n = s.validation_n;
  study.models = s.models;
  study.seed = s.seed;
  study.thin = s.thin;
  study.fit = config.fit;
  study.threads = config.threads;
  ProgressReporter progress("sim-study");
  study.progress = [&progress](std::size_t d, std::size_t t) { progress(d, t); };
  const StudyResult res = run_sim_study(study);

  Outputs out{config.output_dir / "rmspe.csv", config.output_dir / "rmspe_boxplot.csv",
              config.output_dir / "study.json", config.output_dir / "timing.json"};
  std::vector<std::string> header{"replicate"};
  for (ToyModel m : res.models) header.push_back(to_string(m));
  MatrixXd table(res.rmspe.rows(), res.rmspe.cols() + 1);
  for (Index r = 0; r < table.rows(); ++r) table(r, 0) = static_cast<double>(r);
  table.rightCols(res.rmspe.cols()) = res.rmspe;
  write_csv(out[0], header, table);

  std::string box = "model,n_ok,n_failed,min,q1,median,q3,max\n";
  Json summaries = Json::array();
  for (const auto& m : res.summaries) {
    box += to_string(m.model) + "," + std::to_string(m.n_ok) + "," + std::to_string(m.n_failed) + "," +
           format_double(m.min) + "," + format_double(m.q1) + "," + format_double(m.median) + "," +
           format_double(m.q3) + "," + format_double(m.max) + "\n";
    summaries.push_back({{"model", to_string(m.model)}, {"median", m.median}, {"n_ok", m.n_ok}, {"n_failed", m.n_failed}});
  }
  write_text(out[1], box);
  write_json(out[2], Json{{"config", config.source},
                          {"replicates", s.replicates},
                          {"seed", s.seed},
                          {"summaries", summaries},
                          {"failures", res.failures}});
  if (s.save_datasets) {
    for (std::size_t r = 0; r < s.replicates; ++r) {
      const fs::path dir = config.output_dir / "datasets" / ("replicate_" + std::to_string(r));
      const Outputs written = cmd_toy_gen(s, derive_seed(s.seed, r), dir);
      out.insert(out.end(), written.begin(), written.end());
    }
  }
  write_json(out[3], Json{{"command", "sim-study"}, {"seconds", seconds_since(t0)}});
  return out;
}

std::string cmd_lhs(std::size_t n, std::size_t d, std::uint64_t seed) {
  const DesignMatrix m = lhs(n, d, seed);
  std::string text;
  const auto names = numbered("x", d);
  for (std::size_t j = 0; j < d; ++j) text += (j ? "," : "") + names[j];
  text += '\n';
  for (Index i = 0; i < m.points.rows(); ++i) {
    for (Index j = 0; j < m.points.cols(); ++j) text += (j ? "," : "") + format_double(m.points(i, j));
    text += '\n';
  }
  return text;
}

}  // namespace mfcal
