// mfcal command-line front end.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mfcal/commands.hpp"
#include "mfcal/error.hpp"
#include "mfcal/log.hpp"

namespace fs = std::filesystem;
using namespace mfcal;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> burn_in;
  std::optional<std::size_t> threads;
  std::optional<std::string> out_dir;
  std::optional<bool> include_noise;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_config) {
  auto* opt = cmd->add_option("--config", f.config, "run configuration (JSON)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--steps", f.steps, "MCMC sweeps including burn-in");
  cmd->add_option("--burn-in", f.burn_in, "sweeps discarded before recording");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_option("--include-noise", f.include_noise, "add observation noise to predictions (true/false)");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? parse_run_config(Json::object(), fs::current_path())
                                 : load_run_config(f.config);
  if (f.seed) {
    c.fit.mcmc.seed = *f.seed;
    c.study.seed = *f.seed;
  }
  if (f.steps) c.fit.mcmc.steps = *f.steps;
  if (f.burn_in) c.fit.mcmc.burn_in = *f.burn_in;
  if (f.threads) c.threads = *f.threads;
  if (f.out_dir) c.output_dir = *f.out_dir;
  if (f.include_noise) c.prediction.include_noise = *f.include_noise;
  if (c.fit.mcmc.burn_in >= c.fit.mcmc.steps) {
    throw InvalidArgumentError("burn-in (" + std::to_string(c.fit.mcmc.burn_in) +
                               ") must be smaller than steps (" + std::to_string(c.fit.mcmc.steps) + ")");
  }
  return c;
}

void report(const Outputs& files) {
  for (const auto& p : files) std::cout << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity Bayesian calibration of computer models"};
  app.require_subcommand(1);
  bool quiet = false;
  bool verbose = false;
  app.add_flag("-q,--quiet", quiet, "suppress warnings and progress");
  app.add_flag("-v,--verbose", verbose, "extra diagnostics on stderr");

  CommonFlags fit_f, pred_f, loo_f, gen_f, study_f;
  auto* fit = app.add_subcommand("fit", "sample the posterior and write the chain");
  add_common(fit, fit_f, true);

  auto* predict = app.add_subcommand("predict", "posterior predictive summaries at new inputs");
  add_common(predict, pred_f, true);
  std::string chain_path, x_new_path;
  predict->add_option("--chain", chain_path, "chain CSV (default: <out-dir>/chain.csv)");
  predict->add_option("--x-new", x_new_path, "CSV of target inputs");

  auto* loo_cmd = app.add_subcommand("loo", "leave-one-out over field observations");
  add_common(loo_cmd, loo_f, true);

  auto* gen = app.add_subcommand("toy-gen", "generate data from the analytic toy system");
  add_common(gen, gen_f, false);
  std::size_t n_l = 40, n_h = 10, n_f = 3, n_val = 25;
  gen->add_option("--n-low", n_l, "low fidelity runs");
  gen->add_option("--n-high", n_h, "high fidelity runs");
  gen->add_option("--n-field", n_f, "field observations");
  gen->add_option("--n-validation", n_val, "validation observations");

  auto* study = app.add_subcommand("sim-study", "repeated D1/D2/D3 comparison on toy data");
  add_common(study, study_f, false);
  std::optional<std::size_t> replicates;
  study->add_option("--replicates", replicates, "number of replicates");
  bool save_data = false;
  study->add_flag("--save-data", save_data, "also write each replicate's datasets");

  auto* lhs_cmd = app.add_subcommand("lhs", "random Latin hypercube design as CSV");
  std::size_t lhs_n = 0, lhs_d = 0;
  std::uint64_t lhs_seed = 0;
  lhs_cmd->add_option("n", lhs_n, "points")->required();
  lhs_cmd->add_option("d", lhs_d, "dimensions")->required();
  lhs_cmd->add_option("seed", lhs_seed, "seed")->required();
  std::string lhs_out;
  lhs_cmd->add_option("-o,--output", lhs_out, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  set_log_level(quiet ? LogLevel::quiet : verbose ? LogLevel::info : LogLevel::warning);

  try {
    if (*fit) {
      report(cmd_fit(resolve(fit_f)));
    } else if (*predict) {
      RunConfig c = resolve(pred_f);
      if (!chain_path.empty()) c.chain = chain_path;
      if (!x_new_path.empty()) c.x_new = x_new_path;
      report(cmd_predict(c));
    } else if (*loo_cmd) {
      report(cmd_loo(resolve(loo_f)));
    } else if (*gen) {
      RunConfig c = resolve(gen_f);
      StudySettings sizes = c.study;
      sizes.n_l = n_l;
      sizes.n_h = n_h;
      sizes.n_f = n_f;
      sizes.validation_n = n_val;
      const std::uint64_t seed = gen_f.seed.value_or(c.fit.mcmc.seed);
      const fs::path dir = gen_f.out_dir ? fs::path(*gen_f.out_dir) : c.output_dir;
      report(cmd_toy_gen(sizes, seed, dir));
    } else if (*study) {
      RunConfig c = resolve(study_f);
      if (replicates) c.study.replicates = *replicates;
      if (save_data) c.study.save_datasets = true;
      report(cmd_sim_study(c));
    } else if (*lhs_cmd) {
      const std::string csv = cmd_lhs(lhs_n, lhs_d, lhs_seed);
      if (lhs_out.empty()) {
        std::cout << csv;
      } else {
        write_text(lhs_out, csv);
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
