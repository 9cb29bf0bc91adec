#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mfcal/io.hpp"

namespace mfcal {

/// Progress callback that prints to stderr at most once per second, plus
/// the final step.
class ProgressReporter {
 public:
  explicit ProgressReporter(std::string label);
  void operator()(std::size_t done, std::size_t total);

 private:
  std::string label_;
  std::chrono::steady_clock::time_point last_{};
  bool printed_ = false;
};

/// Files written by a command, in write order.
using Outputs = std::vector<std::filesystem::path>;

/// chain.csv, chain.json, posterior_summary.csv, timing.json.
Outputs cmd_fit(const RunConfig& config);
/// predictions.csv; with a y column also predicted_vs_actual.csv and residuals.csv.
Outputs cmd_predict(const RunConfig& config);
/// loo.csv and loo.json.
Outputs cmd_loo(const RunConfig& config);
/// field.csv, high.csv, low.csv, validation.csv and a ready-to-use config.json.
Outputs cmd_toy_gen(const StudySettings& sizes, std::uint64_t seed, const std::filesystem::path& out_dir);
/// rmspe.csv, rmspe_boxplot.csv, study.json, timing.json.
Outputs cmd_sim_study(const RunConfig& config);
/// n x d design as CSV with columns x1..xd.
std::string cmd_lhs(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace mfcal
