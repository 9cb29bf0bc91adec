// Python extension: thin wrappers over the C++ library.
#include <filesystem>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mfcal/commands.hpp"
#include "mfcal/design.hpp"
#include "mfcal/error.hpp"
#include "mfcal/io.hpp"
#include "mfcal/log.hpp"
#include "mfcal/predict.hpp"
#include "mfcal/toybench.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace mfcal;

namespace {

std::vector<std::string> to_strings(const Outputs& files) {
  std::vector<std::string> out;
  for (const auto& p : files) out.push_back(p.string());
  return out;
}

// Config from a file; the keyword overrides mirror the command-line flags.
RunConfig config_from(const fs::path& path, std::optional<std::uint64_t> seed, std::optional<std::size_t> steps,
                      std::optional<std::size_t> burn_in, std::optional<fs::path> out_dir) {
  RunConfig c = load_run_config(path);
  if (seed) c.fit.mcmc.seed = c.study.seed = *seed;
  if (steps) c.fit.mcmc.steps = *steps;
  if (burn_in) c.fit.mcmc.burn_in = *burn_in;
  if (out_dir) c.output_dir = *out_dir;
  if (c.fit.mcmc.burn_in >= c.fit.mcmc.steps) throw InvalidArgumentError("burn_in must be smaller than steps");
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-fidelity Bayesian calibration";

  // Registered first so the more specific translators below take precedence.
  auto& base = py::register_exception<Error>(m, "MfcalError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<SingularityError>(m, "SingularityError", base.ptr());

  m.def("set_quiet", [](bool q) { set_log_level(q ? LogLevel::quiet : LogLevel::warning); }, py::arg("quiet") = true);

  m.def("lhs", [](std::size_t n, std::size_t d, std::uint64_t seed) { return lhs(n, d, seed).points; },
        py::arg("n"), py::arg("d"), py::arg("seed"), "n x d Latin hypercube on [0, 1).");
  m.def("is_latin_hypercube", &is_latin_hypercube, py::arg("points"));

  m.def("eta_l_toy", [](double x1, double x2, double t_f, double t_l) { return eta_l_toy({x1, x2}, t_f, t_l); },
        py::arg("x1"), py::arg("x2"), py::arg("t_f"), py::arg("t_l"));
  m.def("delta_2_toy", [](double x1, double x2, double t_f, double t_h) { return delta_2_toy({x1, x2}, t_f, t_h); },
        py::arg("x1"), py::arg("x2"), py::arg("t_f"), py::arg("t_h"));
  m.def("delta_f_toy", [](double x1, double x2) { return delta_f_toy({x1, x2}); }, py::arg("x1"), py::arg("x2"));
  m.def("field_mean_toy", [](double x1, double x2) { return field_mean_toy({x1, x2}); }, py::arg("x1"),
        py::arg("x2"));

  m.def("rmspe", py::overload_cast<const Eigen::VectorXd&, const Eigen::VectorXd&>(&rmspe), py::arg("predictions"),
        py::arg("actuals"));
  m.def("sample_quantile", &sample_quantile, py::arg("values"), py::arg("q"), "Type-7 sample quantile.");

  m.def("run_config_schema", [] { return run_config_schema().dump(); }, "Bundled run-config schema as JSON text.");
  m.def(
      "validate_config", [](const std::string& text) { validate_schema(Json::parse(text), run_config_schema()); },
      py::arg("json_text"), "Raises SchemaError if the document does not satisfy the schema.");

  m.def(
      "toy_gen",
      [](const fs::path& out_dir, std::uint64_t seed, std::size_t n_low, std::size_t n_high, std::size_t n_field,
         std::size_t n_validation) {
        StudySettings s;
        s.n_l = n_low;
        s.n_h = n_high;
        s.n_f = n_field;
        s.validation_n = n_validation;
        return to_strings(cmd_toy_gen(s, seed, out_dir));
      },
      py::arg("out_dir"), py::arg("seed") = 1, py::arg("n_low") = 40, py::arg("n_high") = 10, py::arg("n_field") = 3,
      py::arg("n_validation") = 25);

  m.def(
      "fit",
      [](const fs::path& config, std::optional<std::uint64_t> seed, std::optional<std::size_t> steps,
         std::optional<std::size_t> burn_in, std::optional<fs::path> out_dir) {
        const RunConfig c = config_from(config, seed, steps, burn_in, out_dir);
        py::gil_scoped_release release;
        return to_strings(cmd_fit(c));
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("steps") = py::none(), py::arg("burn_in") = py::none(),
      py::arg("out_dir") = py::none(), "Runs the sampler; returns the written file paths.");
  m.def(
      "predict",
      [](const fs::path& config, std::optional<fs::path> out_dir) {
        const RunConfig c = config_from(config, std::nullopt, std::nullopt, std::nullopt, out_dir);
        py::gil_scoped_release release;
        return to_strings(cmd_predict(c));
      },
      py::arg("config"), py::arg("out_dir") = py::none());
  m.def(
      "sim_study",
      [](const fs::path& config, std::optional<std::size_t> replicates, std::optional<std::uint64_t> seed,
         std::optional<std::size_t> steps, std::optional<std::size_t> burn_in, std::optional<fs::path> out_dir) {
        RunConfig c = config_from(config, seed, steps, burn_in, out_dir);
        if (replicates) c.study.replicates = *replicates;
        py::gil_scoped_release release;
        return to_strings(cmd_sim_study(c));
      },
      py::arg("config"), py::arg("replicates") = py::none(), py::arg("seed") = py::none(),
      py::arg("steps") = py::none(), py::arg("burn_in") = py::none(), py::arg("out_dir") = py::none());
}
