#include "mfcal/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mfcal/error.hpp"
#include "mfcal_generated/run_config_schema.hpp"

namespace mfcal {

namespace fs = std::filesystem;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& s, const fs::path& path, std::size_t line, std::size_t col) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != last) {
    throw SchemaError(path.string() + ":" + std::to_string(line) + ": column " + std::to_string(col + 1) +
                      " is not a number ('" + s + "')");
  }
  return v;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name, const std::string& context) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError(context + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      std::set<std::string> seen;
      for (const auto& h : t.header) {
        if (h.empty()) throw SchemaError(path.string() + ": empty column name in header");
        if (!seen.insert(h).second) throw SchemaError(path.string() + ": duplicate column '" + h + "'");
      }
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_number(fields[c], path, line_no, c);
    rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw SchemaError(path.string() + ": missing header row");
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return t;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const MatrixXd& values) {
  if (values.rows() > 0 && values.cols() != static_cast<Index>(header.size())) {
    throw DimensionError("write_csv: " + std::to_string(header.size()) + " header names for " +
                         std::to_string(values.cols()) + " columns");
  }
  std::string text;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) text += ',';
    text += header[c];
  }
  text += '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      if (c) text += ',';
      text += format_double(values(r, c));
    }
    text += '\n';
  }
  write_text(path, text);
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------

const Json& run_config_schema() {
  static const Json schema = Json::parse(kRunConfigSchemaText);
  return schema;
}

namespace {

std::string where(const std::string& ptr) { return ptr.empty() ? "<root>" : ptr; }

bool matches_type(const Json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
  }
  return false;
}

const Json& resolve_ref(const std::string& ref, const Json& root) {
  if (ref.rfind("#", 0) != 0) throw SchemaError("unsupported schema reference '" + ref + "'");
  try {
    return root.at(Json::json_pointer(ref.substr(1)));
  } catch (const Json::exception&) {
    throw SchemaError("unresolved schema reference '" + ref + "'");
  }
}

void validate_node(const Json& v, const Json& schema, const Json& root, const std::string& ptr) {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) throw SchemaError(where(ptr) + ": not allowed");
    return;
  }
  if (schema.contains("$ref")) {
    validate_node(v, resolve_ref(schema["$ref"].get<std::string>(), root), root, ptr);
  }
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    if (!matches_type(v, type)) throw SchemaError(where(ptr) + ": expected " + type + ", got " + v.type_name());
  }
  if (schema.contains("enum")) {
    const auto& options = schema["enum"];
    if (std::find(options.begin(), options.end(), v) == options.end()) {
      throw SchemaError(where(ptr) + ": value " + v.dump() + " is not one of " + options.dump());
    }
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
      throw SchemaError(where(ptr) + ": " + v.dump() + " is below the minimum " + schema["minimum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>()) {
      throw SchemaError(where(ptr) + ": " + v.dump() + " must be greater than " +
                        schema["exclusiveMinimum"].dump());
    }
    if (schema.contains("exclusiveMaximum") && x >= schema["exclusiveMaximum"].get<double>()) {
      throw SchemaError(where(ptr) + ": " + v.dump() + " must be less than " + schema["exclusiveMaximum"].dump());
    }
  }
  if (v.is_string() && schema.contains("minLength") &&
      v.get<std::string>().size() < schema["minLength"].get<std::size_t>()) {
    throw SchemaError(where(ptr) + ": string is too short");
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) {
      throw SchemaError(where(ptr) + ": needs at least " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>()) {
      throw SchemaError(where(ptr) + ": allows at most " + schema["maxItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        validate_node(v[i], schema["items"], root, ptr + "/" + std::to_string(i));
      }
    }
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!v.contains(key.get<std::string>())) {
          throw SchemaError(where(ptr) + ": missing required key '" + key.get<std::string>() + "'");
        }
      }
    }
    const Json empty = Json::object();
    const Json& props = schema.contains("properties") ? schema["properties"] : empty;
    for (const auto& [key, child] : v.items()) {
      const std::string child_ptr = ptr + "/" + key;
      if (props.contains(key)) {
        validate_node(child, props[key], root, child_ptr);
      } else if (schema.contains("additionalProperties")) {
        const Json& extra = schema["additionalProperties"];
        if (extra.is_boolean() && !extra.get<bool>()) {
          throw SchemaError(where(ptr) + ": unknown key '" + key + "'");
        }
        validate_node(child, extra, root, child_ptr);
      }
    }
  }
}

}  // namespace

void validate_schema(const Json& instance, const Json& schema) { validate_node(instance, schema, schema, ""); }

// ---------------------------------------------------------------------------

namespace {

template <class T>
T get_or(const Json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj[key].get<T>() : fallback;
}

std::vector<std::string> names(const Json& cols, const char* key) {
  return cols.contains(key) ? cols[key].get<std::vector<std::string>>() : std::vector<std::string>{};
}

std::vector<Interval> bounds_list(const Json& bounds, const char* key, std::size_t expected,
                                  const std::string& label) {
  std::vector<Interval> out;
  if (!bounds.contains(key)) {
    out.assign(expected, Interval{0.0, 1.0});
    return out;
  }
  for (const auto& b : bounds[key]) out.push_back({b[0].get<double>(), b[1].get<double>()});
  if (out.size() != expected) {
    throw SchemaError("data.bounds." + std::string(key) + ": " + std::to_string(out.size()) +
                      " intervals for " + std::to_string(expected) + " " + label + " columns");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i].lo < out[i].hi)) {
      throw InvalidBoundsError("data.bounds." + std::string(key) + "[" + std::to_string(i) +
                               "]: lower bound must be below upper bound");
    }
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

DataConfig parse_data(const Json& d, const fs::path& base) {
  DataConfig c;
  c.field = resolve(base, d["field"].get<std::string>());
  c.low = resolve(base, d["low"].get<std::string>());
  if (d.contains("high")) c.high = resolve(base, d["high"].get<std::string>());
  c.form = get_or<std::string>(d, "form", "two_level") == "single_level" ? ModelForm::single_level
                                                                         : ModelForm::two_level;
  c.dims.p = d["p"].get<std::size_t>();
  c.dims.m_f = d["m_f"].get<std::size_t>();
  c.dims.m_l = d["m_l"].get<std::size_t>();
  c.dims.m_h = get_or<std::size_t>(d, "m_h", 0);

  const Json& cols = d["columns"];
  c.columns.x = names(cols, "x");
  c.columns.t_f = names(cols, "t_f");
  c.columns.t_h = names(cols, "t_h");
  c.columns.t_l = names(cols, "t_l");
  c.columns.y = cols["y"].get<std::string>();
  auto check_len = [](const std::vector<std::string>& v, std::size_t n, const char* key) {
    if (v.size() != n) {
      throw SchemaError("data.columns." + std::string(key) + ": lists " + std::to_string(v.size()) +
                        " names but the declared dimension is " + std::to_string(n));
    }
  };
  check_len(c.columns.x, c.dims.p, "x");
  check_len(c.columns.t_f, c.dims.m_f, "t_f");
  check_len(c.columns.t_h, c.dims.m_h, "t_h");
  check_len(c.columns.t_l, c.dims.m_l, "t_l");

  const Json& b = d["bounds"];
  c.bounds.x = bounds_list(b, "x", c.dims.p, "x");
  c.bounds.t_f = bounds_list(b, "t_f", c.dims.m_f, "t_f");
  c.bounds.t_h = bounds_list(b, "t_h", c.dims.m_h, "t_h");
  c.bounds.t_l = bounds_list(b, "t_l", c.dims.m_l, "t_l");

  if (c.form == ModelForm::single_level) {
    if (!c.high.empty()) throw SchemaError("data.high: the single_level form takes no high fidelity table");
    if (c.dims.m_h != 0) throw SchemaError("data.m_h: must be 0 for the single_level form");
  } else if (c.high.empty()) {
    throw SchemaError("data.high: the two_level form needs a high fidelity table");
  }
  return c;
}

}  // namespace

std::vector<double> resolve_widths(const RunConfig& config, const std::vector<ParameterId>& layout) {
  std::vector<double> w(layout.size());
  std::set<std::string> used;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (layout[k].is_precision()) {
      w[k] = 0.3;
      continue;
    }
    const auto it = config.widths.find(layout[k].name());
    w[k] = it == config.widths.end() ? 0.1 : it->second;
    if (it != config.widths.end()) used.insert(it->first);
  }
  for (const auto& [name, value] : config.widths) {
    if (!used.count(name)) {
      throw SchemaError("mcmc.widths: '" + name + "' is not a Metropolis parameter of this model");
    }
    (void)value;
  }
  return w;
}

RunConfig parse_run_config(const Json& j, const fs::path& base_dir) {
  validate_schema(j, run_config_schema());
  RunConfig c;
  c.source = j;
  if (j.contains("data")) c.data = parse_data(j["data"], base_dir);

  const Json empty = Json::object();
  const Json& pr = j.contains("priors") ? j["priors"] : empty;
  PriorConfig& p = c.fit.priors;
  p.a_eta_l = get_or(pr, "a_eta_l", p.a_eta_l);
  p.b_eta_l = get_or(pr, "b_eta_l", p.b_eta_l);
  p.a_star = get_or(pr, "a_star", p.a_star);
  p.b_star = get_or(pr, "b_star", p.b_star);
  p.beta_a = get_or(pr, "beta_a", p.beta_a);
  p.beta_b = get_or(pr, "beta_b", p.beta_b);
  p.lambda_y_cap = get_or(pr, "lambda_y_cap", p.lambda_y_cap);
  if (pr.contains("a_y") != pr.contains("b_y")) throw SchemaError("priors: a_y and b_y must be given together");
  if (pr.contains("a_y")) {
    p.a_y = pr["a_y"].get<double>();
    p.b_y = pr["b_y"].get<double>();
  }
  p.validate();

  const Json& mc = j.contains("mcmc") ? j["mcmc"] : empty;
  McmcConfig& m = c.fit.mcmc;
  m.steps = get_or(mc, "steps", m.steps);
  m.burn_in = get_or(mc, "burn_in", m.burn_in);
  m.thin = get_or(mc, "thin", m.thin);
  m.seed = get_or(mc, "seed", m.seed);
  c.fit.tune = get_or(mc, "tune", c.fit.tune);
  c.fit.pilot_steps = get_or(mc, "pilot_steps", c.fit.pilot_steps);
  c.fit.warmup_steps = get_or(mc, "warmup_steps", c.fit.warmup_steps);
  if (mc.contains("widths")) c.widths = mc["widths"].get<std::map<std::string, double>>();
  if (m.burn_in >= m.steps) throw SchemaError("mcmc.burn_in must be smaller than mcmc.steps");

  const Json& pd = j.contains("prediction") ? j["prediction"] : empty;
  if (pd.contains("x_new")) c.x_new = resolve(base_dir, pd["x_new"].get<std::string>());
  if (pd.contains("chain")) c.chain = resolve(base_dir, pd["chain"].get<std::string>());
  PredictionOptions& po = c.prediction;
  po.include_noise = get_or(pd, "include_noise", po.include_noise);
  po.draws_per_sample = get_or(pd, "draws_per_sample", po.draws_per_sample);
  po.thin = get_or(pd, "thin", po.thin);
  po.level = get_or(pd, "level", po.level);
  po.seed = get_or(pd, "seed", po.seed);

  const Json& st = j.contains("study") ? j["study"] : empty;
  StudySettings& s = c.study;
  s.n_l = get_or(st, "n_l", s.n_l);
  s.n_h = get_or(st, "n_h", s.n_h);
  s.n_f = get_or(st, "n_f", s.n_f);
  s.replicates = get_or(st, "replicates", s.replicates);
  s.validation_n = get_or(st, "validation_n", s.validation_n);
  s.seed = get_or(st, "seed", s.seed);
  s.thin = get_or(st, "thin", s.thin);
  s.save_datasets = get_or(st, "save_datasets", s.save_datasets);
  if (st.contains("models")) {
    s.models.clear();
    for (const auto& name : st["models"]) s.models.push_back(toy_model_from_string(name.get<std::string>()));
  }

  if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
  c.threads = get_or(j, "threads", c.threads);
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  const Json j = read_json(path);
  try {
    return parse_run_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

MatrixXd pick_columns(const CsvTable& t, const std::vector<std::string>& cols, const std::string& ctx) {
  MatrixXd out(t.values.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = t.values.col(static_cast<Index>(t.column(cols[c], ctx)));
  return out;
}

MatrixXd scale_checked(const MatrixXd& raw, const std::vector<Interval>& bounds, const std::string& ctx) {
  try {
    return scale_inputs(raw, bounds);
  } catch (const Error& e) {
    throw OutOfRangeError(ctx + ": " + e.what());
  }
}

SimulatorTable load_simulator(const fs::path& path, const DataConfig& c, const std::vector<std::string>& own,
                              const std::vector<Interval>& own_bounds) {
  const CsvTable t = read_csv(path);
  const std::string ctx = path.string();
  SimulatorTable s;
  s.x = scale_checked(pick_columns(t, c.columns.x, ctx), c.bounds.x, ctx);
  s.t_shared = scale_checked(pick_columns(t, c.columns.t_f, ctx), c.bounds.t_f, ctx);
  s.t_own = scale_checked(pick_columns(t, own, ctx), own_bounds, ctx);
  s.y = t.values.col(static_cast<Index>(t.column(c.columns.y, ctx)));
  return s;
}

}  // namespace

MultiFidelityDataSet load_dataset(const DataConfig& c) {
  MultiFidelityDataSet ds;
  ds.dims = c.dims;
  ds.form = c.form;
  {
    const CsvTable t = read_csv(c.field);
    const std::string ctx = c.field.string();
    ds.field.x = scale_checked(pick_columns(t, c.columns.x, ctx), c.bounds.x, ctx);
    ds.field.y = t.values.col(static_cast<Index>(t.column(c.columns.y, ctx)));
  }
  ds.low = load_simulator(c.low, c, c.columns.t_l, c.bounds.t_l);
  if (c.form == ModelForm::two_level) {
    ds.high = load_simulator(c.high, c, c.columns.t_h, c.bounds.t_h);
  } else {
    ds.high.x.resize(0, static_cast<Index>(c.dims.p));
    ds.high.t_shared.resize(0, static_cast<Index>(c.dims.m_f));
    ds.high.t_own.resize(0, 0);
    ds.high.y.resize(0);
  }
  ds.validate();
  return ds;
}

PredictionInputs load_prediction_inputs(const fs::path& path, const DataConfig& c) {
  const CsvTable t = read_csv(path);
  const std::string ctx = path.string();
  PredictionInputs in;
  in.x_raw = pick_columns(t, c.columns.x, ctx);
  in.x_scaled = scale_checked(in.x_raw, c.bounds.x, ctx);
  if (std::find(t.header.begin(), t.header.end(), c.columns.y) != t.header.end()) {
    in.y = VectorXd(t.values.col(static_cast<Index>(t.column(c.columns.y, ctx))));
  }
  return in;
}

// ---------------------------------------------------------------------------

void write_chain_csv(const fs::path& path, const Chain& chain) {
  std::vector<std::string> header;
  for (const auto& id : chain.layout) header.push_back(id.name());
  header.push_back("log_posterior");
  MatrixXd values(chain.samples.rows(), chain.samples.cols() + 1);
  values.leftCols(chain.samples.cols()) = chain.samples;
  for (std::size_t i = 0; i < chain.size(); ++i) values(static_cast<Index>(i), chain.samples.cols()) = chain.log_posteriors[i];
  write_csv(path, header, values);
}

Chain read_chain_csv(const fs::path& path, const Dimensions& dims, ModelForm form) {
  const CsvTable t = read_csv(path);
  Chain chain;
  chain.dims = dims;
  chain.form = form;
  chain.layout = parameter_layout(dims, form);
  std::vector<std::string> expected;
  for (const auto& id : chain.layout) expected.push_back(id.name());
  expected.push_back("log_posterior");
  if (t.header != expected) {
    std::string want, got;
    for (const auto& s : expected) want += (want.empty() ? "" : ",") + s;
    for (const auto& s : t.header) got += (got.empty() ? "" : ",") + s;
    throw DimensionError(path.string() + ": chain columns do not match the dataset dimensions (expected " +
                         want + "; found " + got + ")");
  }
  const Index k = static_cast<Index>(chain.layout.size());
  chain.samples = t.values.leftCols(k);
  chain.log_posteriors.resize(static_cast<std::size_t>(t.values.rows()));
  for (Index i = 0; i < t.values.rows(); ++i) chain.log_posteriors[static_cast<std::size_t>(i)] = t.values(i, k);
  chain.proposals.assign(chain.layout.size(), 0);
  chain.accepts.assign(chain.layout.size(), 0);
  chain.steps = chain.size();
  return chain;
}

Json chain_sidecar(const Chain& chain, const std::optional<TuningResult>& tuning, const Json& config) {
  Json j;
  j["config"] = config;
  j["seed"] = chain.seed;
  j["steps"] = chain.steps;
  j["burn_in"] = chain.burn_in;
  j["thin"] = chain.thin;
  j["retained"] = chain.size();
  j["lambda_y_cap_rejections"] = chain.lambda_y_cap_rejections;
  const std::vector<double> rates = chain.acceptance_rates();
  Json params = Json::object();
  for (std::size_t k = 0; k < chain.layout.size(); ++k) {
    Json e;
    e["width"] = chain.widths[k];
    e["width_kind"] = chain.layout[k].is_precision() ? "relative" : "absolute";
    e["acceptance"] = rates[k];
    if (tuning) e["pilot_acceptance"] = tuning->acceptance[k];
    params[chain.layout[k].name()] = e;
  }
  j["parameters"] = params;
  if (tuning) {
    j["tuning"] = {{"in_band", tuning->in_band}, {"warnings", tuning->warnings}};
  }
  return j;
}

std::vector<ParameterSummary> summarize_chain(const Chain& chain, double level) {
  std::vector<ParameterSummary> out;
  if (chain.size() == 0) return out;
  const double tail = 0.5 * (1.0 - level);
  for (std::size_t k = 0; k < chain.layout.size(); ++k) {
    const VectorXd col = chain.samples.col(static_cast<Index>(k));
    ParameterSummary s;
    s.name = chain.layout[k].name();
    s.mean = col.mean();
    const double n = static_cast<double>(col.size());
    s.sd = col.size() > 1 ? std::sqrt((col.array() - s.mean).square().sum() / (n - 1.0)) : 0.0;
    std::vector<double> v(col.data(), col.data() + col.size());
    s.lower = sample_quantile(v, tail);
    s.upper = sample_quantile(std::move(v), 1.0 - tail);
    out.push_back(s);
  }
  return out;
}

void write_posterior_summary(const fs::path& path, const std::vector<ParameterSummary>& summary) {
  std::string text = "parameter,mean,sd,lower,upper\n";
  for (const auto& s : summary) {
    text += s.name + "," + format_double(s.mean) + "," + format_double(s.sd) + "," + format_double(s.lower) +
            "," + format_double(s.upper) + "\n";
  }
  write_text(path, text);
}

void write_predictions(const fs::path& path, const std::vector<std::string>& x_names, const MatrixXd& x_raw,
                       const std::vector<PredictiveSummary>& preds) {
  std::vector<std::string> header = x_names;
  for (const char* h : {"mean", "variance", "lower", "upper"}) header.emplace_back(h);
  MatrixXd values(static_cast<Index>(preds.size()), static_cast<Index>(header.size()));
  const Index p = static_cast<Index>(x_names.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Index r = static_cast<Index>(i);
    values.row(r).head(p) = x_raw.row(r);
    values(r, p) = preds[i].mean;
    values(r, p + 1) = preds[i].variance;
    values(r, p + 2) = preds[i].lower;
    values(r, p + 3) = preds[i].upper;
  }
  write_csv(path, header, values);
}

}  // namespace mfcal
