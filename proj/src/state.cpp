#include "mfcal/state.hpp"

#include <algorithm>

#include "mfcal/error.hpp"

namespace mfcal {

namespace {

Eigen::VectorXd clamped(Eigen::VectorXd v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = clamp_rho(v[i]);
  return v;
}

template <class State>
auto& theta_vec(State& s, ParameterGroup g) {
  switch (g) {
    case ParameterGroup::theta_f: return s.theta.theta_f;
    case ParameterGroup::theta_h: return s.theta.theta_h;
    case ParameterGroup::theta_l: return s.theta.theta_l;
    case ParameterGroup::rho_eta_l: return s.correlations.rho_eta_l;
    case ParameterGroup::rho_2: return s.correlations.rho_2;
    case ParameterGroup::rho_f: return s.correlations.rho_f;
    default: break;
  }
  throw InvalidArgumentError("not a vector parameter group");
}

template <class State>
auto& precision_ref(State& s, ParameterGroup g) {
  switch (g) {
    case ParameterGroup::lambda_eta_l: return s.precisions.lambda_eta_l;
    case ParameterGroup::lambda_2: return s.precisions.lambda_2;
    case ParameterGroup::lambda_f: return s.precisions.lambda_f;
    case ParameterGroup::lambda_y: return s.precisions.lambda_y;
    default: break;
  }
  throw InvalidArgumentError("not a precision parameter group");
}

void expect_size(const Eigen::VectorXd& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(n));
  }
}

}  // namespace

double clamp_rho(double rho) { return std::clamp(rho, kRhoFloor, kRhoCeiling); }

CorrelationParams::CorrelationParams(Eigen::VectorXd eta_l, Eigen::VectorXd delta_2,
                                     Eigen::VectorXd field)
    : rho_eta_l(clamped(std::move(eta_l))),
      rho_2(clamped(std::move(delta_2))),
      rho_f(clamped(std::move(field))) {}

ParameterState ParameterState::initial(const Dimensions& dims) {
  const auto n = [](std::size_t k) { return static_cast<Eigen::Index>(k); };
  ParameterState s;
  s.theta.theta_f = Eigen::VectorXd::Constant(n(dims.m_f), 0.5);
  s.theta.theta_h = Eigen::VectorXd::Constant(n(dims.m_h), 0.5);
  s.theta.theta_l = Eigen::VectorXd::Constant(n(dims.m_l), 0.5);
  s.precisions = PrecisionParams{1.0, 20.0, 20.0, 20.0};
  s.correlations = CorrelationParams(Eigen::VectorXd::Constant(n(dims.eta_width()), 0.1),
                                     Eigen::VectorXd::Constant(n(dims.delta_width()), 0.1),
                                     Eigen::VectorXd::Constant(n(dims.p), 0.1));
  return s;
}

void ParameterState::check_dimensions(const Dimensions& dims, ModelForm form) const {
  expect_size(theta.theta_f, dims.m_f, "theta_f");
  expect_size(theta.theta_l, dims.m_l, "theta_l");
  expect_size(correlations.rho_eta_l, dims.eta_width(), "rho_eta_l");
  expect_size(correlations.rho_f, dims.p, "rho_f");
  if (form == ModelForm::two_level) {
    expect_size(theta.theta_h, dims.m_h, "theta_h");
    expect_size(correlations.rho_2, dims.delta_width(), "rho_2");
  }
}

bool ParameterId::is_precision() const {
  return group == ParameterGroup::lambda_eta_l || group == ParameterGroup::lambda_2 ||
         group == ParameterGroup::lambda_f || group == ParameterGroup::lambda_y;
}

bool ParameterId::is_calibration() const {
  return group == ParameterGroup::theta_f || group == ParameterGroup::theta_h ||
         group == ParameterGroup::theta_l;
}

bool ParameterId::is_correlation() const {
  return group == ParameterGroup::rho_eta_l || group == ParameterGroup::rho_2 ||
         group == ParameterGroup::rho_f;
}

std::string ParameterId::name() const {
  const char* base = "";
  switch (group) {
    case ParameterGroup::theta_f: base = "theta_f"; break;
    case ParameterGroup::theta_h: base = "theta_h"; break;
    case ParameterGroup::theta_l: base = "theta_l"; break;
    case ParameterGroup::rho_eta_l: base = "rho_eta_l"; break;
    case ParameterGroup::rho_2: base = "rho_2"; break;
    case ParameterGroup::rho_f: base = "rho_f"; break;
    case ParameterGroup::lambda_eta_l: return "lambda_eta_l";
    case ParameterGroup::lambda_2: return "lambda_2";
    case ParameterGroup::lambda_f: return "lambda_f";
    case ParameterGroup::lambda_y: return "lambda_y";
  }
  return std::string(base) + "[" + std::to_string(index) + "]";
}

std::vector<ParameterId> parameter_layout(const Dimensions& dims, ModelForm form) {
  const bool two = form == ModelForm::two_level;
  std::vector<ParameterId> out;
  auto add = [&](ParameterGroup g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back({g, i});
  };
  add(ParameterGroup::theta_f, dims.m_f);
  if (two) add(ParameterGroup::theta_h, dims.m_h);
  add(ParameterGroup::theta_l, dims.m_l);
  add(ParameterGroup::rho_eta_l, dims.eta_width());
  if (two) add(ParameterGroup::rho_2, dims.delta_width());
  add(ParameterGroup::rho_f, dims.p);
  add(ParameterGroup::lambda_eta_l, 1);
  if (two) add(ParameterGroup::lambda_2, 1);
  add(ParameterGroup::lambda_f, 1);
  add(ParameterGroup::lambda_y, 1);
  return out;
}

double get_parameter(const ParameterState& state, ParameterId id) {
  if (id.is_precision()) return precision_ref(state, id.group);
  const Eigen::VectorXd& v = theta_vec(state, id.group);
  if (id.index >= static_cast<std::size_t>(v.size())) {
    throw DimensionError("parameter " + id.name() + " out of range");
  }
  return v[static_cast<Eigen::Index>(id.index)];
}

void set_parameter(ParameterState& state, ParameterId id, double value) {
  if (id.is_precision()) {
    precision_ref(state, id.group) = value;
    return;
  }
  Eigen::VectorXd& v = theta_vec(state, id.group);
  if (id.index >= static_cast<std::size_t>(v.size())) {
    throw DimensionError("parameter " + id.name() + " out of range");
  }
  v[static_cast<Eigen::Index>(id.index)] = id.is_correlation() ? clamp_rho(value) : value;
}

Eigen::VectorXd flatten(const ParameterState& state, const std::vector<ParameterId>& layout) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(layout.size()));
  for (std::size_t i = 0; i < layout.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = get_parameter(state, layout[i]);
  }
  return out;
}

ParameterState unflatten(const Eigen::VectorXd& values, const std::vector<ParameterId>& layout,
                         const Dimensions& dims) {
  if (static_cast<std::size_t>(values.size()) != layout.size()) {
    throw DimensionError("parameter vector length does not match layout");
  }
  ParameterState s = ParameterState::initial(dims);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    set_parameter(s, layout[i], values[static_cast<Eigen::Index>(i)]);
  }
  return s;
}

}  // namespace mfcal
