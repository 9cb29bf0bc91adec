#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfcal/data.hpp"

namespace mfcal {

inline constexpr double kRhoFloor = 1e-9;
inline constexpr double kRhoCeiling = 1.0 - 1e-9;

double clamp_rho(double rho);

/// Per-dimension correlation parameters for eta_l, delta_2 and delta_f.
/// Components are clamped into [1e-9, 1 - 1e-9] on construction.
struct CorrelationParams {
  Eigen::VectorXd rho_eta_l;  // p + m_f + m_l
  Eigen::VectorXd rho_2;      // p + m_f + m_h
  Eigen::VectorXd rho_f;      // p

  CorrelationParams() = default;
  CorrelationParams(Eigen::VectorXd eta_l, Eigen::VectorXd delta_2, Eigen::VectorXd field);
};

/// Marginal precisions on the standardized response scale.
struct PrecisionParams {
  double lambda_eta_l = 1.0;
  double lambda_2 = 20.0;
  double lambda_f = 20.0;
  double lambda_y = 20.0;
};

/// Calibration parameters on the unit-cube scale.
struct CalibrationParams {
  Eigen::VectorXd theta_f;
  Eigen::VectorXd theta_h;
  Eigen::VectorXd theta_l;
};

/// One point in parameter space. `mu` stays at 0 on the standardized scale.
struct ParameterState {
  CalibrationParams theta;
  PrecisionParams precisions;
  CorrelationParams correlations;
  double mu = 0.0;

  /// Starting point used for the toy runs: theta = 0.5, lambda_eta_l = 1,
  /// remaining precisions 20, every rho 0.1.
  static ParameterState initial(const Dimensions& dims);
  /// Throws DimensionError if vector lengths disagree with `dims`.
  void check_dimensions(const Dimensions& dims, ModelForm form) const;
};

enum class ParameterGroup {
  theta_f,
  theta_h,
  theta_l,
  rho_eta_l,
  rho_2,
  rho_f,
  lambda_eta_l,
  lambda_2,
  lambda_f,
  lambda_y,
};

/// Address of one scalar parameter.
struct ParameterId {
  ParameterGroup group = ParameterGroup::theta_f;
  std::size_t index = 0;

  bool is_precision() const;
  bool is_calibration() const;
  bool is_correlation() const;
  std::string name() const;
  bool operator==(const ParameterId&) const = default;
};

/// Scalar parameters in the fixed sweep order theta_f, theta_h, theta_l,
/// rho_eta_l, rho_2, rho_f, lambda_eta_l, lambda_2, lambda_f, lambda_y.
/// The single-level form has no theta_h, rho_2 or lambda_2.
std::vector<ParameterId> parameter_layout(const Dimensions& dims, ModelForm form);

double get_parameter(const ParameterState& state, ParameterId id);
/// Correlations are clamped on assignment.
void set_parameter(ParameterState& state, ParameterId id, double value);

Eigen::VectorXd flatten(const ParameterState& state, const std::vector<ParameterId>& layout);
ParameterState unflatten(const Eigen::VectorXd& values, const std::vector<ParameterId>& layout,
                         const Dimensions& dims);

}  // namespace mfcal
