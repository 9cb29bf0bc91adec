#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mfcal {

/// Closed interval used to map a raw input column onto [0, 1].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Declared input dimensions: design variables, shared calibration inputs,
/// and the calibration inputs owned by the high and low fidelity codes.
struct Dimensions {
  std::size_t p = 0;
  std::size_t m_f = 0;
  std::size_t m_h = 0;
  std::size_t m_l = 0;

  std::size_t eta_width() const { return p + m_f + m_l; }
  std::size_t delta_width() const { return p + m_f + m_h; }
  bool operator==(const Dimensions&) const = default;
};

/// Whether the model carries the simulator-to-simulator discrepancy layer.
/// `single_level` is the one-simulator calibration setup: field data plus a
/// single simulator stored in the low table, no delta_2 term.
enum class ModelForm { two_level, single_level };

/// One augmented input setting. `t_extra` is t_h or t_l depending on the
/// table, and empty for field rows.
struct InputPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd t_f;
  Eigen::VectorXd t_extra;
};

struct FieldTable {
  Eigen::MatrixXd x;  // n_f x p
  Eigen::VectorXd y;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
};

struct SimulatorTable {
  Eigen::MatrixXd x;         // n x p
  Eigen::MatrixXd t_shared;  // n x m_f
  Eigen::MatrixXd t_own;     // n x m_h (high) or n x m_l (low)
  Eigen::VectorXd y;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
  InputPoint row(std::size_t i) const;
};

/// Affine response map z = (y - center) / scale.
class StandardizationTransform {
 public:
  StandardizationTransform() = default;
  StandardizationTransform(double center, double scale);

  double center() const { return center_; }
  double scale() const { return scale_; }

  double apply(double y) const { return (y - center_) / scale_; }
  double invert(double z) const { return center_ + scale_ * z; }
  double invert_variance(double v) const { return scale_ * scale_ * v; }
  bool is_identity() const { return center_ == 0.0 && scale_ == 1.0; }

 private:
  double center_ = 0.0;
  double scale_ = 1.0;
};

/// Row offsets of each block inside the joint vector Y = (Y_f, Y_h, Y_l),
/// optionally followed by prediction targets.
struct BlockIndex {
  std::size_t n_field = 0;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  std::size_t n_new = 0;

  std::size_t field_begin() const { return 0; }
  std::size_t high_begin() const { return n_field; }
  std::size_t low_begin() const { return n_field + n_high; }
  std::size_t new_begin() const { return n_train(); }
  std::size_t n_train() const { return n_field + n_high + n_low; }
  std::size_t total() const { return n_train() + n_new; }
};

/// Field observations and simulator runs on the unit-cube input scale.
///
/// Responses are either raw (identity transform) or standardized, in which
/// case `transform` maps them back. Y is always ordered field, high, low.
struct MultiFidelityDataSet {
  Dimensions dims;
  ModelForm form = ModelForm::two_level;
  FieldTable field;
  SimulatorTable high;
  SimulatorTable low;
  StandardizationTransform transform;

  std::size_t n_field() const { return field.size(); }
  std::size_t n_high() const { return high.size(); }
  std::size_t n_low() const { return low.size(); }
  BlockIndex index() const { return {n_field(), n_high(), n_low(), 0}; }

  /// Throws DimensionError / OutOfRangeError / InvalidArgumentError.
  void validate() const;

  /// Copy with the transform undone and set to identity.
  MultiFidelityDataSet destandardized() const;
  /// Copy without field row `i`.
  MultiFidelityDataSet without_field_row(std::size_t i) const;
};

Eigen::MatrixXd scale_inputs(const Eigen::MatrixXd& raw, const std::vector<Interval>& bounds);
Eigen::MatrixXd unscale_inputs(const Eigen::MatrixXd& scaled, const std::vector<Interval>& bounds);

/// Pools field, high and low responses into one center/scale (sample sd,
/// denominator n-1). The input must carry raw responses.
MultiFidelityDataSet standardize_responses(const MultiFidelityDataSet& dataset);

Eigen::VectorXd joint_response_vector(const MultiFidelityDataSet& dataset);

}  // namespace mfcal
