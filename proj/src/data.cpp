#include "mfcal/data.hpp"

#include <cmath>
#include <string>

#include "mfcal/error.hpp"

namespace mfcal {

namespace {

void check_unit(const Eigen::MatrixXd& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw OutOfRangeError(std::string(what) + " row " + std::to_string(i) + " column " +
                              std::to_string(j) + " = " + std::to_string(v) +
                              " lies outside [0, 1]");
      }
    }
  }
}

void check_shape(const Eigen::MatrixXd& m, std::size_t rows, std::size_t cols, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw DimensionError(std::string(what) + " has shape " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

void check_table(const SimulatorTable& t, const Dimensions& d, std::size_t own, const char* what) {
  const std::size_t n = t.size();
  check_shape(t.x, n, d.p, what);
  check_shape(t.t_shared, n, d.m_f, what);
  check_shape(t.t_own, n, own, what);
  check_unit(t.x, what);
  check_unit(t.t_shared, what);
  check_unit(t.t_own, what);
}

}  // namespace

InputPoint SimulatorTable::row(std::size_t i) const {
  const auto r = static_cast<Eigen::Index>(i);
  return {x.row(r).transpose(), t_shared.row(r).transpose(), t_own.row(r).transpose()};
}

StandardizationTransform::StandardizationTransform(double center, double scale)
    : center_(center), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(center)) {
    throw InvalidArgumentError("standardization scale must be positive and finite");
  }
}

void MultiFidelityDataSet::validate() const {
  if (n_field() < 1) throw InvalidArgumentError("dataset needs at least one field observation");
  if (n_low() < 1) throw InvalidArgumentError("dataset needs at least one low-fidelity run");
  if (form == ModelForm::single_level && (n_high() != 0 || dims.m_h != 0)) {
    throw InvalidArgumentError("single-level model cannot carry high-fidelity runs or t_h inputs");
  }
  check_shape(field.x, n_field(), dims.p, "field inputs");
  check_unit(field.x, "field inputs");
  check_table(high, dims, dims.m_h, "high-fidelity inputs");
  check_table(low, dims, dims.m_l, "low-fidelity inputs");
  for (const auto* y : {&field.y, &high.y, &low.y}) {
    if (!y->allFinite()) throw InvalidArgumentError("responses must be finite");
  }
}

MultiFidelityDataSet MultiFidelityDataSet::destandardized() const {
  MultiFidelityDataSet out = *this;
  auto undo = [this](Eigen::VectorXd& y) {
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = transform.invert(y[i]);
  };
  undo(out.field.y);
  undo(out.high.y);
  undo(out.low.y);
  out.transform = StandardizationTransform{};
  return out;
}

MultiFidelityDataSet MultiFidelityDataSet::without_field_row(std::size_t i) const {
  if (i >= n_field()) throw InvalidArgumentError("field row index out of range");
  MultiFidelityDataSet out = *this;
  const auto n = static_cast<Eigen::Index>(n_field());
  const auto r = static_cast<Eigen::Index>(i);
  out.field.x.resize(n - 1, field.x.cols());
  out.field.y.resize(n - 1);
  for (Eigen::Index k = 0, o = 0; k < n; ++k) {
    if (k == r) continue;
    out.field.x.row(o) = field.x.row(k);
    out.field.y[o] = field.y[k];
    ++o;
  }
  return out;
}

Eigen::MatrixXd scale_inputs(const Eigen::MatrixXd& raw, const std::vector<Interval>& bounds) {
  if (static_cast<std::size_t>(raw.cols()) != bounds.size()) {
    throw DimensionError("scale_inputs: " + std::to_string(raw.cols()) + " columns but " +
                         std::to_string(bounds.size()) + " bounds");
  }
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const Interval b = bounds[static_cast<std::size_t>(j)];
    if (!(b.lo < b.hi)) {
      throw InvalidBoundsError("column " + std::to_string(j) + ": bounds require min < max");
    }
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      const double v = raw(i, j);
      if (!(v >= b.lo && v <= b.hi)) {
        throw OutOfRangeError("row " + std::to_string(i) + " column " + std::to_string(j) +
                              ": value " + std::to_string(v) + " outside [" +
                              std::to_string(b.lo) + ", " + std::to_string(b.hi) + "]");
      }
      out(i, j) = (v - b.lo) / (b.hi - b.lo);
    }
  }
  return out;
}

Eigen::MatrixXd unscale_inputs(const Eigen::MatrixXd& scaled, const std::vector<Interval>& bounds) {
  if (static_cast<std::size_t>(scaled.cols()) != bounds.size()) {
    throw DimensionError("unscale_inputs: column count does not match bounds");
  }
  Eigen::MatrixXd out(scaled.rows(), scaled.cols());
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const Interval b = bounds[static_cast<std::size_t>(j)];
    out.col(j) = (scaled.col(j).array() * (b.hi - b.lo) + b.lo).matrix();
  }
  return out;
}

Eigen::VectorXd joint_response_vector(const MultiFidelityDataSet& dataset) {
  const BlockIndex idx = dataset.index();
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.n_train()));
  y << dataset.field.y, dataset.high.y, dataset.low.y;
  return y;
}

MultiFidelityDataSet standardize_responses(const MultiFidelityDataSet& dataset) {
  if (!dataset.transform.is_identity()) {
    throw InvalidArgumentError("standardize_responses expects raw responses");
  }
  const Eigen::VectorXd y = joint_response_vector(dataset);
  const auto n = static_cast<double>(y.size());
  if (y.size() < 2) throw DegenerateDataError("need at least two responses to standardize");
  if ((y.array() == y[0]).all()) throw DegenerateDataError("responses have zero variance");
  const double mean = y.mean();
  const double ss = (y.array() - mean).square().sum();
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw DegenerateDataError("responses have zero variance");

  MultiFidelityDataSet out = dataset;
  out.transform = StandardizationTransform(mean, sd);
  auto apply = [&](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = out.transform.apply(v[i]);
  };
  apply(out.field.y);
  apply(out.high.y);
  apply(out.low.y);
  return out;
}

}  // namespace mfcal
