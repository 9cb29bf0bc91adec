#include "mfcal/kernel.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mfcal/error.hpp"

namespace mfcal {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t n) { return static_cast<Index>(n); }

// Row r of `out` becomes [a | b | c].
template <class A, class B, class C>
void put_row(MatrixXd& out, Index r, const A& a, const B& b, const C& c) {
  const Index na = a.size();
  const Index nb = b.size();
  const Index nc = c.size();
  out.row(r).segment(0, na) = a;
  out.row(r).segment(na, nb) = b;
  out.row(r).segment(na + nb, nc) = c;
}

VectorXd log_weights(const VectorXd& rho) {
  VectorXd w(rho.size());
  for (Index s = 0; s < rho.size(); ++s) w[s] = 4.0 * std::log(rho[s]);
  return w;
}

// Training rows of component blocks followed by `extra` trailing rows.
std::vector<Index> rows_with_new(Index leading, Index train_total, Index n_new) {
  std::vector<Index> rows(static_cast<std::size_t>(leading + n_new));
  std::iota(rows.begin(), rows.begin() + leading, Index{0});
  std::iota(rows.begin() + leading, rows.end(), train_total);
  return rows;
}

void add_block(MatrixXd& sigma, const MatrixXd& corr, const std::vector<Index>& rows,
               double lambda) {
  const Index n = corr.rows();
  for (Index j = 0; j < n; ++j) {
    const Index cj = rows[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) {
      sigma(rows[static_cast<std::size_t>(i)], cj) += corr(i, j) / lambda;
    }
  }
}

void check_theta(const MultiFidelityDataSet& d, const CalibrationParams& theta, bool need_h) {
  if (static_cast<std::size_t>(theta.theta_f.size()) != d.dims.m_f ||
      static_cast<std::size_t>(theta.theta_l.size()) != d.dims.m_l ||
      (need_h && static_cast<std::size_t>(theta.theta_h.size()) != d.dims.m_h)) {
    throw DimensionError("calibration parameter lengths do not match the dataset");
  }
}

void check_rho(const VectorXd& rho, std::size_t width, const char* what) {
  if (static_cast<std::size_t>(rho.size()) != width) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(rho.size()) +
                         ", expected " + std::to_string(width));
  }
}

MatrixXd eta_inputs(const MultiFidelityDataSet& d, const CalibrationParams& theta,
                    const MatrixXd& x_new) {
  check_theta(d, theta, false);
  const Index nf = idx(d.n_field());
  const Index nh = idx(d.n_high());
  const Index nl = idx(d.n_low());
  const Index nn = x_new.rows();
  MatrixXd out(nf + nh + nl + nn, idx(d.dims.eta_width()));
  const auto tf = theta.theta_f.transpose();
  const auto tl = theta.theta_l.transpose();
  for (Index i = 0; i < nf; ++i) put_row(out, i, d.field.x.row(i), tf, tl);
  for (Index i = 0; i < nh; ++i) put_row(out, nf + i, d.high.x.row(i), d.high.t_shared.row(i), tl);
  for (Index i = 0; i < nl; ++i) {
    put_row(out, nf + nh + i, d.low.x.row(i), d.low.t_shared.row(i), d.low.t_own.row(i));
  }
  for (Index i = 0; i < nn; ++i) put_row(out, nf + nh + nl + i, x_new.row(i), tf, tl);
  return out;
}

MatrixXd delta_inputs(const MultiFidelityDataSet& d, const CalibrationParams& theta,
                      const MatrixXd& x_new) {
  check_theta(d, theta, true);
  const Index nf = idx(d.n_field());
  const Index nh = idx(d.n_high());
  const Index nn = x_new.rows();
  MatrixXd out(nf + nh + nn, idx(d.dims.delta_width()));
  const auto tf = theta.theta_f.transpose();
  const auto th = theta.theta_h.transpose();
  for (Index i = 0; i < nf; ++i) put_row(out, i, d.field.x.row(i), tf, th);
  for (Index i = 0; i < nh; ++i) {
    put_row(out, nf + i, d.high.x.row(i), d.high.t_shared.row(i), d.high.t_own.row(i));
  }
  for (Index i = 0; i < nn; ++i) put_row(out, nf + nh + i, x_new.row(i), tf, th);
  return out;
}

MatrixXd field_points(const MultiFidelityDataSet& d, const MatrixXd& x_new) {
  MatrixXd out(d.field.x.rows() + x_new.rows(), idx(d.dims.p));
  if (d.field.x.rows() > 0) out.topRows(d.field.x.rows()) = d.field.x;
  if (x_new.rows() > 0) out.bottomRows(x_new.rows()) = x_new;
  return out;
}

void check_new_points(const MultiFidelityDataSet& d, const MatrixXd& x_new) {
  if (x_new.rows() == 0) return;
  if (static_cast<std::size_t>(x_new.cols()) != d.dims.p) {
    throw DimensionError("prediction points have " + std::to_string(x_new.cols()) +
                         " columns, expected " + std::to_string(d.dims.p));
  }
  for (Index i = 0; i < x_new.rows(); ++i) {
    for (Index j = 0; j < x_new.cols(); ++j) {
      if (!(x_new(i, j) >= 0.0 && x_new(i, j) <= 1.0)) {
        throw OutOfRangeError("prediction point " + std::to_string(i) + " column " +
                              std::to_string(j) + " outside [0, 1]");
      }
    }
  }
}

}  // namespace

double correlation(const Eigen::Ref<const VectorXd>& u, const Eigen::Ref<const VectorXd>& v,
                   const Eigen::Ref<const VectorXd>& rho) {
  if (u.size() != v.size() || u.size() != rho.size()) {
    throw DimensionError("correlation: input lengths " + std::to_string(u.size()) + ", " +
                         std::to_string(v.size()) + " and rho length " +
                         std::to_string(rho.size()) + " differ");
  }
  double exponent = 0.0;
  for (Index s = 0; s < u.size(); ++s) {
    const double d = u[s] - v[s];
    exponent += 4.0 * std::log(rho[s]) * d * d;
  }
  return std::exp(exponent);
}

MatrixXd correlation_matrix(const MatrixXd& points, const VectorXd& rho) {
  if (points.cols() != rho.size()) {
    throw DimensionError("correlation_matrix: points have " + std::to_string(points.cols()) +
                         " columns but rho has length " + std::to_string(rho.size()));
  }
  const Index n = points.rows();
  const Index d = points.cols();
  const VectorXd w = log_weights(rho);
  const MatrixXd pt = points.transpose();  // contiguous per point
  MatrixXd out(n, n);
  for (Index j = 0; j < n; ++j) {
    out(j, j) = 1.0;
    const double* pj = pt.col(j).data();
    for (Index i = j + 1; i < n; ++i) {
      const double* pi = pt.col(i).data();
      double exponent = 0.0;
      for (Index s = 0; s < d; ++s) {
        const double diff = pi[s] - pj[s];
        exponent += w[s] * diff * diff;
      }
      const double r = std::exp(exponent);
      out(i, j) = r;
      out(j, i) = r;
    }
  }
  return out;
}

MatrixXd augmented_inputs_eta_l(const MultiFidelityDataSet& dataset,
                                const CalibrationParams& theta) {
  return eta_inputs(dataset, theta, MatrixXd());
}

MatrixXd augmented_inputs_delta_2(const MultiFidelityDataSet& dataset,
                                  const CalibrationParams& theta) {
  return delta_inputs(dataset, theta, MatrixXd());
}

MatrixXd build_sigma_eta_l(const MultiFidelityDataSet& dataset, const CalibrationParams& theta,
                           const VectorXd& rho_eta_l, double lambda_eta_l) {
  check_rho(rho_eta_l, dataset.dims.eta_width(), "rho_eta_l");
  return correlation_matrix(augmented_inputs_eta_l(dataset, theta), rho_eta_l) / lambda_eta_l;
}

MatrixXd build_sigma_2(const MultiFidelityDataSet& dataset, const CalibrationParams& theta,
                       const VectorXd& rho_2, double lambda_2) {
  check_rho(rho_2, dataset.dims.delta_width(), "rho_2");
  return correlation_matrix(augmented_inputs_delta_2(dataset, theta), rho_2) / lambda_2;
}

MatrixXd build_sigma_f(const MultiFidelityDataSet& dataset, const VectorXd& rho_f,
                       double lambda_f) {
  check_rho(rho_f, dataset.dims.p, "rho_f");
  return correlation_matrix(dataset.field.x, rho_f) / lambda_f;
}

CovarianceAssembly::CovarianceAssembly(MatrixXd sigma, BlockIndex index, double jitter)
    : sigma_(std::move(sigma)), index_(index) {
  const Index n = idx(index_.n_train());
  if (sigma_.rows() != sigma_.cols() || sigma_.rows() != idx(index_.total())) {
    throw DimensionError("covariance matrix order does not match the block index");
  }
  double applied = 0.0;
  double next = jitter;
  while (true) {
    if (next > applied) {
      sigma_.topLeftCorner(n, n).diagonal().array() += next - applied;
      applied = next;
    }
    factor_.compute(sigma_.topLeftCorner(n, n));
    if (factor_.info() == Eigen::Success) break;
    next = applied > 0.0 ? applied * 10.0 : kDefaultJitter;
    if (next > kMaxJitter * (1.0 + 1e-12)) {
      throw SingularityError("covariance not positive definite even with jitter " +
                             std::to_string(applied));
    }
  }
  jitter_ = applied;
}

double CovarianceAssembly::log_det() const {
  return 2.0 * factor_.matrixLLT().diagonal().array().log().sum();
}

MatrixXd CovarianceAssembly::sigma_11() const {
  const Index n = idx(index_.n_train());
  return sigma_.topLeftCorner(n, n);
}

MatrixXd CovarianceAssembly::sigma_12() const {
  return sigma_.topRightCorner(idx(index_.n_train()), idx(index_.n_new));
}

MatrixXd CovarianceAssembly::sigma_21() const {
  return sigma_.bottomLeftCorner(idx(index_.n_new), idx(index_.n_train()));
}

MatrixXd CovarianceAssembly::sigma_22() const {
  const Index m = idx(index_.n_new);
  return sigma_.bottomRightCorner(m, m);
}

CorrelationBlocks correlation_blocks(const MultiFidelityDataSet& dataset,
                                     const ParameterState& state, const MatrixXd& x_new) {
  state.check_dimensions(dataset.dims, dataset.form);
  check_new_points(dataset, x_new);
  CorrelationBlocks blocks;
  blocks.index = dataset.index();
  blocks.index.n_new = static_cast<std::size_t>(x_new.rows());
  blocks.eta_l = correlation_matrix(eta_inputs(dataset, state.theta, x_new),
                                    state.correlations.rho_eta_l);
  if (dataset.form == ModelForm::two_level) {
    blocks.delta_2 = correlation_matrix(delta_inputs(dataset, state.theta, x_new),
                                        state.correlations.rho_2);
  }
  blocks.field = correlation_matrix(field_points(dataset, x_new), state.correlations.rho_f);
  return blocks;
}

MatrixXd combine_blocks(const CorrelationBlocks& blocks, const PrecisionParams& precisions,
                        ModelForm form, bool noise_on_new) {
  return combine_blocks(blocks.eta_l, blocks.delta_2, blocks.field, blocks.index, precisions, form,
                        noise_on_new);
}

MatrixXd combine_blocks(const MatrixXd& eta_l, const MatrixXd& delta_2, const MatrixXd& field,
                        const BlockIndex& ix, const PrecisionParams& precisions, ModelForm form,
                        bool noise_on_new) {
  const Index train = idx(ix.n_train());
  const Index nn = idx(ix.n_new);
  MatrixXd sigma = eta_l / precisions.lambda_eta_l;
  if (form == ModelForm::two_level) {
    add_block(sigma, delta_2, rows_with_new(idx(ix.n_field + ix.n_high), train, nn),
              precisions.lambda_2);
  }
  add_block(sigma, field, rows_with_new(idx(ix.n_field), train, nn), precisions.lambda_f);
  const double noise = 1.0 / precisions.lambda_y;
  for (Index i = 0; i < idx(ix.n_field); ++i) sigma(i, i) += noise;
  if (noise_on_new) {
    for (Index i = train; i < train + nn; ++i) sigma(i, i) += noise;
  }
  return sigma;
}

CovarianceAssembly assemble_sigma_Y(const MultiFidelityDataSet& dataset,
                                    const ParameterState& state) {
  const CorrelationBlocks blocks = correlation_blocks(dataset, state);
  return {combine_blocks(blocks, state.precisions, dataset.form), blocks.index};
}

CovarianceAssembly extend_for_prediction(const MultiFidelityDataSet& dataset,
                                         const ParameterState& state, const MatrixXd& x_new,
                                         bool include_noise) {
  const CorrelationBlocks blocks = correlation_blocks(dataset, state, x_new);
  return {combine_blocks(blocks, state.precisions, dataset.form, include_noise), blocks.index};
}

MatrixXd eta_l_block_inputs(const MultiFidelityDataSet& dataset, const CalibrationParams& theta,
                            const MatrixXd& x_new) {
  return eta_inputs(dataset, theta, x_new);
}

MatrixXd delta_2_block_inputs(const MultiFidelityDataSet& dataset, const CalibrationParams& theta,
                              const MatrixXd& x_new) {
  return delta_inputs(dataset, theta, x_new);
}

MatrixXd field_block_inputs(const MultiFidelityDataSet& dataset, const MatrixXd& x_new) {
  return field_points(dataset, x_new);
}

// ---------------------------------------------------------------------------

std::size_t MultiLevelDataSet::n_train() const {
  std::size_t n = field.size();
  for (const auto& l : levels) n += l.size();
  return n;
}

MultiLevelDataSet to_multilevel(const MultiFidelityDataSet& dataset) {
  if (dataset.form != ModelForm::two_level) {
    throw InvalidArgumentError("to_multilevel expects a two-level dataset");
  }
  MultiLevelDataSet out;
  out.p = dataset.dims.p;
  out.m_f = dataset.dims.m_f;
  out.m_levels = {dataset.dims.m_l, dataset.dims.m_h};
  out.field = dataset.field;
  out.levels = {dataset.low, dataset.high};
  return out;
}

MultiLevelState to_multilevel(const ParameterState& state) {
  MultiLevelState out;
  out.theta_f = state.theta.theta_f;
  out.theta_levels = {state.theta.theta_l, state.theta.theta_h};
  out.rho_levels = {state.correlations.rho_eta_l, state.correlations.rho_2};
  out.rho_f = state.correlations.rho_f;
  out.lambda_levels = {state.precisions.lambda_eta_l, state.precisions.lambda_2};
  out.lambda_f = state.precisions.lambda_f;
  out.lambda_y = state.precisions.lambda_y;
  return out;
}

CovarianceAssembly assemble_sigma_Y_multilevel(const MultiLevelDataSet& dataset,
                                               const MultiLevelState& state) {
  const std::size_t k_levels = dataset.n_levels();
  if (k_levels < 2) throw InvalidArgumentError("multilevel assembly needs K >= 2 levels");
  if (dataset.m_levels.size() != k_levels || state.theta_levels.size() != k_levels ||
      state.rho_levels.size() != k_levels || state.lambda_levels.size() != k_levels) {
    throw DimensionError("multilevel state and dataset disagree on the number of levels");
  }
  const Index nf = idx(dataset.field.size());
  const Index p = idx(dataset.p);
  const Index mf = idx(dataset.m_f);

  // Row offset of each level in the joint order field, K, K-1, ..., 1.
  std::vector<Index> offset(k_levels);
  {
    Index at = nf;
    for (std::size_t k = k_levels; k-- > 0;) {
      offset[k] = at;
      at += idx(dataset.levels[k].size());
    }
  }
  const Index total = idx(dataset.n_train());

  MatrixXd sigma;
  for (std::size_t c = 0; c < k_levels; ++c) {
    const Index mc = idx(dataset.m_levels[c]);
    check_rho(state.rho_levels[c], dataset.p + dataset.m_f + dataset.m_levels[c],
              "multilevel rho");
    if (state.theta_levels[c].size() != mc || state.theta_f.size() != mf) {
      throw DimensionError("multilevel theta lengths do not match the dataset");
    }
    // Component c covers field rows and levels c..K-1 (0-based).
    const Index rows = offset[c] + idx(dataset.levels[c].size());
    MatrixXd inputs(rows, p + mf + mc);
    const auto tf = state.theta_f.transpose();
    const auto tc = state.theta_levels[c].transpose();
    for (Index i = 0; i < nf; ++i) put_row(inputs, i, dataset.field.x.row(i), tf, tc);
    for (std::size_t k = c; k < k_levels; ++k) {
      const SimulatorTable& t = dataset.levels[k];
      for (Index i = 0; i < idx(t.size()); ++i) {
        if (k == c) {
          put_row(inputs, offset[k] + i, t.x.row(i), t.t_shared.row(i), t.t_own.row(i));
        } else {
          put_row(inputs, offset[k] + i, t.x.row(i), t.t_shared.row(i), tc);
        }
      }
    }
    const MatrixXd corr = correlation_matrix(inputs, state.rho_levels[c]);
    if (c == 0) {
      sigma = corr / state.lambda_levels[0];
    } else {
      add_block(sigma, corr, rows_with_new(rows, total, 0), state.lambda_levels[c]);
    }
  }
  check_rho(state.rho_f, dataset.p, "rho_f");
  add_block(sigma, correlation_matrix(dataset.field.x, state.rho_f), rows_with_new(nf, total, 0),
            state.lambda_f);
  const double noise = 1.0 / state.lambda_y;
  for (Index i = 0; i < nf; ++i) sigma(i, i) += noise;

  BlockIndex index;
  index.n_field = dataset.field.size();
  index.n_low = dataset.levels[0].size();
  index.n_high = dataset.n_train() - index.n_field - index.n_low;
  return {std::move(sigma), index};
}

}  // namespace mfcal
