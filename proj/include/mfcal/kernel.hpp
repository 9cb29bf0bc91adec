#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "mfcal/data.hpp"
#include "mfcal/state.hpp"

namespace mfcal {

inline constexpr double kDefaultJitter = 1e-8;
inline constexpr double kMaxJitter = 1e-4;

/// Product-Gaussian correlation prod_s rho_s^{4 (u_s - v_s)^2}.
double correlation(const Eigen::Ref<const Eigen::VectorXd>& u,
                   const Eigen::Ref<const Eigen::VectorXd>& v,
                   const Eigen::Ref<const Eigen::VectorXd>& rho);

/// Symmetric correlation matrix over the rows of `points`; unit diagonal.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& points, const Eigen::VectorXd& rho);

/// Inputs at which eta_l is evaluated for each joint row: field rows take
/// (x, theta_f, theta_l), high rows (x', t'_f, theta_l), low rows pass through.
Eigen::MatrixXd augmented_inputs_eta_l(const MultiFidelityDataSet& dataset,
                                       const CalibrationParams& theta);
/// delta_2 inputs over field then high rows: (x, theta_f, theta_h) and (x', t'_f, t'_h).
Eigen::MatrixXd augmented_inputs_delta_2(const MultiFidelityDataSet& dataset,
                                         const CalibrationParams& theta);

Eigen::MatrixXd build_sigma_eta_l(const MultiFidelityDataSet& dataset,
                                  const CalibrationParams& theta,
                                  const Eigen::VectorXd& rho_eta_l, double lambda_eta_l);
Eigen::MatrixXd build_sigma_2(const MultiFidelityDataSet& dataset, const CalibrationParams& theta,
                              const Eigen::VectorXd& rho_2, double lambda_2);
Eigen::MatrixXd build_sigma_f(const MultiFidelityDataSet& dataset, const Eigen::VectorXd& rho_f,
                              double lambda_f);

/// Joint covariance with a Cholesky factor of its training block.
///
/// Jitter is added to the training diagonal only; prediction rows (if any)
/// are stored exactly. The index map addresses Sigma_11, Sigma_12, Sigma_21
/// and Sigma_22.
class CovarianceAssembly {
 public:
  /// Factorizes the leading `index.n_train()` block, starting from
  /// `jitter` and escalating by 10x up to kMaxJitter. A zero starting
  /// jitter tries the bare matrix first. Throws SingularityError.
  CovarianceAssembly(Eigen::MatrixXd sigma, BlockIndex index, double jitter = kDefaultJitter);

  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const BlockIndex& index() const { return index_; }
  double jitter() const { return jitter_; }
  const Eigen::LLT<Eigen::MatrixXd>& factor() const { return factor_; }

  /// log det of the jittered training block.
  double log_det() const;

  Eigen::MatrixXd sigma_11() const;
  Eigen::MatrixXd sigma_12() const;
  Eigen::MatrixXd sigma_21() const;
  Eigen::MatrixXd sigma_22() const;

 private:
  Eigen::MatrixXd sigma_;
  BlockIndex index_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

/// Unit-diagonal correlation blocks for one parameter state, built over
/// the training rows plus `x_new` (treated as extra field rows).
struct CorrelationBlocks {
  Eigen::MatrixXd eta_l;    // rows: field, high, low, new
  Eigen::MatrixXd delta_2;  // rows: field, high, new (empty in single-level form)
  Eigen::MatrixXd field;    // rows: field, new
  BlockIndex index;
};

CorrelationBlocks correlation_blocks(const MultiFidelityDataSet& dataset,
                                     const ParameterState& state,
                                     const Eigen::MatrixXd& x_new = Eigen::MatrixXd());

/// Scales blocks by their precisions and sums them into Sigma_Y (or
/// Sigma^new). Field-error variance 1/lambda_y goes on training field rows
/// and, when `noise_on_new` is set, on prediction rows.
Eigen::MatrixXd combine_blocks(const CorrelationBlocks& blocks, const PrecisionParams& precisions,
                               ModelForm form, bool noise_on_new = false);
Eigen::MatrixXd combine_blocks(const Eigen::MatrixXd& eta_l, const Eigen::MatrixXd& delta_2,
                               const Eigen::MatrixXd& field, const BlockIndex& index,
                               const PrecisionParams& precisions, ModelForm form,
                               bool noise_on_new = false);

/// Inputs behind each block, in the row order documented on CorrelationBlocks.
Eigen::MatrixXd eta_l_block_inputs(const MultiFidelityDataSet& dataset,
                                   const CalibrationParams& theta, const Eigen::MatrixXd& x_new);
Eigen::MatrixXd delta_2_block_inputs(const MultiFidelityDataSet& dataset,
                                     const CalibrationParams& theta, const Eigen::MatrixXd& x_new);
Eigen::MatrixXd field_block_inputs(const MultiFidelityDataSet& dataset,
                                   const Eigen::MatrixXd& x_new);

CovarianceAssembly assemble_sigma_Y(const MultiFidelityDataSet& dataset,
                                    const ParameterState& state);

/// Sigma^new for prediction at `x_new` (rows in [0,1]^p).
CovarianceAssembly extend_for_prediction(const MultiFidelityDataSet& dataset,
                                         const ParameterState& state,
                                         const Eigen::MatrixXd& x_new, bool include_noise);

// ---------------------------------------------------------------------------
// K-level hierarchy. levels[0] is the lowest-fidelity code; level k rows
// carry (x, t_f, t_k). Joint rows are ordered field, level K, ..., level 1
// so that every discrepancy delta_j covers a leading block.

struct MultiLevelDataSet {
  std::size_t p = 0;
  std::size_t m_f = 0;
  std::vector<std::size_t> m_levels;    // own calibration width per level
  FieldTable field;
  std::vector<SimulatorTable> levels;   // size K

  std::size_t n_levels() const { return levels.size(); }
  std::size_t n_train() const;
};

struct MultiLevelState {
  Eigen::VectorXd theta_f;
  std::vector<Eigen::VectorXd> theta_levels;  // theta_1 .. theta_K
  std::vector<Eigen::VectorXd> rho_levels;    // rho_eta1, rho_delta2 .. rho_deltaK
  Eigen::VectorXd rho_f;
  std::vector<double> lambda_levels;          // lambda_eta1, lambda_delta2 .. lambda_deltaK
  double lambda_f = 20.0;
  double lambda_y = 20.0;
};

MultiLevelDataSet to_multilevel(const MultiFidelityDataSet& dataset);
MultiLevelState to_multilevel(const ParameterState& state);

CovarianceAssembly assemble_sigma_Y_multilevel(const MultiLevelDataSet& dataset,
                                               const MultiLevelState& state);

}  // namespace mfcal
