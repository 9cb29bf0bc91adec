#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "mfcal/data.hpp"
#include "mfcal/rng.hpp"
#include "mfcal/state.hpp"

namespace testing {

inline Eigen::MatrixXd uniform_matrix(Eigen::Index r, Eigen::Index c, mfcal::Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = mfcal::uniform01(rng);
  return m;
}

inline Eigen::VectorXd normal_vector(Eigen::Index n, mfcal::Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = mfcal::standard_normal(rng);
  return v;
}

/// A A' + n I for Gaussian A; comfortably conditioned.
inline Eigen::MatrixXd random_spd(Eigen::Index n, mfcal::Rng& rng) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = mfcal::standard_normal(rng);
  return a * a.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

inline mfcal::SimulatorTable random_table(std::size_t n, std::size_t p, std::size_t m_f,
                                          std::size_t m_own, mfcal::Rng& rng) {
  mfcal::SimulatorTable t;
  const auto r = static_cast<Eigen::Index>(n);
  t.x = uniform_matrix(r, static_cast<Eigen::Index>(p), rng);
  t.t_shared = uniform_matrix(r, static_cast<Eigen::Index>(m_f), rng);
  t.t_own = uniform_matrix(r, static_cast<Eigen::Index>(m_own), rng);
  t.y = normal_vector(r, rng);
  return t;
}

/// Random two-level dataset on the unit cube with standard-normal responses.
inline mfcal::MultiFidelityDataSet random_dataset(std::size_t n_f, std::size_t n_h, std::size_t n_l,
                                                  mfcal::Dimensions dims, std::uint64_t seed) {
  mfcal::Rng rng(seed);
  mfcal::MultiFidelityDataSet ds;
  ds.dims = dims;
  ds.field.x = uniform_matrix(static_cast<Eigen::Index>(n_f), static_cast<Eigen::Index>(dims.p), rng);
  ds.field.y = normal_vector(static_cast<Eigen::Index>(n_f), rng);
  ds.high = random_table(n_h, dims.p, dims.m_f, dims.m_h, rng);
  ds.low = random_table(n_l, dims.p, dims.m_f, dims.m_l, rng);
  return ds;
}

/// State with every component drawn uniformly from moderate ranges.
inline mfcal::ParameterState random_state(const mfcal::Dimensions& dims, mfcal::Rng& rng) {
  auto vec = [&](std::size_t n, double lo, double hi) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = lo + (hi - lo) * mfcal::uniform01(rng);
    return v;
  };
  mfcal::ParameterState s;
  s.theta.theta_f = vec(dims.m_f, 0, 1);
  s.theta.theta_h = vec(dims.m_h, 0, 1);
  s.theta.theta_l = vec(dims.m_l, 0, 1);
  s.correlations = mfcal::CorrelationParams(vec(dims.eta_width(), 0.2, 0.95), vec(dims.delta_width(), 0.2, 0.95),
                                            vec(dims.p, 0.2, 0.95));
  s.precisions.lambda_eta_l = 0.5 + 2 * mfcal::uniform01(rng);
  s.precisions.lambda_2 = 1 + 20 * mfcal::uniform01(rng);
  s.precisions.lambda_f = 1 + 20 * mfcal::uniform01(rng);
  s.precisions.lambda_y = 1 + 20 * mfcal::uniform01(rng);
  return s;
}

}  // namespace testing
