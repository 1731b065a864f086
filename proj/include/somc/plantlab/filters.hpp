/*
 * Copyright (C) 2026 The somc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
*/

#ifndef SOMC__PLANTLAB__FILTERS_HPP
#define SOMC__PLANTLAB__FILTERS_HPP

#include <somc/errors.hpp>
#include <somc/plantlab/models.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace somc::plantlab {

struct KalmanConfig
{
  double process_noise_velocity = 1e-4;  ///< per-step variance [(m/s)^2]
  double process_noise_force = 2500.0;   ///< per-step variance [N^2]
  double initial_variance_velocity = 1.0;
  double initial_variance_force = 1e6;
};

struct KalmanState
{
  Eigen::VectorXd x;
  Eigen::MatrixXd P;

  double velocity() const { return x(0); }
};

inline KalmanState kalman_init(
    const ModelSpec& model, double initial_velocity, const KalmanConfig& cfg)
{
  const int n = state_dim(model.kind);
  KalmanState s{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
  s.x(0) = initial_velocity;
  s.P(0, 0) = cfg.initial_variance_velocity;
  if (n == 2)
    s.P(1, 1) = cfg.initial_variance_force;
  return s;
}

namespace detail {

inline Eigen::MatrixXd process_noise(int n, const KalmanConfig& cfg)
{
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  Q(0, 0) = cfg.process_noise_velocity;
  if (n == 2)
    Q(1, 1) = cfg.process_noise_force;
  return Q;
}

/// Symmetrizes @p P and checks it is positive semidefinite, adding a small
/// diagonal jitter once before giving up.
inline Eigen::MatrixXd checked_covariance(Eigen::MatrixXd P)
{
  P = 0.5 * (P + P.transpose());
  if (!P.allFinite())
    throw NumericalError("Kalman covariance is not finite");

  const double scale = std::max(1.0, P.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 2; ++attempt)
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
    if (eig.eigenvalues().minCoeff() >= -1e-12 * scale)
      return P;
    P.diagonal().array() += -eig.eigenvalues().minCoeff() + 1e-12 * scale;
  }
  throw NumericalError("Kalman covariance lost positive definiteness");
}

} // namespace detail

/// Time update through the grouped model, linearized about the estimate.
inline KalmanState kalman_predict(
    const KalmanState& s, const ModelSpec& model, double u_prev, double dt,
    const KalmanConfig& cfg, int substeps = 1)
{
  const PlantState est = from_vector(model.kind, s.x);
  const Linearization lin = linearize(model, est, u_prev, dt, substeps);
  KalmanState out;
  out.x = to_vector(model.kind, propagate(model, est, u_prev, dt, substeps));
  out.P = detail::checked_covariance(
    lin.A * s.P * lin.A.transpose() + detail::process_noise(state_dim(model.kind), cfg));
  return out;
}

/// Measurement update with a velocity measurement of variance @p r.
inline KalmanState kalman_update(
    const KalmanState& prior, double measurement, double r)
{
  if (!(r >= 0.0))
    throw DomainError("measurement variance must be non-negative");

  const auto n = prior.x.size();
  Eigen::RowVectorXd H = Eigen::RowVectorXd::Zero(n);
  H(0) = 1.0;

  const double S = (H * prior.P * H.transpose())(0, 0) + r;
  if (!(S > 1e-300))
    return prior;

  const Eigen::VectorXd K = prior.P * H.transpose() / S;
  const Eigen::MatrixXd I_KH = Eigen::MatrixXd::Identity(n, n) - K * H;

  KalmanState post;
  post.x = prior.x + K * (measurement - prior.x(0));
  // Joseph form keeps the update symmetric positive semidefinite.
  post.P = detail::checked_covariance(
    I_KH * prior.P * I_KH.transpose() + K * r * K.transpose());
  return post;
}

inline KalmanState kalman_step(
    const KalmanState& s, const ModelSpec& model, double u_prev,
    double measurement, double measurement_variance, double dt,
    const KalmanConfig& cfg, int substeps = 1)
{
  return kalman_update(
    kalman_predict(s, model, u_prev, dt, cfg, substeps),
    measurement, measurement_variance);
}

/// Passes the measurement through unfiltered.
inline double dummy_filter(double measurement)
{
  return measurement;
}

} // namespace somc::plantlab

#endif // SOMC__PLANTLAB__FILTERS_HPP
