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

#ifndef SOMC__PLANTLAB__CONTROLLERS_HPP
#define SOMC__PLANTLAB__CONTROLLERS_HPP

#include <somc/errors.hpp>
#include <somc/plantlab/models.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace somc::plantlab {

//==============================================================================
struct PidGains
{
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double u_min = -3.0;
  double u_max = 3.0;
};

struct PidState
{
  double integral = 0.0;
  double previous_error = 0.0;
  bool primed = false;
};

struct PidOutput
{
  double command = 0.0;
  PidState state;
};

/// u = kp*e + ki*int(e) + kd*de/dt, saturated to [u_min, u_max]. The integral
/// is frozen while the output saturates in the direction of the error.
inline PidOutput pid_step(
    const PidGains& gains, double setpoint, double estimate, double dt,
    PidState state)
{
  if (!(dt > 0.0))
    throw DomainError("PID step needs dt > 0");

  const double e = setpoint - estimate;
  const double de = state.primed ? (e - state.previous_error) / dt : 0.0;

  const double integral = state.integral + e * dt;
  const double u = gains.kp * e + gains.ki * integral + gains.kd * de;

  const bool winding_up =
    (u > gains.u_max && e > 0.0) || (u < gains.u_min && e < 0.0);

  PidOutput out;
  out.state.integral = winding_up ? state.integral : integral;
  out.state.previous_error = e;
  out.state.primed = true;
  out.command = std::clamp(
    gains.kp * e + gains.ki * out.state.integral + gains.kd * de,
    gains.u_min, gains.u_max);
  return out;
}

//==============================================================================
struct MpcConfig
{
  int horizon = 10;
  double q = 1.0;
  double r = 0.1;
  double u_ref = 0.0;
  double u_min = -3.0;
  double u_max = 3.0;
  double v_min = 0.0;
  double v_max = 15.0;

  /// Weight of the quadratic penalty on predicted velocities outside
  /// [v_min, v_max].
  double state_penalty = 100.0;

  /// Projected-gradient iteration cap per linearization.
  int max_iterations = 200;
  double tolerance = 1e-6;

  /// Successive linearizations of the model along the predicted trajectory.
  int linearizations = 3;
};

struct MpcResult
{
  double command = 0.0;
  std::vector<double> inputs;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;

  /// Set when a projected-gradient solve stopped at the iteration cap.
  bool iteration_cap_hit = false;
};

namespace detail {

inline double reference_at(std::span<const double> reference, int k)
{
  if (reference.size() == 1)
    return reference[0];
  return reference[static_cast<std::size_t>(k)];
}

inline void check_mpc(const MpcConfig& cfg, std::span<const double> reference)
{
  if (cfg.horizon < 1)
    throw DomainError("MPC horizon must be >= 1");
  if (cfg.q < 0.0 || cfg.r < 0.0 || cfg.state_penalty < 0.0)
    throw DomainError("MPC weights must be non-negative");
  if (!(cfg.u_max >= cfg.u_min) || !(cfg.v_max >= cfg.v_min))
    throw DomainError("inconsistent MPC bounds");
  if (reference.empty() ||
      (reference.size() != 1 && reference.size() < static_cast<std::size_t>(cfg.horizon)))
    throw DomainError("MPC reference must have 1 or >= horizon entries");
}

inline double bound_violation(const MpcConfig& cfg, double v)
{
  if (v > cfg.v_max)
    return v - cfg.v_max;
  if (v < cfg.v_min)
    return v - cfg.v_min;
  return 0.0;
}

} // namespace detail

/// Horizon cost of an input sequence under the nonlinear model:
/// sum_k q (v_{k+1} - r_k)^2 + r (u_k - u_ref)^2 plus the soft bound penalty.
inline double mpc_cost(
    const ModelSpec& model, const MpcConfig& cfg, const PlantState& state,
    std::span<const double> reference, std::span<const double> inputs,
    double dt, int substeps = 1)
{
  PlantState x = state;
  double j = 0.0;
  for (int k = 0; k < cfg.horizon; ++k)
  {
    const double u = inputs[static_cast<std::size_t>(k)];
    x = propagate(model, x, u, dt, substeps);
    const double e = x.velocity - detail::reference_at(reference, k);
    const double viol = detail::bound_violation(cfg, x.velocity);
    j += cfg.q * e * e + cfg.r * (u - cfg.u_ref) * (u - cfg.u_ref) +
      cfg.state_penalty * viol * viol;
  }
  return j;
}

/// Receding-horizon velocity controller.
///
/// The condensed problem in the input sequence is solved by accelerated
/// projected gradient onto the input box. Nonlinear models are handled by
/// re-linearizing along the predicted trajectory (LTV) a few times and
/// keeping the best iterate under the nonlinear cost.
inline MpcResult mpc_step(
    const ModelSpec& model, const MpcConfig& cfg, const PlantState& state,
    std::span<const double> reference, double dt, int substeps = 1,
    std::span<const double> warm_start = {})
{
  detail::check_mpc(cfg, reference);
  if (!(dt > 0.0))
    throw DomainError("MPC step needs dt > 0");

  const int N = cfg.horizon;
  const auto project = [&](Eigen::VectorXd& u)
    {
      for (int i = 0; i < N; ++i)
        u(i) = std::clamp(u(i), cfg.u_min, cfg.u_max);
    };

  Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < N && i < static_cast<int>(warm_start.size()); ++i)
    u(i) = warm_start[static_cast<std::size_t>(i)];
  project(u);

  Eigen::VectorXd r(N);
  for (int k = 0; k < N; ++k)
    r(k) = detail::reference_at(reference, k);

  const auto nonlinear_cost = [&](const Eigen::VectorXd& w)
    {
      return mpc_cost(model, cfg, state, reference,
        std::span<const double>(w.data(), static_cast<std::size_t>(N)), dt, substeps);
    };

  MpcResult result;
  Eigen::VectorXd best_u = u;
  double best_cost = nonlinear_cost(u);

  for (int pass = 0; pass < std::max(cfg.linearizations, 1); ++pass)
  {
    // Nominal trajectory and its input-to-velocity sensitivities.
    std::vector<PlantState> xs(static_cast<std::size_t>(N + 1));
    std::vector<Linearization> lins(static_cast<std::size_t>(N));
    xs[0] = state;
    for (int k = 0; k < N; ++k)
    {
      lins[static_cast<std::size_t>(k)] =
        linearize(model, xs[static_cast<std::size_t>(k)], u(k), dt, substeps);
      xs[static_cast<std::size_t>(k + 1)] =
        propagate(model, xs[static_cast<std::size_t>(k)], u(k), dt, substeps);
    }

    Eigen::VectorXd v_nom(N);
    for (int k = 0; k < N; ++k)
      v_nom(k) = xs[static_cast<std::size_t>(k + 1)].velocity;

    // G(k, j) = d v_{k+1} / d u_j.
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, N);
    for (int j = 0; j < N; ++j)
    {
      Eigen::VectorXd s = lins[static_cast<std::size_t>(j)].B;
      G(j, j) = s(0);
      for (int k = j + 1; k < N; ++k)
      {
        s = lins[static_cast<std::size_t>(k)].A * s;
        G(k, j) = s(0);
      }
    }
    const Eigen::VectorXd u_lin = u;
    const auto lin_cost = [&](const Eigen::VectorXd& w)
      {
        const Eigen::VectorXd v = v_nom + G * (w - u_lin);
        double j = 0.0;
        for (int k = 0; k < N; ++k)
        {
          const double viol = detail::bound_violation(cfg, v(k));
          j += cfg.q * (v(k) - r(k)) * (v(k) - r(k)) +
            cfg.r * (w(k) - cfg.u_ref) * (w(k) - cfg.u_ref) +
            cfg.state_penalty * viol * viol;
        }
        return j;
      };
    const auto lin_grad = [&](const Eigen::VectorXd& w)
      {
        const Eigen::VectorXd v = v_nom + G * (w - u_lin);
        Eigen::VectorXd dv(N);
        for (int k = 0; k < N; ++k)
          dv(k) = 2.0 * cfg.q * (v(k) - r(k)) +
            2.0 * cfg.state_penalty * detail::bound_violation(cfg, v(k));
        Eigen::VectorXd g = G.transpose() * dv;
        g.array() += 2.0 * cfg.r * (w.array() - cfg.u_ref);
        return g;
      };

    // FISTA with backtracking and function-value restart.
    double L = std::max(2.0 * (cfg.q * G.squaredNorm() + cfg.r), 1e-12);
    Eigen::VectorXd x = u;
    Eigen::VectorXd y = u;
    double t = 1.0;
    double fx = lin_cost(x);
    bool converged = false;
    int it = 0;
    for (; it < cfg.max_iterations; ++it)
    {
      const Eigen::VectorXd gy = lin_grad(y);
      const double fy = lin_cost(y);
      Eigen::VectorXd x_next;
      for (int bt = 0; bt < 60; ++bt)
      {
        x_next = y - gy / L;
        project(x_next);
        const Eigen::VectorXd d = x_next - y;
        if (lin_cost(x_next) <= fy + gy.dot(d) + 0.5 * L * d.squaredNorm() + 1e-15)
          break;
        L *= 2.0;
      }

      const double f_next = lin_cost(x_next);
      const double step = (x_next - x).cwiseAbs().maxCoeff();
      if (f_next > fx)
      {
        // Restart momentum; keep the better point.
        t = 1.0;
        y = x;
        continue;
      }

      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_next + ((t - 1.0) / t_next) * (x_next - x);
      project(y);
      x = x_next;
      fx = f_next;
      t = t_next;

      if (step < cfg.tolerance)
      {
        converged = true;
        ++it;
        break;
      }
    }

    result.iterations += it;
    if (!converged)
      result.iteration_cap_hit = true;

    const double change = (x - u).cwiseAbs().maxCoeff();
    u = x;
    const double c = nonlinear_cost(u);
    if (c < best_cost)
    {
      best_cost = c;
      best_u = u;
    }
    result.converged = converged;
    if (change < cfg.tolerance)
      break;
  }

  result.inputs.assign(best_u.data(), best_u.data() + N);
  result.command = best_u(0);
  result.cost = best_cost;
  return result;
}

} // namespace somc::plantlab

#endif // SOMC__PLANTLAB__CONTROLLERS_HPP
