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

#ifndef SOMC__PLANTLAB__MODELS_HPP
#define SOMC__PLANTLAB__MODELS_HPP

#include <somc/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>

namespace somc::plantlab {

//==============================================================================
enum class ModelKind
{
  PointMass,
  SingleTrack,
  MultiBody
};

inline constexpr std::string_view to_string(ModelKind k)
{
  switch (k)
  {
    case ModelKind::PointMass: return "point_mass";
    case ModelKind::SingleTrack: return "single_track";
    case ModelKind::MultiBody: return "multi_body";
  }
  return "unknown";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view name)
{
  for (const auto k :
       {ModelKind::PointMass, ModelKind::SingleTrack, ModelKind::MultiBody})
  {
    if (to_string(k) == name)
      return k;
  }
  return std::nullopt;
}

/// Longitudinal vehicle parameters. Defaults describe a mid-size car.
struct VehicleParameters
{
  double mass = 1500.0;                 ///< [kg]
  double drag_coefficient = 0.4;        ///< 0.5 * rho * c_d * A [N s^2/m^2]
  double rolling_coefficient = 0.012;   ///< c_r [-]
  double actuator_time_constant = 0.2;  ///< [s]
  double traction_force_cap = 4000.0;   ///< [N]
  double v_max = 15.0;                  ///< [m/s]
  double a_max = 3.0;                   ///< [m/s^2]
  double gravity = 9.81;                ///< [m/s^2]
};

struct ModelSpec
{
  ModelKind kind = ModelKind::MultiBody;
  VehicleParameters params;
};

/// Velocity plus the applied traction force, which only the multi-body
/// model treats as a dynamic state.
struct PlantState
{
  double velocity = 0.0; ///< [m/s]
  double force = 0.0;    ///< [N]

  bool operator==(const PlantState&) const = default;
};

inline int state_dim(ModelKind k)
{
  return k == ModelKind::MultiBody ? 2 : 1;
}

//==============================================================================
inline double drag_force(const VehicleParameters& p, double v)
{
  return p.drag_coefficient * v * v;
}

inline double rolling_force(const VehicleParameters& p, double v)
{
  return v > 0.0 ? p.rolling_coefficient * p.mass * p.gravity : 0.0;
}

/// One explicit step of the model under an acceleration demand @p command
/// [m/s^2]. Velocity stays in [0, v_max] and acceleration in [-a_max, a_max].
inline PlantState step_model(
    const ModelSpec& spec, const PlantState& state, double command, double dt)
{
  if (!(dt > 0.0))
    throw DomainError("model step needs dt > 0");
  if (!std::isfinite(command))
    throw NumericalError("model command is not finite");
  if (!std::isfinite(state.velocity) || !std::isfinite(state.force))
    throw NumericalError("model state is not finite");

  const VehicleParameters& p = spec.params;
  const auto clamp_accel = [&](double a) { return std::clamp(a, -p.a_max, p.a_max); };
  const auto clamp_vel = [&](double v) { return std::clamp(v, 0.0, p.v_max); };

  PlantState next = state;
  switch (spec.kind)
  {
    case ModelKind::PointMass:
    {
      next.velocity = clamp_vel(state.velocity + clamp_accel(command) * dt);
      next.force = p.mass * command;
      break;
    }
    case ModelKind::SingleTrack:
    {
      const double f = p.mass * command;
      const double a = (f - drag_force(p, state.velocity) -
        rolling_force(p, state.velocity)) / p.mass;
      next.velocity = clamp_vel(state.velocity + clamp_accel(a) * dt);
      next.force = f;
      break;
    }
    case ModelKind::MultiBody:
    {
      const double f = std::clamp(state.force, -p.traction_force_cap, p.traction_force_cap);
      const double a = (f - drag_force(p, state.velocity) -
        rolling_force(p, state.velocity)) / p.mass;
      next.velocity = clamp_vel(state.velocity + clamp_accel(a) * dt);

      const double demand = p.mass * command;
      const double blend = 1.0 - std::exp(-dt / p.actuator_time_constant);
      next.force = std::clamp(
        state.force + (demand - state.force) * blend,
        -p.traction_force_cap, p.traction_force_cap);
      break;
    }
  }
  return next;
}

/// Holds @p command for @p dt, integrated in @p substeps equal steps.
inline PlantState propagate(
    const ModelSpec& spec, PlantState state, double command, double dt,
    int substeps = 1)
{
  const double h = dt / static_cast<double>(std::max(substeps, 1));
  for (int i = 0; i < std::max(substeps, 1); ++i)
    state = step_model(spec, state, command, h);
  return state;
}

inline Eigen::VectorXd to_vector(ModelKind k, const PlantState& s)
{
  Eigen::VectorXd x(state_dim(k));
  x(0) = s.velocity;
  if (k == ModelKind::MultiBody)
    x(1) = s.force;
  return x;
}

inline PlantState from_vector(ModelKind k, const Eigen::VectorXd& x, double force = 0.0)
{
  return {x(0), k == ModelKind::MultiBody ? x(1) : force};
}

/// Discrete-time Jacobians of propagate() around (state, command).
struct Linearization
{
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
};

inline Linearization linearize(
    const ModelSpec& spec, const PlantState& state, double command, double dt,
    int substeps = 1)
{
  const int n = state_dim(spec.kind);
  Linearization lin{Eigen::MatrixXd(n, n), Eigen::VectorXd(n)};

  const auto f = [&](const Eigen::VectorXd& x, double u)
    {
      return to_vector(spec.kind,
        propagate(spec, from_vector(spec.kind, x, state.force), u, dt, substeps));
    };

  const Eigen::VectorXd x0 = to_vector(spec.kind, state);
  for (int i = 0; i < n; ++i)
  {
    const double h = 1e-6 * std::max(1.0, std::abs(x0(i)));
    Eigen::VectorXd xp = x0;
    Eigen::VectorXd xm = x0;
    xp(i) += h;
    xm(i) -= h;
    lin.A.col(i) = (f(xp, command) - f(xm, command)) / (2.0 * h);
  }
  const double hu = 1e-6 * std::max(1.0, std::abs(command));
  lin.B = (f(x0, command + hu) - f(x0, command - hu)) / (2.0 * hu);
  return lin;
}

} // namespace somc::plantlab

#endif // SOMC__PLANTLAB__MODELS_HPP
