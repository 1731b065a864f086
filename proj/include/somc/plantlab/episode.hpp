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

#ifndef SOMC__PLANTLAB__EPISODE_HPP
#define SOMC__PLANTLAB__EPISODE_HPP

#include <somc/errors.hpp>
#include <somc/graph.hpp>
#include <somc/registry.hpp>
#include <somc/search.hpp>
#include <somc/tuner.hpp>
#include <somc/plantlab/actuators.hpp>
#include <somc/plantlab/controllers.hpp>
#include <somc/plantlab/filters.hpp>
#include <somc/plantlab/inaccuracy.hpp>
#include <somc/plantlab/models.hpp>
#include <somc/plantlab/sensors.hpp>
#include <somc/plantlab/timing.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace somc::plantlab {

//==============================================================================
struct KalmanFilterBehavior
{
  KalmanConfig config;
};

struct DummyFilterBehavior
{
};

struct PidBehavior
{
  PidGains gains;
};

struct MpcBehavior
{
  MpcConfig config;
};

/// What a registered service does when the composition runs it.
using Behavior = std::variant<
  SensorSpec, KalmanFilterBehavior, DummyFilterBehavior, PidBehavior,
  MpcBehavior, ActuatorSpec, ModelSpec>;

struct LabService
{
  Behavior behavior;

  /// Per-invocation execution time reported in synthetic timing mode [ms].
  double synthetic_tau = 0.0;
};

/// Executable side of the case study: service behaviors plus the plant.
struct Lab
{
  std::map<std::string, LabService> services;

  /// Ground-truth plant, integrated with the multi-body model.
  VehicleParameters plant;
  double plant_dt = 0.01;
  double control_dt = 0.05;
  double duration = 10.0;

  /// Rate at which the reference moves from the current state to the target
  /// [m/s^2]. Non-positive means a step.
  double reference_ramp = 1.5;

  int substeps() const
  {
    return std::max(1, static_cast<int>(std::lround(control_dt / plant_dt)));
  }

  std::size_t steps() const
  {
    return static_cast<std::size_t>(std::lround(duration / control_dt));
  }

  ModelSpec plant_model() const { return {ModelKind::MultiBody, plant}; }

  template<typename T>
  const T& behavior(const std::string& id) const
  {
    const auto it = services.find(id);
    if (it == services.end())
      throw NotFoundError("no lab behavior for service '" + id + "'");
    const T* b = std::get_if<T>(&it->second.behavior);
    if (!b)
      throw DomainError("service '" + id + "' has an unexpected behavior type");
    return *b;
  }

  double synthetic_tau(const std::string& id) const
  {
    const auto it = services.find(id);
    if (it == services.end())
      throw NotFoundError("no lab behavior for service '" + id + "'");
    return it->second.synthetic_tau;
  }
};

inline double reference_profile(
    double initial, double target, double ramp, double t)
{
  if (ramp <= 0.0)
    return target;
  const double span = target - initial;
  const double moved = std::min(std::abs(span), ramp * t);
  return initial + (span >= 0.0 ? moved : -moved);
}

//==============================================================================
/// The services a composition puts in the loop, one per role.
struct ActiveComposition
{
  std::string sensor;
  std::string filter;
  std::optional<std::string> filter_model;
  std::string controller;
  std::optional<std::string> controller_model;
  std::string actuator;

  std::vector<std::string> service_ids() const
  {
    std::vector<std::string> out{sensor, filter};
    if (filter_model)
      out.push_back(*filter_model);
    out.push_back(controller);
    if (controller_model)
      out.push_back(*controller_model);
    out.push_back(actuator);
    return out;
  }

  bool operator==(const ActiveComposition&) const = default;
};

inline ActiveComposition active_composition(
    const WeightedServiceGraph& g, const Composition& c)
{
  ActiveComposition a;
  for (const auto v : c.path)
  {
    const Vertex& vx = g.vertex(v);
    std::string primary;
    std::optional<std::string> model;
    if (const auto* s = std::get_if<SingleService>(&vx.payload))
      primary = s->service;
    else if (const auto* gs = std::get_if<GroupedService>(&vx.payload))
    {
      primary = gs->primary;
      model = gs->model;
    }

    switch (vx.layer)
    {
      case layer::sensor: a.sensor = primary; break;
      case layer::filter: a.filter = primary; a.filter_model = model; break;
      case layer::controller: a.controller = primary; a.controller_model = model; break;
      case layer::actuator: a.actuator = primary; break;
      default: break;
    }
  }
  return a;
}

//==============================================================================
struct EpisodeSettings
{
  double initial_velocity = 1.0;
  double reference = 6.0;
  std::uint64_t seed = 0;
  TimingMode timing = TimingMode::Synthetic;
  double timing_jitter = 0.0;
};

struct ServiceInaccuracies
{
  std::map<std::string, double> services;
  std::map<PairKey, double> pairs;
};

struct EpisodeReport
{
  ActiveComposition active;

  std::vector<double> time;
  std::vector<double> reference;
  std::vector<double> true_velocity;
  std::vector<double> measured;
  std::vector<double> estimated;
  std::vector<double> command;
  std::vector<double> applied;

  /// Execution-time samples per service, one per invocation [ms].
  std::map<std::string, std::vector<double>> service_times;

  /// Total execution time of the composition per control step [ms].
  std::vector<double> step_times;

  double rmse = 0.0;
  double mean_step_time = 0.0;

  /// RMS(estimate - truth); diagnostic only.
  double estimation_rmse = 0.0;

  ServiceInaccuracies inaccuracies;

  double sensor_sigma = 0.0;
  double control_dt = 0.05;
  int substeps = 1;
  PlantState start;

  std::size_t size() const { return time.size(); }

  double mean_service_time(const std::string& id) const
  {
    const auto it = service_times.find(id);
    if (it == service_times.end() || it->second.empty())
      throw NotFoundError("no timing samples for '" + id + "'");
    double s = 0.0;
    for (const double t : it->second)
      s += t;
    return s / static_cast<double>(it->second.size());
  }
};

//==============================================================================
/// Inaccuracy of every service in the episode's composition.
///
/// Sensors and actuators report their datasheet constants; models are
/// replayed open loop against the plant; filters and controllers use the
/// recorded trajectories. Grouped services also get a pair entry.
inline ServiceInaccuracies estimate_service_inaccuracies(
    const Lab& lab, const EpisodeReport& report)
{
  if (report.size() == 0)
    throw DomainError("empty episode");

  const ActiveComposition& a = report.active;
  ServiceInaccuracies out;

  out.services[a.sensor] = sensor_epsilon(lab.behavior<SensorSpec>(a.sensor));
  out.services[a.actuator] = actuator_epsilon(lab.behavior<ActuatorSpec>(a.actuator));

  const double f_eps = filter_epsilon(report.sensor_sigma, report.estimated, report.measured);
  const double c_eps = controller_epsilon(report.reference, report.true_velocity);
  out.services[a.filter] = f_eps;
  out.services[a.controller] = c_eps;

  for (const auto& m : {a.filter_model, a.controller_model})
  {
    if (!m)
      continue;
    out.services[*m] = model_epsilon(
      lab.behavior<ModelSpec>(*m), report.start, report.applied,
      report.true_velocity, report.control_dt, report.substeps);
  }
  if (a.filter_model)
    out.pairs[{a.filter, *a.filter_model}] = f_eps;
  if (a.controller_model)
    out.pairs[{a.controller, *a.controller_model}] = c_eps;

  return out;
}

//==============================================================================
/// Runs one closed-loop episode of the composition against the plant.
inline EpisodeReport run_episode(
    const Lab& lab, const ActiveComposition& active, const EpisodeSettings& settings)
{
  const std::size_t steps = lab.steps();
  if (steps == 0)
    throw DomainError("episode has no steps");

  const double dt = lab.control_dt;
  const int substeps = lab.substeps();
  const ModelSpec plant = lab.plant_model();

  std::mt19937_64 noise_rng(settings.seed);
  ExecutionTimer timer(settings.timing, settings.timing_jitter,
    settings.seed ^ 0x9e3779b97f4a7c15ULL);

  const SensorSpec& sensor = lab.behavior<SensorSpec>(active.sensor);
  const ActuatorSpec& actuator = lab.behavior<ActuatorSpec>(active.actuator);

  const auto model_of = [&](const std::optional<std::string>& id)
    -> std::optional<ModelSpec>
    {
      if (!id)
        return std::nullopt;
      return lab.behavior<ModelSpec>(*id);
    };
  const auto filter_model = model_of(active.filter_model);
  const auto controller_model = model_of(active.controller_model);

  const auto& filter_behavior = lab.services.at(active.filter).behavior;
  const auto& controller_behavior = lab.services.at(active.controller).behavior;

  const bool kalman = std::holds_alternative<KalmanFilterBehavior>(filter_behavior);
  if (kalman && !filter_model)
    throw DomainError("Kalman filter '" + active.filter + "' needs a model");
  const bool mpc = std::holds_alternative<MpcBehavior>(controller_behavior);
  if (mpc && !controller_model)
    throw DomainError("MPC '" + active.controller + "' needs a model");

  EpisodeReport rep;
  rep.active = active;
  rep.sensor_sigma = sensor.noise_sigma;
  rep.control_dt = dt;
  rep.substeps = substeps;
  rep.start = {settings.initial_velocity, 0.0};
  for (const auto& id : active.service_ids())
    rep.service_times[id];

  PlantState truth = rep.start;
  std::optional<KalmanState> kf;
  PidState pid_state;
  std::vector<double> mpc_warm;
  double controller_force = 0.0;
  double u_prev = 0.0;

  const auto record = [&](const std::string& id, double ms, double& step_total)
    {
      rep.service_times[id].push_back(ms);
      step_total += ms;
    };

  for (std::size_t k = 0; k < steps; ++k)
  {
    const double t = static_cast<double>(k) * dt;
    const double r = reference_profile(
      settings.initial_velocity, settings.reference, lab.reference_ramp, t);
    double step_total = 0.0;

    double y = 0.0;
    record(active.sensor, timer.measure(lab.synthetic_tau(active.sensor),
      [&] { y = sense(sensor, truth.velocity, noise_rng); }), step_total);

    double estimate = y;
    if (kalman)
    {
      const auto& cfg = std::get<KalmanFilterBehavior>(filter_behavior).config;
      const double r_meas = sensor.noise_sigma * sensor.noise_sigma;
      if (!kf)
      {
        record(*active.filter_model, timer.measure(
          lab.synthetic_tau(*active.filter_model), [] {}), step_total);
        record(active.filter, timer.measure(lab.synthetic_tau(active.filter),
          [&]
          {
            kf = kalman_init(*filter_model, y, cfg);
            kf->P(0, 0) = std::max(r_meas, 1e-12);
          }), step_total);
      }
      else
      {
        KalmanState prior;
        record(*active.filter_model, timer.measure(
          lab.synthetic_tau(*active.filter_model),
          [&] { prior = kalman_predict(*kf, *filter_model, u_prev, dt, cfg, substeps); }),
          step_total);
        record(active.filter, timer.measure(lab.synthetic_tau(active.filter),
          [&] { kf = kalman_update(prior, y, r_meas); }), step_total);
      }
      estimate = kf->velocity();
    }
    else
    {
      record(active.filter, timer.measure(lab.synthetic_tau(active.filter),
        [&] { estimate = dummy_filter(y); }), step_total);
    }

    double u = 0.0;
    if (mpc)
    {
      const auto& cfg = std::get<MpcBehavior>(controller_behavior).config;
      std::vector<double> preview(static_cast<std::size_t>(cfg.horizon));
      for (int j = 0; j < cfg.horizon; ++j)
        preview[static_cast<std::size_t>(j)] = reference_profile(
          settings.initial_velocity, settings.reference, lab.reference_ramp,
          t + static_cast<double>(j + 1) * dt);

      const PlantState x0{std::max(0.0, estimate), controller_force};

      // The model service's share: one prediction over the horizon.
      record(*active.controller_model, timer.measure(
        lab.synthetic_tau(*active.controller_model),
        [&]
        {
          PlantState x = x0;
          for (int j = 0; j < cfg.horizon; ++j)
            x = propagate(*controller_model, x,
              j < static_cast<int>(mpc_warm.size()) ? mpc_warm[static_cast<std::size_t>(j)] : 0.0,
              dt, substeps);
        }), step_total);

      record(active.controller, timer.measure(lab.synthetic_tau(active.controller),
        [&]
        {
          const MpcResult res = mpc_step(
            *controller_model, cfg, x0, preview, dt, substeps, mpc_warm);
          u = res.command;
          mpc_warm.assign(res.inputs.begin() + 1, res.inputs.end());
          mpc_warm.push_back(res.inputs.back());
        }), step_total);
    }
    else
    {
      const auto& gains = std::get<PidBehavior>(controller_behavior).gains;
      record(active.controller, timer.measure(lab.synthetic_tau(active.controller),
        [&]
        {
          const PidOutput out = pid_step(gains, r, estimate, dt, pid_state);
          u = out.command;
          pid_state = out.state;
        }), step_total);
    }

    double applied = 0.0;
    record(active.actuator, timer.measure(lab.synthetic_tau(active.actuator),
      [&] { applied = actuate(actuator, u); }), step_total);

    rep.time.push_back(t);
    rep.reference.push_back(r);
    rep.true_velocity.push_back(truth.velocity);
    rep.measured.push_back(y);
    rep.estimated.push_back(estimate);
    rep.command.push_back(u);
    rep.applied.push_back(applied);
    rep.step_times.push_back(step_total);

    if (controller_model)
      controller_force = propagate(
        *controller_model, {std::max(0.0, estimate), controller_force},
        applied, dt, substeps).force;

    truth = propagate(plant, truth, applied, dt, substeps);
    u_prev = applied;
  }

  rep.rmse = controller_epsilon(rep.reference, rep.true_velocity);
  double total = 0.0;
  for (const double s : rep.step_times)
    total += s;
  rep.mean_step_time = total / static_cast<double>(rep.step_times.size());
  rep.estimation_rmse = controller_epsilon(rep.estimated, rep.true_velocity);
  rep.inaccuracies = estimate_service_inaccuracies(lab, rep);
  return rep;
}

/// F under the given criterion: RMS tracking error [m/s] or mean composition
/// execution time per control step [ms].
inline double evaluate_criterion(const EpisodeReport& report, Criterion criterion)
{
  if (report.size() == 0 || report.step_times.empty())
    throw DomainError("empty episode");
  return criterion == Criterion::TrackingError ? report.rmse : report.mean_step_time;
}

} // namespace somc::plantlab

#endif // SOMC__PLANTLAB__EPISODE_HPP
