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

#ifndef SOMC__HARNESS__SCENARIO_HPP
#define SOMC__HARNESS__SCENARIO_HPP

#include <somc/errors.hpp>
#include <somc/graph.hpp>
#include <somc/registry.hpp>
#include <somc/tuner.hpp>
#include <somc/plantlab/episode.hpp>

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace somc::harness {

struct Phase
{
  Criterion criterion = Criterion::TrackingError;
  std::size_t iterations = 0;
  Context context;
};

struct Scenario
{
  std::string name;
  Registry registry;
  plantlab::Lab lab;
  std::vector<Phase> schedule;

  std::uint64_t seed = 0;
  plantlab::TimingMode timing = plantlab::TimingMode::Synthetic;
  double timing_jitter = 0.0;

  /// Fixed trade-off weight; bypasses the tuner when set.
  std::optional<double> alpha_override;

  TunerConfig tuner;

  std::size_t total_iterations() const
  {
    std::size_t n = 0;
    for (const auto& p : schedule)
      n += p.iterations;
    return n;
  }
};

//==============================================================================
namespace detail {

/// A YAML node plus its dotted path, for error messages.
class Field
{
public:
  Field(YAML::Node node, std::string path)
  : _node(std::move(node)), _path(std::move(path))
  {
  }

  const std::string& path() const { return _path; }
  const YAML::Node& node() const { return _node; }

  [[noreturn]] void fail(const std::string& what) const
  {
    std::string msg = "field '" + _path + "': " + what;
    const auto mark = _node.Mark();
    if (mark.line >= 0)
      msg += " (line " + std::to_string(mark.line + 1) + ")";
    throw ValidationError(msg);
  }

  void require_map(std::initializer_list<std::string_view> allowed) const
  {
    if (!_node.IsMap())
      fail("expected a mapping");
    for (const auto& kv : _node)
    {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (const auto a : allowed)
        ok = ok || key == a;
      if (!ok)
        Field(kv.first, child_path(key)).fail("unknown key");
    }
  }

  bool has(const std::string& key) const
  {
    return _node.IsMap() && _node[key].IsDefined() && !_node[key].IsNull();
  }

  Field operator[](const std::string& key) const
  {
    if (!has(key))
      fail("missing required key '" + key + "'");
    return Field(_node[key], child_path(key));
  }

  std::optional<Field> optional(const std::string& key) const
  {
    if (!has(key))
      return std::nullopt;
    return Field(_node[key], child_path(key));
  }

  std::vector<Field> items() const
  {
    if (!_node.IsSequence())
      fail("expected a sequence");
    std::vector<Field> out;
    for (std::size_t i = 0; i < _node.size(); ++i)
      out.emplace_back(_node[i], _path + "[" + std::to_string(i) + "]");
    return out;
  }

  template<typename T>
  T as() const
  {
    if (!_node.IsScalar())
      fail("expected a scalar");
    try
    {
      return _node.as<T>();
    }
    catch (const YAML::Exception&)
    {
      fail("cannot parse '" + _node.Scalar() + "'");
    }
  }

  double number() const
  {
    const double v = as<double>();
    if (!std::isfinite(v))
      fail("must be finite");
    return v;
  }

  double non_negative() const
  {
    const double v = number();
    if (v < 0.0)
      fail("must be >= 0");
    return v;
  }

  double positive() const
  {
    const double v = number();
    if (!(v > 0.0))
      fail("must be > 0");
    return v;
  }

private:
  std::string child_path(const std::string& key) const
  {
    return _path.empty() ? key : _path + "." + key;
  }

  YAML::Node _node;
  std::string _path;
};

inline TopicSet topic_list(const Field& f)
{
  TopicSet out;
  for (const auto& item : f.items())
  {
    const auto name = item.as<std::string>();
    if (name.empty())
      item.fail("empty topic name");
    out.insert(TopicId{name});
  }
  return out;
}

inline double get_or(const std::optional<Field>& f, double fallback)
{
  return f ? f->number() : fallback;
}

inline plantlab::VehicleParameters vehicle(
    const Field& f, plantlab::VehicleParameters p = {})
{
  f.require_map({"mass", "drag_coefficient", "rolling_coefficient",
    "actuator_time_constant", "traction_force_cap", "v_max", "a_max", "gravity"});
  if (auto x = f.optional("mass")) p.mass = x->positive();
  if (auto x = f.optional("drag_coefficient")) p.drag_coefficient = x->non_negative();
  if (auto x = f.optional("rolling_coefficient")) p.rolling_coefficient = x->non_negative();
  if (auto x = f.optional("actuator_time_constant")) p.actuator_time_constant = x->positive();
  if (auto x = f.optional("traction_force_cap")) p.traction_force_cap = x->positive();
  if (auto x = f.optional("v_max")) p.v_max = x->positive();
  if (auto x = f.optional("a_max")) p.a_max = x->positive();
  if (auto x = f.optional("gravity")) p.gravity = x->non_negative();
  return p;
}

inline Context context(const Field& f)
{
  f.require_map({"initial_velocity", "reference"});
  return {f["initial_velocity"].non_negative(), f["reference"].non_negative()};
}

inline plantlab::Behavior behavior(
    const Field& svc, ServiceKind kind, const plantlab::VehicleParameters& plant)
{
  using namespace plantlab;
  const auto expect = [&](ServiceKind k, const char* key)
    {
      if (kind != k)
        svc[key].fail("behavior does not match kind '" + std::string(to_string(kind)) + "'");
    };

  if (auto f = svc.optional("sensor"))
  {
    expect(ServiceKind::Sensor, "sensor");
    f->require_map({"noise_sigma"});
    return SensorSpec{(*f)["noise_sigma"].non_negative()};
  }
  if (auto f = svc.optional("kalman"))
  {
    expect(ServiceKind::Filter, "kalman");
    f->require_map({"process_noise_velocity", "process_noise_force",
      "initial_variance_velocity", "initial_variance_force"});
    KalmanConfig c;
    if (auto x = f->optional("process_noise_velocity")) c.process_noise_velocity = x->non_negative();
    if (auto x = f->optional("process_noise_force")) c.process_noise_force = x->non_negative();
    if (auto x = f->optional("initial_variance_velocity")) c.initial_variance_velocity = x->positive();
    if (auto x = f->optional("initial_variance_force")) c.initial_variance_force = x->positive();
    return KalmanFilterBehavior{c};
  }
  if (svc.node()["dummy"].IsDefined())
  {
    expect(ServiceKind::Filter, "dummy");
    const YAML::Node d = svc.node()["dummy"];
    if (!d.IsNull() && !(d.IsMap() && d.size() == 0))
      Field(d, svc.path() + ".dummy").fail("takes no parameters");
    return DummyFilterBehavior{};
  }
  if (auto f = svc.optional("pid"))
  {
    expect(ServiceKind::Controller, "pid");
    f->require_map({"kp", "ki", "kd", "u_min", "u_max"});
    PidGains g;
    g.kp = (*f)["kp"].non_negative();
    g.ki = (*f)["ki"].non_negative();
    g.kd = (*f)["kd"].non_negative();
    g.u_min = get_or(f->optional("u_min"), g.u_min);
    g.u_max = get_or(f->optional("u_max"), g.u_max);
    if (!(g.u_max > g.u_min))
      f->fail("u_max must exceed u_min");
    return PidBehavior{g};
  }
  if (auto f = svc.optional("mpc"))
  {
    expect(ServiceKind::Controller, "mpc");
    f->require_map({"horizon", "q", "r", "u_ref", "u_min", "u_max", "v_min",
      "v_max", "state_penalty", "max_iterations", "tolerance", "linearizations"});
    MpcConfig c;
    c.v_max = plant.v_max;
    if (auto x = f->optional("horizon"))
    {
      const int n = x->as<int>();
      if (n < 1)
        x->fail("must be >= 1");
      c.horizon = n;
    }
    if (auto x = f->optional("q")) c.q = x->non_negative();
    if (auto x = f->optional("r")) c.r = x->non_negative();
    if (auto x = f->optional("u_ref")) c.u_ref = x->number();
    if (auto x = f->optional("u_min")) c.u_min = x->number();
    if (auto x = f->optional("u_max")) c.u_max = x->number();
    if (auto x = f->optional("v_min")) c.v_min = x->number();
    if (auto x = f->optional("v_max")) c.v_max = x->number();
    if (auto x = f->optional("state_penalty")) c.state_penalty = x->non_negative();
    if (auto x = f->optional("max_iterations"))
    {
      const int n = x->as<int>();
      if (n < 1)
        x->fail("must be >= 1");
      c.max_iterations = n;
    }
    if (auto x = f->optional("tolerance")) c.tolerance = x->positive();
    if (auto x = f->optional("linearizations"))
    {
      const int n = x->as<int>();
      if (n < 1)
        x->fail("must be >= 1");
      c.linearizations = n;
    }
    if (!(c.u_max >= c.u_min) || !(c.v_max >= c.v_min))
      f->fail("inconsistent bounds");
    return MpcBehavior{c};
  }
  if (auto f = svc.optional("model"))
  {
    expect(ServiceKind::Model, "model");
    f->require_map({"type", "parameters"});
    const auto type = (*f)["type"];
    const auto k = parse_model_kind(type.as<std::string>());
    if (!k)
      type.fail("unknown model type (point_mass, single_track, multi_body)");
    ModelSpec m{*k, plant};
    if (auto p = f->optional("parameters"))
      m.params = vehicle(*p, plant);
    return m;
  }
  if (auto f = svc.optional("actuator"))
  {
    expect(ServiceKind::Actuator, "actuator");
    f->require_map({"accuracy", "range_min", "range_max"});
    ActuatorSpec a;
    a.accuracy = (*f)["accuracy"].non_negative();
    a.range_min = get_or(f->optional("range_min"), a.range_min);
    a.range_max = get_or(f->optional("range_max"), a.range_max);
    if (!(a.range_max > a.range_min))
      f->fail("range_max must exceed range_min");
    return a;
  }
  svc.fail("missing behavior (one of sensor, kalman, dummy, pid, mpc, model, actuator)");
}

inline TunerConfig tuner_config(const Field& f, std::uint64_t seed)
{
  f.require_map({"beta", "grid_points", "lengthscales", "signal_variance",
    "noise_variance", "random_initial", "fit_hyperparameters"});
  TunerConfig c;
  c.seed = seed;
  if (auto x = f.optional("beta")) c.beta = x->non_negative();
  if (auto x = f.optional("grid_points"))
  {
    const int n = x->as<int>();
    if (n < 2)
      x->fail("must be >= 2");
    c.grid_points = static_cast<std::size_t>(n);
  }
  if (auto x = f.optional("lengthscales"))
  {
    const auto items = x->items();
    if (items.size() != 3)
      x->fail("expected 3 values (state, reference, alpha)");
    for (std::size_t i = 0; i < 3; ++i)
      c.hyper.lengthscales[i] = items[i].positive();
  }
  if (auto x = f.optional("signal_variance")) c.hyper.signal_variance = x->positive();
  if (auto x = f.optional("noise_variance")) c.hyper.noise_variance = x->positive();
  if (auto x = f.optional("random_initial"))
  {
    const int n = x->as<int>();
    if (n < 0)
      x->fail("must be >= 0");
    c.random_initial = static_cast<std::size_t>(n);
  }
  if (auto x = f.optional("fit_hyperparameters")) c.fit_hyperparameters = x->as<bool>();
  return c;
}

} // namespace detail

//==============================================================================
/// Parses and validates a scenario document.
inline Scenario parse_scenario(const std::string& text)
{
  using detail::Field;

  YAML::Node root_node;
  try
  {
    root_node = YAML::Load(text);
  }
  catch (const YAML::ParserException& e)
  {
    throw ValidationError(std::string("malformed scenario: ") + e.what());
  }

  const Field root(root_node, "");
  root.require_map({"name", "seed", "timing", "timing_jitter", "alpha_override",
    "plant", "episode", "context", "schedule", "tuner", "services"});

  Scenario s;
  s.name = root.has("name") ? root["name"].as<std::string>() : "scenario";
  s.seed = root["seed"].as<std::uint64_t>();

  if (auto t = root.optional("timing"))
  {
    const auto mode = plantlab::parse_timing_mode(t->as<std::string>());
    if (!mode)
      t->fail("expected 'synthetic' or 'wallclock'");
    s.timing = *mode;
  }
  if (auto j = root.optional("timing_jitter"))
  {
    s.timing_jitter = j->non_negative();
    if (s.timing_jitter >= 1.0)
      j->fail("must be < 1");
  }
  if (auto a = root.optional("alpha_override"))
  {
    const double alpha = a->number();
    if (!(alpha >= min_alpha && alpha <= max_alpha))
      a->fail("must lie in [0.1, 0.9]");
    s.alpha_override = alpha;
  }

  if (auto p = root.optional("plant"))
    s.lab.plant = detail::vehicle(*p);

  {
    const Field ep = root["episode"];
    ep.require_map({"duration", "control_dt", "plant_dt", "reference_ramp"});
    s.lab.duration = ep["duration"].positive();
    s.lab.control_dt = ep["control_dt"].positive();
    if (auto x = ep.optional("plant_dt")) s.lab.plant_dt = x->positive();
    if (auto x = ep.optional("reference_ramp")) s.lab.reference_ramp = x->number();
    if (s.lab.plant_dt > s.lab.control_dt)
      ep.fail("plant_dt must not exceed control_dt");
    if (s.lab.steps() == 0)
      ep.fail("episode has no control steps");
  }

  const Context default_context = detail::context(root["context"]);

  {
    const Field sched = root["schedule"];
    for (const auto& item : sched.items())
    {
      item.require_map({"criterion", "iterations", "context"});
      Phase ph;
      const Field c = item["criterion"];
      const auto crit = parse_criterion(c.as<std::string>());
      if (!crit)
        c.fail("expected 'tracking_error' or 'computation_time'");
      ph.criterion = *crit;
      const Field n = item["iterations"];
      const int iters = n.as<int>();
      if (iters < 0)
        n.fail("must be >= 0");
      ph.iterations = static_cast<std::size_t>(iters);
      ph.context = item.has("context") ? detail::context(item["context"]) : default_context;
      s.schedule.push_back(ph);
    }
  }

  s.tuner.seed = s.seed;
  if (auto t = root.optional("tuner"))
    s.tuner = detail::tuner_config(*t, s.seed);

  {
    const Field services = root["services"];
    for (const auto& svc : services.items())
    {
      svc.require_map({"id", "kind", "guarantees", "requirements", "initial_tau",
        "initial_epsilon", "synthetic_tau", "sensor", "kalman", "dummy", "pid",
        "mpc", "model", "actuator"});

      Service service;
      service.id = svc["id"].as<std::string>();
      const Field kind = svc["kind"];
      const auto k = parse_service_kind(kind.as<std::string>());
      if (!k)
        kind.fail("unknown service kind");
      if (*k == ServiceKind::Process)
        kind.fail("process services are not registered; the reference comes from the context");
      service.kind = *k;
      service.guarantees = detail::topic_list(svc["guarantees"]);
      if (auto r = svc.optional("requirements"))
        service.requirements = detail::topic_list(*r);

      const double tau = svc["initial_tau"].non_negative();
      const double eps = svc["initial_epsilon"].non_negative();
      service.metrics = Metrics::initial(tau, eps);

      plantlab::LabService lab_service{
        detail::behavior(svc, *k, s.lab.plant),
        svc.has("synthetic_tau") ? svc["synthetic_tau"].non_negative() : tau};

      const bool model_based =
        std::holds_alternative<plantlab::KalmanFilterBehavior>(lab_service.behavior) ||
        std::holds_alternative<plantlab::MpcBehavior>(lab_service.behavior);
      if (model_based && !service.needs_model())
        svc["requirements"].fail("model-based service must require 'model'");

      try
      {
        s.registry = add_service(s.registry, service).registry;
      }
      catch (const Error& e)
      {
        svc.fail(e.what());
      }
      s.lab.services[service.id] = std::move(lab_service);
    }
  }

  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open scenario '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

} // namespace somc::harness

#endif // SOMC__HARNESS__SCENARIO_HPP
