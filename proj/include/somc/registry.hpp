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

#ifndef SOMC__REGISTRY_HPP
#define SOMC__REGISTRY_HPP

#include <somc/errors.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace somc {

//==============================================================================
enum class ServiceKind
{
  Sensor,
  Filter,
  Controller,
  Actuator,
  Model,
  Process
};

inline constexpr std::array<ServiceKind, 6> all_service_kinds = {
  ServiceKind::Sensor, ServiceKind::Filter, ServiceKind::Controller,
  ServiceKind::Actuator, ServiceKind::Model, ServiceKind::Process};

inline constexpr std::string_view to_string(ServiceKind kind)
{
  switch (kind)
  {
    case ServiceKind::Sensor: return "sensor";
    case ServiceKind::Filter: return "filter";
    case ServiceKind::Controller: return "controller";
    case ServiceKind::Actuator: return "actuator";
    case ServiceKind::Model: return "model";
    case ServiceKind::Process: return "process";
  }
  return "unknown";
}

inline std::optional<ServiceKind> parse_service_kind(std::string_view name)
{
  for (const auto kind : all_service_kinds)
  {
    if (to_string(kind) == name)
      return kind;
  }
  return std::nullopt;
}

//==============================================================================
/// Symbolic name of an information channel between services.
struct TopicId
{
  std::string name;

  auto operator<=>(const TopicId&) const = default;
};

using TopicSet = std::set<TopicId>;

/// Requiring this topic marks a service as model-based.
inline const TopicId model_topic{"model"};

inline TopicSet topics(std::initializer_list<std::string_view> names)
{
  TopicSet out;
  for (const auto n : names)
    out.insert(TopicId{std::string(n)});
  return out;
}

//==============================================================================
struct Metrics
{
  /// Mean execution time per invocation [ms].
  double tau = 0.0;

  /// Inaccuracy in the service's output unit.
  double epsilon = 0.0;

  std::size_t sample_count = 0;

  double initial_tau = 0.0;
  double initial_epsilon = 0.0;

  static Metrics initial(double tau, double epsilon)
  {
    if (!(tau >= 0.0) || !(epsilon >= 0.0) ||
        !std::isfinite(tau) || !std::isfinite(epsilon))
      throw DomainError("initial metrics must be finite and non-negative");

    Metrics m;
    m.tau = m.initial_tau = tau;
    m.epsilon = m.initial_epsilon = epsilon;
    return m;
  }

  bool operator==(const Metrics&) const = default;
};

//==============================================================================
struct Service
{
  std::string id;
  ServiceKind kind = ServiceKind::Sensor;
  TopicSet guarantees;
  TopicSet requirements;
  Metrics metrics;

  bool needs_model() const { return requirements.contains(model_topic); }

  bool operator==(const Service&) const = default;
};

//==============================================================================
struct ChangeEvent
{
  enum class Type
  {
    Added,
    Removed,
    Updated
  };

  Type type = Type::Added;
  std::string service_id;

  /// Registry revision after the change.
  std::uint64_t revision = 0;
};

struct RegistryUpdate;

//==============================================================================
/// End-to-end inaccuracy measured for a (filter-or-controller, model) pair.
struct PairMetrics
{
  double epsilon = 0.0;
  std::size_t sample_count = 0;

  bool operator==(const PairMetrics&) const = default;
};

using PairKey = std::pair<std::string, std::string>;

//==============================================================================
/// Immutable snapshot of the services available to the orchestrator.
///
/// Every mutating operation returns a new snapshot together with the change
/// event that produced it; the original is left untouched.
class Registry
{
public:
  Registry() = default;

  std::size_t size() const { return _services.size(); }
  bool empty() const { return _services.empty(); }
  bool contains(const std::string& id) const { return _services.contains(id); }
  std::uint64_t revision() const { return _revision; }

  const Service& at(const std::string& id) const
  {
    const auto it = _services.find(id);
    if (it == _services.end())
      throw NotFoundError("no service with id '" + id + "'");
    return it->second;
  }

  /// Services keyed (and therefore ordered) by id.
  const std::map<std::string, Service>& services() const { return _services; }

  /// All and only the services of @p kind, sorted by id.
  std::vector<Service> select_by_kind(ServiceKind kind) const
  {
    std::vector<Service> out;
    for (const auto& [id, s] : _services)
    {
      if (s.kind == kind)
        out.push_back(s);
    }
    return out;
  }

  std::optional<PairMetrics> pair_metrics(
      const std::string& primary, const std::string& model) const
  {
    const auto it = _pairs.find(PairKey{primary, model});
    if (it == _pairs.end())
      return std::nullopt;
    return it->second;
  }

  inline RegistryUpdate with_service(Service service) const;
  inline RegistryUpdate without_service(const std::string& id) const;
  inline RegistryUpdate with_metrics_sample(
      const std::string& id, double tau_sample, double epsilon) const;
  inline RegistryUpdate with_pair_epsilon(
      const std::string& primary, const std::string& model,
      double epsilon) const;

  bool operator==(const Registry&) const = default;

private:
  std::map<std::string, Service> _services;
  std::map<PairKey, PairMetrics> _pairs;
  std::uint64_t _revision = 0;
};

struct RegistryUpdate
{
  Registry registry;
  ChangeEvent event;
};

//==============================================================================
inline RegistryUpdate Registry::with_service(Service service) const
{
  if (service.id.empty())
    throw DomainError("service id must not be empty");
  if (_services.contains(service.id))
    throw DuplicateIdError("duplicate service id '" + service.id + "'");
  if (service.guarantees.empty())
    throw DomainError(
      "service '" + service.id + "' must guarantee at least one topic");

  RegistryUpdate out{*this, {}};
  const std::string id = service.id;
  out.registry._services.emplace(id, std::move(service));
  out.registry._revision = _revision + 1;
  out.event = {ChangeEvent::Type::Added, id, out.registry._revision};
  return out;
}

inline RegistryUpdate Registry::without_service(const std::string& id) const
{
  if (!_services.contains(id))
    throw NotFoundError("no service with id '" + id + "'");

  RegistryUpdate out{*this, {}};
  out.registry._services.erase(id);
  std::erase_if(out.registry._pairs, [&](const auto& entry)
    {
      return entry.first.first == id || entry.first.second == id;
    });
  out.registry._revision = _revision + 1;
  out.event = {ChangeEvent::Type::Removed, id, out.registry._revision};
  return out;
}

/// Folds one execution-time sample into the running mean and replaces the
/// inaccuracy. Initial estimates are discarded once the first sample arrives.
inline RegistryUpdate Registry::with_metrics_sample(
    const std::string& id, double tau_sample, double epsilon) const
{
  if (!_services.contains(id))
    throw NotFoundError("no service with id '" + id + "'");
  if (!(tau_sample >= 0.0) || !(epsilon >= 0.0) ||
      !std::isfinite(tau_sample) || !std::isfinite(epsilon))
    throw DomainError("metric samples must be finite and non-negative");

  RegistryUpdate out{*this, {}};
  Metrics& m = out.registry._services.at(id).metrics;
  const double n = static_cast<double>(m.sample_count + 1);
  m.tau = m.sample_count == 0 ? tau_sample : m.tau + (tau_sample - m.tau) / n;
  m.epsilon = epsilon;
  ++m.sample_count;
  out.registry._revision = _revision + 1;
  out.event = {ChangeEvent::Type::Updated, id, out.registry._revision};
  return out;
}

inline RegistryUpdate Registry::with_pair_epsilon(
    const std::string& primary, const std::string& model, double epsilon) const
{
  if (!_services.contains(primary))
    throw NotFoundError("no service with id '" + primary + "'");
  if (!_services.contains(model))
    throw NotFoundError("no service with id '" + model + "'");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw DomainError("pair inaccuracy must be finite and non-negative");

  RegistryUpdate out{*this, {}};
  PairMetrics& p = out.registry._pairs[PairKey{primary, model}];
  p.epsilon = epsilon;
  ++p.sample_count;
  out.registry._revision = _revision + 1;
  out.event = {ChangeEvent::Type::Updated, primary, out.registry._revision};
  return out;
}

//==============================================================================
inline RegistryUpdate add_service(const Registry& registry, Service service)
{
  return registry.with_service(std::move(service));
}

inline RegistryUpdate remove_service(
    const Registry& registry, const std::string& id)
{
  return registry.without_service(id);
}

inline RegistryUpdate update_metrics(
    const Registry& registry, const std::string& id,
    double new_tau_sample, double new_epsilon)
{
  return registry.with_metrics_sample(id, new_tau_sample, new_epsilon);
}

inline std::vector<Service> select_by_kind(
    const Registry& registry, ServiceKind kind)
{
  return registry.select_by_kind(kind);
}

} // namespace somc

#endif // SOMC__REGISTRY_HPP
