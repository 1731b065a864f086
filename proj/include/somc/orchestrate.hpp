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

#ifndef SOMC__ORCHESTRATE_HPP
#define SOMC__ORCHESTRATE_HPP

#include <somc/graph.hpp>
#include <somc/registry.hpp>
#include <somc/search.hpp>
#include <somc/tuner.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>

namespace somc {

/// Anything that proposes a trade-off weight for a context.
template<typename T>
concept AlphaSource = requires(const T& t, const Context& c)
{
  { t.suggest_alpha(c) } -> std::convertible_to<double>;
};

struct Orchestration
{
  double alpha = 0.5;
  WeightedServiceGraph graph;
  Composition composition;
};

/// Orchestrates for a fixed weight: graph construction then A*.
inline Orchestration orchestrate_at(const Registry& registry, double alpha)
{
  WeightedServiceGraph g = create_service_graph(registry, alpha);
  Composition c = astar(g);
  return {alpha, std::move(g), std::move(c)};
}

/// Asks the tuner for a weight under @p criterion and orchestrates with it.
template<AlphaSource Tuner>
Orchestration orchestrate(
    const Registry& registry, const Tuner& tuner, const Context& context,
    Criterion criterion)
{
  double alpha = 0.5;
  if constexpr (requires { tuner.with_criterion(criterion); })
    alpha = tuner.with_criterion(criterion).suggest_alpha(context);
  else
    alpha = tuner.suggest_alpha(context);
  return orchestrate_at(registry, alpha);
}

/// Keeps the active composition and re-runs orchestration only when the
/// weight moves by at least one grid step or the registry revision changes.
class Orchestrator
{
public:
  explicit Orchestrator(double alpha_step = 0.01)
  : _alpha_step(alpha_step)
  {
  }

  bool needs_update(const Registry& registry, double alpha) const
  {
    if (!_active)
      return true;
    if (registry.revision() != _revision)
      return true;
    // A relative slack absorbs round-off on grid values.
    return std::abs(alpha - _active->alpha) >= _alpha_step * (1.0 - 1e-9);
  }

  /// Returns true when a new orchestration was computed.
  bool update(const Registry& registry, double alpha)
  {
    if (!needs_update(registry, alpha))
      return false;
    _active = orchestrate_at(registry, alpha);
    _revision = registry.revision();
    return true;
  }

  const std::optional<Orchestration>& active() const { return _active; }

private:
  double _alpha_step;
  std::optional<Orchestration> _active;
  std::uint64_t _revision = 0;
};

} // namespace somc

#endif // SOMC__ORCHESTRATE_HPP
