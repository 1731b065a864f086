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

#ifndef SOMC__RANDOM_INSTANCES_HPP
#define SOMC__RANDOM_INSTANCES_HPP

#include <somc/brute_force.hpp>
#include <somc/graph.hpp>
#include <somc/registry.hpp>
#include <somc/search.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace somc {

struct RandomInstanceConfig
{
  int max_per_kind = 4;

  /// Probability that a model-capable filter or controller needs a model.
  double model_probability = 0.4;
};

/// Seeded random registries with small topic pools, so that some instances
/// have edges whose paths are still infeasible.
class RandomInstanceGenerator
{
public:
  explicit RandomInstanceGenerator(
      std::uint64_t seed, RandomInstanceConfig config = {})
  : _rng(seed), _config(config)
  {
  }

  Registry registry()
  {
    Registry r;
    const auto add = [&](Service s)
      {
        s.metrics = Metrics::initial(uniform(), uniform());
        r = add_service(r, std::move(s)).registry;
      };

    const int n_models = count(0);
    for (int i = 0; i < n_models; ++i)
      add({"m" + std::to_string(i), ServiceKind::Model, topics({"model"}), {}, {}});

    for (int i = 0, n = count(1); i < n; ++i)
      add({"s" + std::to_string(i), ServiceKind::Sensor, subset(_sensor_out, false), {}, {}});

    for (int i = 0, n = count(1); i < n; ++i)
    {
      TopicSet req = subset(_sensor_out, true);
      if (n_models > 0 && coin(_config.model_probability))
        req.insert(model_topic);
      add({"f" + std::to_string(i), ServiceKind::Filter, subset(_filter_out, false), req, {}});
    }

    for (int i = 0, n = count(1); i < n; ++i)
    {
      TopicSet req = subset(_controller_in, true);
      if (n_models > 0 && coin(_config.model_probability))
        req.insert(model_topic);
      add({"c" + std::to_string(i), ServiceKind::Controller, subset(_controller_out, false), req, {}});
    }

    for (int i = 0, n = count(1); i < n; ++i)
      add({"a" + std::to_string(i), ServiceKind::Actuator, topics({"act"}),
        subset(_controller_out, true), {}});

    return r;
  }

  double alpha()
  {
    std::uniform_real_distribution<double> d(min_alpha, max_alpha);
    return d(_rng);
  }

  WeightedServiceGraph graph()
  {
    const Registry r = registry();
    return create_service_graph(r, alpha());
  }

private:
  double uniform()
  {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return d(_rng);
  }

  bool coin(double p)
  {
    return uniform() < p;
  }

  int count(int min)
  {
    std::uniform_int_distribution<int> d(min, _config.max_per_kind);
    return d(_rng);
  }

  TopicSet subset(const std::vector<std::string>& pool, bool allow_empty)
  {
    TopicSet out;
    while (true)
    {
      for (const auto& t : pool)
      {
        if (coin(0.5))
          out.insert(TopicId{t});
      }
      if (allow_empty || !out.empty())
        return out;
    }
  }

  std::mt19937_64 _rng;
  RandomInstanceConfig _config;

  std::vector<std::string> _sensor_out = {"y0", "y1", "y2"};
  std::vector<std::string> _filter_out = {"x0", "x1"};
  std::vector<std::string> _controller_in = {"x0", "x1", "y0", "y1", "y2"};
  std::vector<std::string> _controller_out = {"u0", "u1"};
};

struct OracleCheckResult
{
  std::size_t instances = 0;
  std::size_t feasible = 0;
  std::size_t infeasible = 0;
  std::size_t mismatches = 0;
  std::size_t admissibility_violations = 0;
  std::vector<std::string> failures;
};

/// Compares A* against exhaustive enumeration on @p instances random graphs
/// and checks h never exceeds the optimal remaining cost of an expanded state.
inline OracleCheckResult run_oracle_check(std::size_t instances, std::uint64_t seed)
{
  OracleCheckResult res;
  RandomInstanceGenerator gen(seed);
  for (std::size_t i = 0; i < instances; ++i)
  {
    const WeightedServiceGraph g = gen.graph();
    ++res.instances;

    std::optional<Composition> a;
    std::optional<Composition> b;
    SearchTrace trace;
    try { a = astar(g, &trace); } catch (const InfeasibleError&) {}
    try { b = brute_force(g); } catch (const InfeasibleError&) {}

    if (a.has_value() != b.has_value())
    {
      ++res.mismatches;
      res.failures.push_back("instance " + std::to_string(i) + ": feasibility differs");
      continue;
    }
    if (!a)
    {
      ++res.infeasible;
      continue;
    }
    ++res.feasible;

    if (a->path != b->path || std::abs(a->cost - b->cost) > 1e-9 ||
        !is_feasible_path(g, a->path))
    {
      ++res.mismatches;
      res.failures.push_back("instance " + std::to_string(i) + ": path or cost differs");
    }

    for (const auto& s : trace.expanded)
    {
      const double rest = optimal_suffix_cost(g, s.vertex, s.provided);
      if (std::isfinite(rest) && s.h > rest + 1e-12)
      {
        ++res.admissibility_violations;
        res.failures.push_back("instance " + std::to_string(i) + ": inadmissible h");
      }
    }
  }
  return res;
}

} // namespace somc

#endif // SOMC__RANDOM_INSTANCES_HPP
