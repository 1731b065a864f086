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

#ifndef SOMC__BRUTE_FORCE_HPP
#define SOMC__BRUTE_FORCE_HPP

#include <somc/search.hpp>

#include <functional>
#include <limits>
#include <optional>

namespace somc {

inline constexpr double brute_force_path_limit = 1e6;

// Exhaustive enumeration of every one-vertex-per-layer path. These functions
// are the reference the A* search is checked against; they share nothing
// with it except the graph and the feasibility checker.

inline double count_layered_paths_bound(const WeightedServiceGraph& g)
{
  double n = 1.0;
  for (int l = 1; l <= layer_count; ++l)
    n *= static_cast<double>(g.layer_vertices(l).size());
  return n;
}

/// Minimum-cost feasible composition found by enumeration, with the same
/// lexicographic tie-break as astar().
inline Composition brute_force(const WeightedServiceGraph& g)
{
  if (count_layered_paths_bound(g) > brute_force_path_limit)
    throw RefusalError("graph has more than 1e6 candidate paths");

  std::optional<std::vector<std::size_t>> best;
  std::vector<std::string> best_ids;
  double best_cost = std::numeric_limits<double>::infinity();
  int deepest = layer::start;

  std::vector<std::size_t> path{g.start()};

  const auto prefix_feasible = [&]()
    {
      TopicSet provided;
      for (const auto v : path)
      {
        for (const auto& r : g.vertex(v).requirements)
        {
          if (!provided.contains(r))
            return false;
        }
        const auto& gu = g.vertex(v).guarantees;
        provided.insert(gu.begin(), gu.end());
      }
      return true;
    };

  std::function<void()> recurse = [&]()
    {
      const std::size_t u = path.back();
      if (!prefix_feasible())
        return;
      deepest = std::max(deepest, g.vertex(u).layer);

      if (u == g.end())
      {
        if (!is_feasible_path(g, path))
          return;
        double cost = 0.0;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < path.size(); ++i)
        {
          ids.push_back(g.vertex(path[i]).id);
          if (i + 1 < path.size())
            cost += *g.edge_weight_between(path[i], path[i + 1]);
        }
        if (!best || cost < best_cost || (cost == best_cost && ids < best_ids))
        {
          best = path;
          best_cost = cost;
          best_ids = std::move(ids);
        }
        return;
      }

      for (const auto e : g.out_edges(u))
      {
        path.push_back(g.edges()[e].to);
        recurse();
        path.pop_back();
      }
    };
  recurse();

  if (!best)
  {
    const int blocked = deepest + 1;
    throw InfeasibleError(
      "no feasible composition: enumeration found no covered " +
      std::string(layer_name(blocked)) + " vertex", blocked);
  }
  return make_composition(g, *best);
}

/// Cheapest feasible completion from @p vertex to End when the path so far
/// provides @p provided. Infinity when no completion exists.
inline double optimal_suffix_cost(
    const WeightedServiceGraph& g, std::size_t vertex, const TopicSet& provided)
{
  if (vertex == g.end())
    return 0.0;

  double best = std::numeric_limits<double>::infinity();
  for (const auto e : g.out_edges(vertex))
  {
    const Edge& edge = g.edges()[e];
    const Vertex& next = g.vertex(edge.to);
    bool ok = true;
    for (const auto& r : next.requirements)
      ok = ok && provided.contains(r);
    if (!ok)
      continue;

    TopicSet extended = provided;
    extended.insert(next.guarantees.begin(), next.guarantees.end());
    best = std::min(best, edge.weight + optimal_suffix_cost(g, edge.to, extended));
  }
  return best;
}

} // namespace somc

#endif // SOMC__BRUTE_FORCE_HPP
