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

#ifndef SOMC__SEARCH_HPP
#define SOMC__SEARCH_HPP

#include <somc/errors.hpp>
#include <somc/graph.hpp>
#include <somc/registry.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <string>
#include <vector>

namespace somc {

//==============================================================================
/// A feasible Start..End path with one vertex per layer.
struct Composition
{
  std::vector<std::size_t> path;
  std::vector<std::string> vertex_ids;

  /// weights[i] is the weight of the edge path[i] -> path[i+1].
  std::vector<double> weights;
  double cost = 0.0;
  double alpha = 0.5;

  /// Selected service ids per kind. A grouped vertex contributes its model.
  std::map<ServiceKind, std::vector<std::string>> selected;

  const std::string& vertex_at(int l) const
  {
    return vertex_ids.at(static_cast<std::size_t>(l - 1));
  }

  /// Ids of all services on the path, in path order.
  std::vector<std::string> service_ids(const WeightedServiceGraph& g) const
  {
    std::vector<std::string> out;
    for (const auto v : path)
    {
      for (auto& s : g.vertex(v).service_ids())
        out.push_back(std::move(s));
    }
    return out;
  }

  bool operator==(const Composition&) const = default;
};

/// Checks requirement coverage of a vertex path against upstream guarantees.
/// Independent of the search: it walks the path and nothing else.
inline bool is_feasible_path(
    const WeightedServiceGraph& g, const std::vector<std::size_t>& path)
{
  if (path.size() != static_cast<std::size_t>(layer_count))
    return false;
  if (path.front() != g.start() || path.back() != g.end())
    return false;

  TopicSet provided;
  for (std::size_t i = 0; i < path.size(); ++i)
  {
    const Vertex& v = g.vertex(path[i]);
    if (v.layer != static_cast<int>(i) + 1)
      return false;
    if (i > 0 && !g.edge_weight_between(path[i - 1], path[i]))
      return false;
    for (const auto& r : v.requirements)
    {
      if (!provided.contains(r))
        return false;
    }
    provided.insert(v.guarantees.begin(), v.guarantees.end());
  }
  return true;
}

/// Resolves a vertex-id path into a full composition record.
inline Composition make_composition(
    const WeightedServiceGraph& g, std::vector<std::size_t> path)
{
  Composition c;
  c.alpha = g.alpha();
  for (std::size_t i = 0; i < path.size(); ++i)
  {
    const Vertex& v = g.vertex(path[i]);
    c.vertex_ids.push_back(v.id);
    if (i + 1 < path.size())
    {
      const auto w = g.edge_weight_between(path[i], path[i + 1]);
      if (!w)
        throw DomainError("path uses a missing edge " + v.id + " -> " +
          g.vertex(path[i + 1]).id);
      c.weights.push_back(*w);
      c.cost += *w;
    }

    const auto kind_of_layer = [](int l)
      {
        switch (l)
        {
          case layer::sensor: return ServiceKind::Sensor;
          case layer::filter: return ServiceKind::Filter;
          case layer::controller: return ServiceKind::Controller;
          default: return ServiceKind::Actuator;
        }
      };

    if (const auto* s = std::get_if<SingleService>(&v.payload))
      c.selected[kind_of_layer(v.layer)].push_back(s->service);
    else if (const auto* gs = std::get_if<GroupedService>(&v.payload))
    {
      c.selected[kind_of_layer(v.layer)].push_back(gs->primary);
      c.selected[ServiceKind::Model].push_back(gs->model);
    }
  }
  c.path = std::move(path);
  return c;
}

//==============================================================================
/// Sum over the layers after @p l of the cheapest edge entering that layer.
inline double heuristic_from_layer(const WeightedServiceGraph& g, int l)
{
  double h = 0.0;
  for (int next = l + 1; next <= layer_count; ++next)
  {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : g.edges())
    {
      if (g.vertex(e.to).layer == next)
        best = std::min(best, e.weight);
    }
    if (best < std::numeric_limits<double>::infinity())
      h += best;
  }
  return h;
}

inline double heuristic(const WeightedServiceGraph& g, std::size_t vertex)
{
  return heuristic_from_layer(g, g.vertex(vertex).layer);
}

//==============================================================================
struct ExpandedState
{
  std::size_t vertex = 0;
  TopicSet provided;
  double g = 0.0;
  double h = 0.0;
};

/// Optional instrumentation of an A* run.
struct SearchTrace
{
  std::vector<ExpandedState> expanded;
};

namespace detail {

struct SearchNode
{
  std::size_t vertex = 0;
  TopicSet provided;
  double g = 0.0;
  double f = 0.0;
  std::vector<std::string> ids;
  std::vector<std::size_t> path;
};

struct SearchNodeCompare
{
  // priority_queue pops the greatest element, so "greater" means "worse".
  bool operator()(
      const std::shared_ptr<const SearchNode>& a,
      const std::shared_ptr<const SearchNode>& b) const
  {
    if (a->f != b->f)
      return a->f > b->f;
    return a->ids > b->ids;
  }
};

inline bool covered(const TopicSet& required, const TopicSet& provided)
{
  return std::all_of(required.begin(), required.end(),
    [&](const TopicId& t) { return provided.contains(t); });
}

} // namespace detail

/// Cost-optimal feasible composition by A* with the per-layer-minimum
/// heuristic. States are (vertex, provided topics) so that the closed set
/// stays correct under path-dependent feasibility. Among equal-cost paths
/// the lexicographically smallest vertex-id sequence wins.
inline Composition astar(
    const WeightedServiceGraph& g, SearchTrace* trace = nullptr)
{
  using detail::SearchNode;
  using NodePtr = std::shared_ptr<const SearchNode>;

  std::vector<double> h_layer(layer_count + 1, 0.0);
  for (int l = 1; l <= layer_count; ++l)
    h_layer[static_cast<std::size_t>(l)] = heuristic_from_layer(g, l);

  std::priority_queue<NodePtr, std::vector<NodePtr>, detail::SearchNodeCompare>
    frontier;
  std::set<std::pair<std::size_t, TopicSet>> closed;

  {
    auto root = std::make_shared<SearchNode>();
    root->vertex = g.start();
    root->provided = g.vertex(g.start()).guarantees;
    root->f = h_layer[layer::start];
    root->ids = {g.vertex(g.start()).id};
    root->path = {g.start()};
    frontier.push(std::move(root));
  }

  int deepest = layer::start;
  while (!frontier.empty())
  {
    const NodePtr top = frontier.top();
    frontier.pop();

    if (!closed.emplace(top->vertex, top->provided).second)
      continue;

    const Vertex& v = g.vertex(top->vertex);
    deepest = std::max(deepest, v.layer);

    if (trace)
      trace->expanded.push_back(
        {top->vertex, top->provided, top->g, h_layer[static_cast<std::size_t>(v.layer)]});

    if (top->vertex == g.end())
      return make_composition(g, top->path);

    for (const auto e_index : g.out_edges(top->vertex))
    {
      const Edge& e = g.edges()[e_index];
      const Vertex& next = g.vertex(e.to);
      if (!detail::covered(next.requirements, top->provided))
        continue;

      auto child = std::make_shared<SearchNode>();
      child->vertex = e.to;
      child->provided = top->provided;
      child->provided.insert(next.guarantees.begin(), next.guarantees.end());
      if (closed.contains({child->vertex, child->provided}))
        continue;

      child->g = top->g + e.weight;
      child->f = child->g + h_layer[static_cast<std::size_t>(next.layer)];
      child->ids = top->ids;
      child->ids.push_back(next.id);
      child->path = top->path;
      child->path.push_back(e.to);
      frontier.push(std::move(child));
    }
  }

  const int blocked = deepest + 1;
  throw InfeasibleError(
    "no feasible composition: no " + std::string(layer_name(blocked)) +
    " vertex (layer " + std::to_string(blocked) +
    ") has its requirements covered by an upstream path", blocked);
}

} // namespace somc

#endif // SOMC__SEARCH_HPP
