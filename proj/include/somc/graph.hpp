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

#ifndef SOMC__GRAPH_HPP
#define SOMC__GRAPH_HPP

#include <somc/errors.hpp>
#include <somc/registry.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace somc {

inline constexpr double min_alpha = 0.1;
inline constexpr double max_alpha = 0.9;

inline void require_alpha_in_range(double alpha)
{
  if (!(alpha >= min_alpha && alpha <= max_alpha))
    throw DomainError(
      "trade-off weight alpha=" + std::to_string(alpha) +
      " outside [0.1, 0.9]");
}

/// Scalarized cost of selecting a service with the given metrics.
inline double edge_weight(
    double alpha, double tau, double epsilon,
    double tau_scale = 1.0, double epsilon_scale = 1.0)
{
  require_alpha_in_range(alpha);
  if (!(tau >= 0.0) || !(epsilon >= 0.0))
    throw DomainError("metrics must be non-negative");
  if (!(tau_scale > 0.0) || !(epsilon_scale > 0.0))
    throw DomainError("normalization scales must be positive");

  return alpha * (tau / tau_scale) + (1.0 - alpha) * (epsilon / epsilon_scale);
}

//==============================================================================
namespace layer {
inline constexpr int start = 1;
inline constexpr int sensor = 2;
inline constexpr int filter = 3;
inline constexpr int controller = 4;
inline constexpr int actuator = 5;
inline constexpr int end = 6;
} // namespace layer

inline constexpr int layer_count = 6;

inline constexpr std::string_view layer_name(int l)
{
  switch (l)
  {
    case layer::start: return "start";
    case layer::sensor: return "sensor";
    case layer::filter: return "filter";
    case layer::controller: return "controller";
    case layer::actuator: return "actuator";
    case layer::end: return "end";
  }
  return "unknown";
}

inline const std::string start_vertex_id = "Start";
inline const std::string end_vertex_id = "End";

struct StartVertex
{
  bool operator==(const StartVertex&) const = default;
};

struct EndVertex
{
  bool operator==(const EndVertex&) const = default;
};

struct SingleService
{
  std::string service;
  bool operator==(const SingleService&) const = default;
};

/// A filter or controller fused with the model it runs on.
struct GroupedService
{
  std::string primary;
  std::string model;
  bool operator==(const GroupedService&) const = default;
};

using VertexPayload =
  std::variant<StartVertex, EndVertex, SingleService, GroupedService>;

struct Vertex
{
  std::string id;
  VertexPayload payload;
  int layer = 0;
  double tau = 0.0;
  double epsilon = 0.0;

  /// Union of the guarantees of the member services.
  TopicSet guarantees;

  /// Requirements of the member services that the vertex does not satisfy
  /// by itself. A grouped vertex covers its primary's model requirement.
  TopicSet requirements;

  std::vector<std::string> service_ids() const
  {
    if (const auto* s = std::get_if<SingleService>(&payload))
      return {s->service};
    if (const auto* g = std::get_if<GroupedService>(&payload))
      return {g->primary, g->model};
    return {};
  }

  bool operator==(const Vertex&) const = default;
};

struct Edge
{
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

struct Scales
{
  double tau = 1.0;
  double epsilon = 1.0;

  bool operator==(const Scales&) const = default;
};

inline constexpr double scale_floor = 1e-12;

//==============================================================================
/// (tau, epsilon) of a filter-or-controller grouped with a model.
///
/// Execution times add. The inaccuracy is the end-to-end value measured for
/// the pair once one exists; before that the sum of both services' values
/// serves as the estimate.
inline std::pair<double, double> combined_vertex_metrics(
    const Service& primary, const Service& model,
    std::optional<PairMetrics> measured = std::nullopt)
{
  const double tau = primary.metrics.tau + model.metrics.tau;
  if (measured && measured->sample_count > 0)
    return {tau, measured->epsilon};
  return {tau, primary.metrics.epsilon + model.metrics.epsilon};
}

//==============================================================================
/// Layered DAG Start -> sensors -> filters -> controllers -> actuators -> End.
///
/// Vertices are stored sorted by (layer, id). Edges only join consecutive
/// layers and carry the cost of choosing their destination vertex.
class WeightedServiceGraph
{
public:
  const std::vector<Vertex>& vertices() const { return _vertices; }
  const std::vector<Edge>& edges() const { return _edges; }
  const Vertex& vertex(std::size_t i) const { return _vertices.at(i); }
  double alpha() const { return _alpha; }
  const Scales& scales() const { return _scales; }

  std::size_t start() const { return 0; }
  std::size_t end() const { return _vertices.size() - 1; }

  /// Indices into edges() of the edges leaving vertex @p v.
  std::span<const std::size_t> out_edges(std::size_t v) const
  {
    return _out.at(v);
  }

  /// Vertex indices of layer @p l (1-based), sorted by id.
  std::span<const std::size_t> layer_vertices(int l) const
  {
    return _layers.at(static_cast<std::size_t>(l - 1));
  }

  std::optional<std::size_t> find(const std::string& id) const
  {
    for (std::size_t i = 0; i < _vertices.size(); ++i)
    {
      if (_vertices[i].id == id)
        return i;
    }
    return std::nullopt;
  }

  std::optional<double> edge_weight_between(std::size_t u, std::size_t v) const
  {
    for (const auto e : _out.at(u))
    {
      if (_edges[e].to == v)
        return _edges[e].weight;
    }
    return std::nullopt;
  }

  bool operator==(const WeightedServiceGraph&) const = default;

  /// Assembles a graph from explicit vertices. Edges are derived from layer
  /// adjacency and topic compatibility; weights from the vertex metrics.
  static WeightedServiceGraph from_vertices(
      std::vector<Vertex> vertices, double alpha)
  {
    require_alpha_in_range(alpha);

    std::stable_sort(vertices.begin(), vertices.end(),
      [](const Vertex& a, const Vertex& b)
      {
        if (a.layer != b.layer)
          return a.layer < b.layer;
        return a.id < b.id;
      });

    WeightedServiceGraph g;
    g._vertices = std::move(vertices);
    g._layers.assign(layer_count, {});
    for (std::size_t i = 0; i < g._vertices.size(); ++i)
    {
      const int l = g._vertices[i].layer;
      if (l < 1 || l > layer_count)
        throw ConstructionError(
          "vertex '" + g._vertices[i].id + "' has invalid layer");
      g._layers[static_cast<std::size_t>(l - 1)].push_back(i);
    }

    for (int l = 1; l <= layer_count; ++l)
    {
      if (g._layers[static_cast<std::size_t>(l - 1)].empty())
        throw ConstructionError(
          "service graph layer " + std::to_string(l) + " (" +
          std::string(layer_name(l)) + ") is empty");
    }
    if (g._layers.front().size() != 1 || g._layers.back().size() != 1)
      throw ConstructionError("Start and End must be unique");

    double tau_max = 0.0;
    double eps_max = 0.0;
    for (const auto& v : g._vertices)
    {
      tau_max = std::max(tau_max, v.tau);
      eps_max = std::max(eps_max, v.epsilon);
    }
    g._scales = {std::max(tau_max, scale_floor), std::max(eps_max, scale_floor)};

    g._out.assign(g._vertices.size(), {});
    for (int l = 1; l < layer_count; ++l)
    {
      for (const auto u : g._layers[static_cast<std::size_t>(l - 1)])
      {
        for (const auto v : g._layers[static_cast<std::size_t>(l)])
        {
          if (!compatible(g._vertices[u], g._vertices[v]))
            continue;
          g._out[u].push_back(g._edges.size());
          g._edges.push_back({u, v, 0.0});
        }
      }
    }

    g.apply_weights(alpha);
    return g;
  }

  /// Same topology, every edge weight recomputed for @p alpha.
  WeightedServiceGraph reweighted(double alpha) const
  {
    require_alpha_in_range(alpha);
    WeightedServiceGraph g = *this;
    g.apply_weights(alpha);
    return g;
  }

private:
  std::vector<Vertex> _vertices;
  std::vector<Edge> _edges;
  std::vector<std::vector<std::size_t>> _out;
  std::vector<std::vector<std::size_t>> _layers;
  double _alpha = 0.5;
  Scales _scales;

  // Start feeds every sensor and every actuator feeds End unconditionally.
  // Between service layers an edge needs G_u and R_v to overlap; a vertex
  // without external requirements accepts any predecessor.
  static bool compatible(const Vertex& u, const Vertex& v)
  {
    if (u.layer == layer::start || v.layer == layer::end)
      return true;
    if (v.requirements.empty())
      return true;
    return std::any_of(u.guarantees.begin(), u.guarantees.end(),
      [&](const TopicId& t) { return v.requirements.contains(t); });
  }

  void apply_weights(double alpha)
  {
    _alpha = alpha;
    for (auto& e : _edges)
    {
      const Vertex& v = _vertices[e.to];
      e.weight = edge_weight(alpha, v.tau, v.epsilon, _scales.tau, _scales.epsilon);
    }
  }
};

//==============================================================================
namespace detail {

inline Vertex single_vertex(const Service& s, int l)
{
  return Vertex{
    s.id, SingleService{s.id}, l, s.metrics.tau, s.metrics.epsilon,
    s.guarantees, s.requirements};
}

inline Vertex grouped_vertex(
    const Registry& registry, const Service& primary, const Service& model,
    int l)
{
  const auto [tau, eps] = combined_vertex_metrics(
    primary, model, registry.pair_metrics(primary.id, model.id));

  TopicSet guarantees = primary.guarantees;
  guarantees.insert(model.guarantees.begin(), model.guarantees.end());

  TopicSet requirements;
  for (const auto& r : primary.requirements)
  {
    if (!model.guarantees.contains(r))
      requirements.insert(r);
  }
  for (const auto& r : model.requirements)
  {
    if (!primary.guarantees.contains(r))
      requirements.insert(r);
  }

  return Vertex{
    primary.id + "+" + model.id, GroupedService{primary.id, model.id}, l,
    tau, eps, std::move(guarantees), std::move(requirements)};
}

inline void add_model_layer(
    const Registry& registry, ServiceKind kind, int l,
    const std::vector<Service>& models, std::vector<Vertex>& out)
{
  for (const auto& s : registry.select_by_kind(kind))
  {
    if (!s.needs_model())
    {
      out.push_back(single_vertex(s, l));
      continue;
    }

    if (models.empty())
      throw ConstructionError(
        std::string(to_string(kind)) + " '" + s.id +
        "' requires a model but the registry has none");

    for (const auto& m : models)
      out.push_back(grouped_vertex(registry, s, m, l));
  }
}

} // namespace detail

/// Builds the weighted service graph of a registry snapshot.
///
/// Model-based filters and controllers are expanded into one grouped vertex
/// per available model. Process services never enter the graph.
inline WeightedServiceGraph create_service_graph(
    const Registry& registry, double alpha)
{
  require_alpha_in_range(alpha);

  const auto models = registry.select_by_kind(ServiceKind::Model);

  std::vector<Vertex> vertices;
  vertices.push_back(
    Vertex{start_vertex_id, StartVertex{}, layer::start, 0.0, 0.0, {}, {}});

  for (const auto& s : registry.select_by_kind(ServiceKind::Sensor))
    vertices.push_back(detail::single_vertex(s, layer::sensor));

  detail::add_model_layer(
    registry, ServiceKind::Filter, layer::filter, models, vertices);
  detail::add_model_layer(
    registry, ServiceKind::Controller, layer::controller, models, vertices);

  for (const auto& s : registry.select_by_kind(ServiceKind::Actuator))
    vertices.push_back(detail::single_vertex(s, layer::actuator));

  vertices.push_back(
    Vertex{end_vertex_id, EndVertex{}, layer::end, 0.0, 0.0, {}, {}});

  return WeightedServiceGraph::from_vertices(std::move(vertices), alpha);
}

inline WeightedServiceGraph reweight(
    const WeightedServiceGraph& graph, double alpha)
{
  return graph.reweighted(alpha);
}

} // namespace somc

#endif // SOMC__GRAPH_HPP
