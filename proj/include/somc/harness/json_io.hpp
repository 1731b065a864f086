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

#ifndef SOMC__HARNESS__JSON_IO_HPP
#define SOMC__HARNESS__JSON_IO_HPP

#include <somc/errors.hpp>
#include <somc/graph.hpp>
#include <somc/search.hpp>
#include <somc/plantlab/episode.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace somc::harness {

using Json = nlohmann::ordered_json;

inline Json to_json(const WeightedServiceGraph& g)
{
  Json vertices = Json::array();
  for (const auto& v : g.vertices())
  {
    Json req = Json::array();
    for (const auto& t : v.requirements)
      req.push_back(t.name);
    Json gua = Json::array();
    for (const auto& t : v.guarantees)
      gua.push_back(t.name);
    vertices.push_back({
      {"id", v.id},
      {"layer", v.layer},
      {"layer_name", std::string(layer_name(v.layer))},
      {"services", v.service_ids()},
      {"tau", v.tau},
      {"epsilon", v.epsilon},
      {"guarantees", gua},
      {"requirements", req}});
  }

  Json edges = Json::array();
  for (const auto& e : g.edges())
  {
    edges.push_back({
      {"from", g.vertex(e.from).id},
      {"to", g.vertex(e.to).id},
      {"weight", e.weight}});
  }

  return {
    {"alpha", g.alpha()},
    {"scales", {{"tau", g.scales().tau}, {"epsilon", g.scales().epsilon}}},
    {"vertices", vertices},
    {"edges", edges}};
}

inline Json to_json(const WeightedServiceGraph& g, const Composition& c)
{
  Json selected = Json::object();
  for (const auto& [kind, ids] : c.selected)
    selected[std::string(to_string(kind))] = ids;
  return {
    {"alpha", c.alpha},
    {"cost", c.cost},
    {"vertices", c.vertex_ids},
    {"services", c.service_ids(g)},
    {"edge_weights", c.weights},
    {"selected", selected}};
}

/// Rebuilds a composition from its JSON form against @p g. The path must
/// pass the feasibility checker.
inline Composition composition_from_json(const WeightedServiceGraph& g, const Json& j)
{
  std::vector<std::size_t> path;
  try
  {
    for (const auto& id : j.at("vertices"))
    {
      const auto v = g.find(id.get<std::string>());
      if (!v)
        throw ValidationError("composition names unknown vertex '" + id.get<std::string>() + "'");
      path.push_back(*v);
    }
  }
  catch (const nlohmann::json::exception& e)
  {
    throw ValidationError(std::string("malformed composition: ") + e.what());
  }
  if (!is_feasible_path(g, path))
    throw ValidationError("composition is not a feasible path");
  return make_composition(g, path);
}

inline Json summary_json(const plantlab::EpisodeReport& r)
{
  Json times = Json::object();
  for (const auto& [id, samples] : r.service_times)
    times[id] = samples.empty() ? 0.0 : r.mean_service_time(id);

  Json eps = Json::object();
  for (const auto& [id, e] : r.inaccuracies.services)
    eps[id] = e;

  Json pairs = Json::array();
  for (const auto& [key, e] : r.inaccuracies.pairs)
    pairs.push_back({{"service", key.first}, {"model", key.second}, {"epsilon", e}});

  return {
    {"services", r.active.service_ids()},
    {"steps", r.size()},
    {"rmse", r.rmse},
    {"mean_step_time", r.mean_step_time},
    {"estimation_rmse", r.estimation_rmse},
    {"mean_service_time", times},
    {"epsilon", eps},
    {"pair_epsilon", pairs}};
}

} // namespace somc::harness

#endif // SOMC__HARNESS__JSON_IO_HPP
