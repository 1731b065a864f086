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

#include <somc/graph.hpp>
#include <somc/search.hpp>
#include <somc/harness/learning_loop.hpp>
#include <somc/harness/scenario.hpp>

#include <gtest/gtest.h>

using namespace somc;

namespace {

harness::Scenario scenario()
{
  return harness::load_scenario(SOMC_SCENARIO_DIR "/case_study.yaml");
}

Service svc(std::string id, ServiceKind kind, TopicSet g, TopicSet r,
  double tau = 1.0, double eps = 1.0)
{
  return {std::move(id), kind, std::move(g), std::move(r), Metrics::initial(tau, eps)};
}

Registry chain()
{
  Registry r;
  r = add_service(r, svc("s", ServiceKind::Sensor, topics({"y"}), {}, 1, 0.5)).registry;
  r = add_service(r, svc("f", ServiceKind::Filter, topics({"x"}), topics({"y"}), 2, 0.25)).registry;
  r = add_service(r, svc("c", ServiceKind::Controller, topics({"u"}), topics({"x"}), 4, 1)).registry;
  r = add_service(r, svc("a", ServiceKind::Actuator, topics({"act"}), topics({"u"}), 0.5, 0.1)).registry;
  return r;
}

} // namespace

TEST(EdgeWeight, Examples)
{
  EXPECT_DOUBLE_EQ(edge_weight(0.5, 2.0, 4.0, 1.0, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(edge_weight(0.1, 10.0, 0.0, 1.0, 1.0), 1.0);
  EXPECT_THROW(edge_weight(0.0, 1.0, 1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(edge_weight(0.95, 1.0, 1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(edge_weight(0.5, -1.0, 1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(edge_weight(0.5, 1.0, 1.0, 0.0, 1.0), DomainError);
}

TEST(EdgeWeight, AffineInAlpha)
{
  const double tau = 3.0, eps = 0.7, ts = 5.0, es = 2.0;
  const double a = edge_weight(0.1, tau, eps, ts, es);
  const double b = edge_weight(0.5, tau, eps, ts, es);
  const double c = edge_weight(0.9, tau, eps, ts, es);
  EXPECT_NEAR((b - a) / 0.4, (c - b) / 0.4, 1e-12);
  EXPECT_NEAR((c - a) / 0.8, tau / ts - eps / es, 1e-12);
}

TEST(CreateServiceGraph, CaseStudyHasFourteenVertices)
{
  const auto g = create_service_graph(scenario().registry, 0.5);
  EXPECT_EQ(g.vertices().size(), 14u);
  EXPECT_EQ(g.layer_vertices(layer::start).size(), 1u);
  EXPECT_EQ(g.layer_vertices(layer::sensor).size(), 2u);
  EXPECT_EQ(g.layer_vertices(layer::filter).size(), 4u);
  EXPECT_EQ(g.layer_vertices(layer::controller).size(), 4u);
  EXPECT_EQ(g.layer_vertices(layer::actuator).size(), 2u);
  EXPECT_EQ(g.layer_vertices(layer::end).size(), 1u);
  EXPECT_TRUE(g.find("kalman+multi_body"));
  EXPECT_TRUE(g.find("mpc+point_mass"));
  EXPECT_TRUE(g.find("dummy"));
  EXPECT_FALSE(g.find("kalman"));
}

TEST(CreateServiceGraph, TwoModelsGiveTwoGroupedVerticesPerRole)
{
  Registry r;
  for (const auto* s : {"s1", "s2"})
    r = add_service(r, svc(s, ServiceKind::Sensor, topics({"y"}), {})).registry;
  for (const auto* m : {"m1", "m2"})
    r = add_service(r, svc(m, ServiceKind::Model, topics({"model"}), {})).registry;
  r = add_service(r, svc("f", ServiceKind::Filter, topics({"x"}), topics({"y", "model"}))).registry;
  r = add_service(r, svc("c", ServiceKind::Controller, topics({"u"}), topics({"x", "model"}))).registry;
  for (const auto* a : {"a1", "a2"})
    r = add_service(r, svc(a, ServiceKind::Actuator, topics({"act"}), topics({"u"}))).registry;

  const auto g = create_service_graph(r, 0.5);
  EXPECT_EQ(g.layer_vertices(layer::filter).size(), 2u);
  EXPECT_EQ(g.layer_vertices(layer::controller).size(), 2u);
  for (const auto v : g.layer_vertices(layer::filter))
    EXPECT_TRUE(std::holds_alternative<GroupedService>(g.vertex(v).payload));
}

TEST(CreateServiceGraph, SingleChain)
{
  const auto g = create_service_graph(chain(), 0.5);
  EXPECT_EQ(g.vertices().size(), 6u);
  EXPECT_EQ(g.edges().size(), 5u);
  const auto c = astar(g);
  EXPECT_EQ(c.vertex_ids,
    (std::vector<std::string>{"Start", "s", "f", "c", "a", "End"}));
}

TEST(CreateServiceGraph, EmptyLayerIsAnError)
{
  Registry r = chain();
  r = remove_service(r, "a").registry;
  EXPECT_THROW(create_service_graph(r, 0.5), ConstructionError);
}

TEST(CreateServiceGraph, MissingModelIsAnError)
{
  Registry r = chain();
  r = remove_service(r, "f").registry;
  r = add_service(r, svc("k", ServiceKind::Filter, topics({"x"}), topics({"y", "model"}))).registry;
  EXPECT_THROW(create_service_graph(r, 0.5), ConstructionError);
}

TEST(CreateServiceGraph, ProcessServicesStayOut)
{
  Registry r = chain();
  r = add_service(r, svc("p", ServiceKind::Process, topics({"ref"}), {})).registry;
  const auto g = create_service_graph(r, 0.5);
  EXPECT_FALSE(g.find("p"));
  EXPECT_EQ(g.vertices().size(), 6u);
}

TEST(CreateServiceGraph, Invariants)
{
  const auto g = create_service_graph(scenario().registry, 0.3);
  EXPECT_EQ(g.vertex(g.start()).tau, 0.0);
  EXPECT_EQ(g.vertex(g.end()).epsilon, 0.0);
  for (const auto& e : g.edges())
  {
    EXPECT_EQ(g.vertex(e.to).layer, g.vertex(e.from).layer + 1);
    EXPECT_GE(e.weight, 0.0);
    EXPECT_FALSE(g.vertex(e.from).layer == layer::actuator &&
      g.vertex(e.to).layer == layer::filter);
    const auto& v = g.vertex(e.to);
    EXPECT_DOUBLE_EQ(e.weight,
      edge_weight(0.3, v.tau, v.epsilon, g.scales().tau, g.scales().epsilon));
  }
}

TEST(CreateServiceGraph, ScalesAreVertexMaxima)
{
  const auto g = create_service_graph(chain(), 0.5);
  EXPECT_DOUBLE_EQ(g.scales().tau, 4.0);
  EXPECT_DOUBLE_EQ(g.scales().epsilon, 1.0);
}

TEST(CreateServiceGraph, Deterministic)
{
  const auto r = scenario().registry;
  EXPECT_EQ(create_service_graph(r, 0.4), create_service_graph(r, 0.4));
}

TEST(CreateServiceGraph, EdgesNeedTopicOverlap)
{
  Registry r = chain();
  r = add_service(r, svc("c2", ServiceKind::Controller, topics({"w"}), topics({"q"}))).registry;
  const auto g = create_service_graph(r, 0.5);
  const auto f = *g.find("f");
  const auto c2 = *g.find("c2");
  EXPECT_FALSE(g.edge_weight_between(f, c2));
  EXPECT_TRUE(g.edge_weight_between(f, *g.find("c")));
}

TEST(Reweight, SameAlphaUnchanged)
{
  const auto g = create_service_graph(scenario().registry, 0.5);
  EXPECT_EQ(reweight(g, 0.5), g);
  EXPECT_THROW(reweight(g, 0.05), DomainError);
}

TEST(Reweight, NormalizedUnitVertexKeepsWeightOne)
{
  // The controller carries both maxima, so its normalized metrics are (1, 1).
  const auto g = create_service_graph(chain(), 0.5);
  const auto w = [](const WeightedServiceGraph& h)
    { return *h.edge_weight_between(*h.find("f"), *h.find("c")); };
  EXPECT_DOUBLE_EQ(w(g), 1.0);
  EXPECT_DOUBLE_EQ(w(reweight(g, 0.9)), 1.0);
}

TEST(Reweight, ZeroTauIsLinear)
{
  Registry r = chain();
  r = remove_service(r, "s").registry;
  r = add_service(r, svc("s", ServiceKind::Sensor, topics({"y"}), {}, 0.0, 1.0)).registry;
  const auto g = create_service_graph(r, 0.5);
  const auto w = [](const WeightedServiceGraph& h)
    { return *h.edge_weight_between(h.start(), *h.find("s")); };
  EXPECT_DOUBLE_EQ(w(g), 0.5);
  EXPECT_NEAR(w(reweight(g, 0.9)), 0.1, 1e-15);
}

TEST(CombinedVertexMetrics, TauAdds)
{
  const Service p = svc("k", ServiceKind::Filter, topics({"x"}), topics({"model"}), 5.0, 0.1);
  const Service m = svc("m", ServiceKind::Model, topics({"model"}), {}, 3.0, 0.2);
  const auto [tau, eps] = combined_vertex_metrics(p, m);
  EXPECT_DOUBLE_EQ(tau, 8.0);
  EXPECT_NEAR(eps, 0.3, 1e-15);
}

TEST(CombinedVertexMetrics, MeasuredPairOverrides)
{
  const Service p = svc("k", ServiceKind::Filter, topics({"x"}), topics({"model"}), 5.0, 0.1);
  const Service m = svc("m", ServiceKind::Model, topics({"model"}), {}, 3.0, 0.2);
  EXPECT_DOUBLE_EQ(combined_vertex_metrics(p, m, PairMetrics{0.25, 1}).second, 0.25);
  EXPECT_NEAR(combined_vertex_metrics(p, m, PairMetrics{0.25, 0}).second, 0.3, 1e-15);
}

TEST(CombinedVertexMetrics, EpisodePairValueReachesTheGraph)
{
  const auto s = scenario();
  const auto rec = harness::evaluate_at(
    s, s.registry, 0.5, {1, 6}, Criterion::TrackingError, 3);
  ASSERT_TRUE(rec.episode.active.filter_model);
  const auto& a = rec.episode.active;
  const double measured = rec.episode.inaccuracies.pairs.at({a.filter, *a.filter_model});

  const Registry r = harness::record_episode_metrics(s.registry, rec.episode);
  const auto g = create_service_graph(r, 0.5);
  const auto v = g.vertex(*g.find(a.filter + "+" + *a.filter_model));
  EXPECT_DOUBLE_EQ(v.epsilon, measured);
  EXPECT_NE(measured, r.at(a.filter).metrics.epsilon + r.at(*a.filter_model).metrics.epsilon);
}
