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

#include <somc/registry.hpp>
#include <somc/harness/scenario.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace somc;

namespace {

Service make(std::string id, ServiceKind kind, double tau = 1.0, double eps = 0.1)
{
  return {std::move(id), kind, topics({"t"}), {}, Metrics::initial(tau, eps)};
}

Registry case_study()
{
  return harness::load_scenario(SOMC_SCENARIO_DIR "/case_study.yaml").registry;
}

} // namespace

TEST(Registry, AddToEmptyGivesSizeOne)
{
  const auto up = add_service(Registry{}, make("s1", ServiceKind::Sensor));
  EXPECT_EQ(up.registry.size(), 1u);
  EXPECT_TRUE(up.registry.contains("s1"));
  EXPECT_EQ(up.event.type, ChangeEvent::Type::Added);
  EXPECT_EQ(up.event.service_id, "s1");
}

TEST(Registry, DuplicateIdRejected)
{
  const auto r = add_service(Registry{}, make("s1", ServiceKind::Sensor)).registry;
  EXPECT_THROW(add_service(r, make("s1", ServiceKind::Sensor)), DuplicateIdError);
}

TEST(Registry, SecondServiceEmitsOneEvent)
{
  const auto r1 = add_service(Registry{}, make("s1", ServiceKind::Sensor)).registry;
  const auto up = add_service(r1, make("f1", ServiceKind::Filter));
  EXPECT_EQ(up.registry.size(), 2u);
  EXPECT_EQ(up.registry.revision(), r1.revision() + 1);
  EXPECT_EQ(up.event.revision, up.registry.revision());
  EXPECT_EQ(r1.size(), 1u);
}

TEST(Registry, ServiceNeedsAGuarantee)
{
  Service s = make("s1", ServiceKind::Sensor);
  s.guarantees.clear();
  EXPECT_THROW(add_service(Registry{}, s), DomainError);
}

TEST(Registry, NeedsModelFollowsRequirements)
{
  Service s = make("k", ServiceKind::Filter);
  EXPECT_FALSE(s.needs_model());
  s.requirements.insert(model_topic);
  EXPECT_TRUE(s.needs_model());
}

TEST(UpdateMetrics, RunningMeanOfTwo)
{
  auto r = add_service(Registry{}, make("s", ServiceKind::Sensor, 3.0)).registry;
  r = update_metrics(r, "s", 10.0, 0.1).registry;
  r = update_metrics(r, "s", 20.0, 0.2).registry;
  EXPECT_DOUBLE_EQ(r.at("s").metrics.tau, 15.0);
  EXPECT_DOUBLE_EQ(r.at("s").metrics.epsilon, 0.2);
  EXPECT_EQ(r.at("s").metrics.sample_count, 2u);
}

TEST(UpdateMetrics, EqualSampleKeepsInitial)
{
  auto r = add_service(Registry{}, make("s", ServiceKind::Sensor, 5.0)).registry;
  EXPECT_EQ(r.at("s").metrics.sample_count, 0u);
  r = update_metrics(r, "s", 5.0, 0.1).registry;
  EXPECT_DOUBLE_EQ(r.at("s").metrics.tau, 5.0);
}

TEST(UpdateMetrics, ThreeSamples)
{
  auto r = add_service(Registry{}, make("s", ServiceKind::Sensor)).registry;
  for (const double x : {10.0, 20.0, 30.0})
    r = update_metrics(r, "s", x, 0.0).registry;
  EXPECT_DOUBLE_EQ(r.at("s").metrics.tau, 20.0);
}

TEST(UpdateMetrics, Errors)
{
  const auto r = add_service(Registry{}, make("s", ServiceKind::Sensor)).registry;
  EXPECT_THROW(update_metrics(r, "nope", 1.0, 0.0), NotFoundError);
  EXPECT_THROW(update_metrics(r, "s", -1.0, 0.0), DomainError);
  EXPECT_THROW(update_metrics(r, "s", 1.0, -0.1), DomainError);
}

TEST(UpdateMetrics, RunningMeanProperty)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(0.0, 50.0);
  auto r = add_service(Registry{}, make("s", ServiceKind::Sensor)).registry;
  std::vector<double> xs;
  for (int i = 0; i < 500; ++i)
  {
    xs.push_back(d(rng));
    r = update_metrics(r, "s", xs.back(), 0.0).registry;
  }
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  EXPECT_NEAR(r.at("s").metrics.tau, mean, 1e-9 * mean);
}

TEST(UpdateMetrics, EveryUpdateIsOneEvent)
{
  auto r = add_service(Registry{}, make("s", ServiceKind::Sensor)).registry;
  const auto rev = r.revision();
  const auto up = update_metrics(r, "s", 2.0, 0.0);
  EXPECT_EQ(up.event.type, ChangeEvent::Type::Updated);
  EXPECT_EQ(up.registry.revision(), rev + 1);
  const auto rm = remove_service(up.registry, "s");
  EXPECT_EQ(rm.event.type, ChangeEvent::Type::Removed);
  EXPECT_EQ(rm.registry.revision(), rev + 2);
  EXPECT_FALSE(rm.registry.contains("s"));
}

TEST(SelectByKind, CaseStudyControllers)
{
  const auto c = select_by_kind(case_study(), ServiceKind::Controller);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].id, "mpc");
  EXPECT_EQ(c[1].id, "pid");
}

TEST(SelectByKind, Empty)
{
  EXPECT_TRUE(select_by_kind(Registry{}, ServiceKind::Sensor).empty());
}

TEST(SelectByKind, CaseStudyHasThreeModels)
{
  EXPECT_EQ(select_by_kind(case_study(), ServiceKind::Model).size(), 3u);
}

TEST(SelectByKind, KindsPartitionTheRegistry)
{
  const Registry r = case_study();
  std::size_t total = 0;
  std::set<std::string> seen;
  for (const auto k : all_service_kinds)
  {
    for (const auto& s : select_by_kind(r, k))
    {
      EXPECT_EQ(s.kind, k);
      EXPECT_TRUE(seen.insert(s.id).second);
      ++total;
    }
  }
  EXPECT_EQ(total, r.size());
}

TEST(Registry, PairEpsilonDroppedWithService)
{
  auto r = add_service(Registry{}, make("k", ServiceKind::Filter)).registry;
  r = add_service(r, make("m", ServiceKind::Model)).registry;
  r = r.with_pair_epsilon("k", "m", 0.25).registry;
  ASSERT_TRUE(r.pair_metrics("k", "m"));
  EXPECT_DOUBLE_EQ(r.pair_metrics("k", "m")->epsilon, 0.25);
  r = remove_service(r, "m").registry;
  EXPECT_FALSE(r.pair_metrics("k", "m"));
}
