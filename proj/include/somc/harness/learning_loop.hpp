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

#ifndef SOMC__HARNESS__LEARNING_LOOP_HPP
#define SOMC__HARNESS__LEARNING_LOOP_HPP

#include <somc/errors.hpp>
#include <somc/orchestrate.hpp>
#include <somc/registry.hpp>
#include <somc/search.hpp>
#include <somc/tuner.hpp>
#include <somc/harness/scenario.hpp>
#include <somc/plantlab/episode.hpp>

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace somc::harness {

struct IterationRecord
{
  std::size_t iteration = 0;
  std::size_t phase = 0;
  Context context;
  Criterion criterion = Criterion::TrackingError;
  double alpha = 0.5;
  bool reorchestrated = false;

  WeightedServiceGraph graph;
  Composition composition;
  plantlab::EpisodeReport episode;

  double f_value = 0.0;
  double rmse = 0.0;
  double mean_step_time = 0.0;
};

struct RunTrace
{
  std::vector<IterationRecord> records;
  Registry final_registry;
};

inline std::uint64_t episode_seed(std::uint64_t seed, std::size_t iteration)
{
  // splitmix64 finalizer over (seed, iteration).
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(iteration) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline plantlab::EpisodeSettings episode_settings(
    const Scenario& s, const Context& context, std::uint64_t seed)
{
  plantlab::EpisodeSettings e;
  e.initial_velocity = context.current_state;
  e.reference = context.reference;
  e.seed = seed;
  e.timing = s.timing;
  e.timing_jitter = s.timing_jitter;
  return e;
}

/// Feeds one episode's measurements back into the registry.
///
/// Every service in the loop gets one execution-time sample (its mean over
/// the episode). Model-based filters and controllers have no standalone
/// inaccuracy, so only their pair value with the model is updated.
inline Registry record_episode_metrics(
    Registry registry, const plantlab::EpisodeReport& rep)
{
  const auto& a = rep.active;
  const auto& eps = rep.inaccuracies.services;

  const auto sample = [&](const std::string& id, double epsilon)
    {
      registry = update_metrics(registry, id, rep.mean_service_time(id), epsilon).registry;
    };

  sample(a.sensor, eps.at(a.sensor));
  if (a.filter_model)
  {
    sample(a.filter, registry.at(a.filter).metrics.epsilon);
    registry = registry.with_pair_epsilon(
      a.filter, *a.filter_model, rep.inaccuracies.pairs.at({a.filter, *a.filter_model})).registry;
  }
  else
    sample(a.filter, eps.at(a.filter));

  if (a.controller_model)
  {
    sample(a.controller, registry.at(a.controller).metrics.epsilon);
    registry = registry.with_pair_epsilon(
      a.controller, *a.controller_model,
      rep.inaccuracies.pairs.at({a.controller, *a.controller_model})).registry;
  }
  else
    sample(a.controller, eps.at(a.controller));

  std::set<std::string> models;
  if (a.filter_model)
    models.insert(*a.filter_model);
  if (a.controller_model)
    models.insert(*a.controller_model);
  for (const auto& m : models)
    sample(m, eps.at(m));

  sample(a.actuator, eps.at(a.actuator));
  return registry;
}

/// Runs one episode of the composition the registry yields at @p alpha.
inline IterationRecord evaluate_at(
    const Scenario& s, const Registry& registry, double alpha,
    const Context& context, Criterion criterion, std::uint64_t seed)
{
  IterationRecord r;
  r.context = context;
  r.criterion = criterion;
  r.alpha = alpha;
  r.reorchestrated = true;
  Orchestration o = orchestrate_at(registry, alpha);
  r.graph = std::move(o.graph);
  r.composition = std::move(o.composition);
  r.episode = plantlab::run_episode(
    s.lab, plantlab::active_composition(r.graph, r.composition),
    episode_settings(s, context, seed));
  r.f_value = plantlab::evaluate_criterion(r.episode, criterion);
  r.rmse = r.episode.rmse;
  r.mean_step_time = r.episode.mean_step_time;
  return r;
}

/// Suggest, orchestrate, simulate, evaluate, observe and update metrics for
/// every iteration of the scenario's criterion schedule. The tuner carries
/// its last weight over a criterion switch.
inline RunTrace run_learning_loop(
    const Scenario& s,
    const std::function<void(const IterationRecord&)>& on_iteration = {})
{
  RunTrace trace;
  Registry registry = s.registry;
  ContextualBayesTuner tuner(s.tuner);
  Orchestrator orchestrator(
    (max_alpha - min_alpha) / static_cast<double>(s.tuner.grid_points - 1));

  std::size_t iteration = 0;
  for (std::size_t p = 0; p < s.schedule.size(); ++p)
  {
    const Phase& phase = s.schedule[p];
    tuner = tuner.with_criterion(phase.criterion);

    for (std::size_t i = 0; i < phase.iterations; ++i, ++iteration)
    {
      const std::string where = "iteration " + std::to_string(iteration) + ": ";
      IterationRecord r;
      r.iteration = iteration;
      r.phase = p;
      r.context = phase.context;
      r.criterion = phase.criterion;
      r.alpha = s.alpha_override ? *s.alpha_override : tuner.suggest_alpha(phase.context);

      try
      {
        r.reorchestrated = orchestrator.update(registry, r.alpha);
      }
      catch (const InfeasibleError& e)
      {
        throw InfeasibleError(where + e.what(), e.layer());
      }
      catch (const ConstructionError& e)
      {
        throw ConstructionError(where + e.what());
      }
      const Orchestration& active = *orchestrator.active();
      r.graph = active.graph;
      r.composition = active.composition;

      r.episode = plantlab::run_episode(
        s.lab, plantlab::active_composition(r.graph, r.composition),
        episode_settings(s, phase.context, episode_seed(s.seed, iteration)));
      r.f_value = plantlab::evaluate_criterion(r.episode, phase.criterion);
      r.rmse = r.episode.rmse;
      r.mean_step_time = r.episode.mean_step_time;

      tuner = tuner.observed({phase.context, r.alpha, r.f_value, phase.criterion});
      registry = record_episode_metrics(std::move(registry), r.episode);

      if (on_iteration)
        on_iteration(r);
      trace.records.push_back(std::move(r));
    }
  }
  trace.final_registry = registry;
  return trace;
}

} // namespace somc::harness

#endif // SOMC__HARNESS__LEARNING_LOOP_HPP
