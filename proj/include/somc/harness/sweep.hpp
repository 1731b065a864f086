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

#ifndef SOMC__HARNESS__SWEEP_HPP
#define SOMC__HARNESS__SWEEP_HPP

#include <somc/errors.hpp>
#include <somc/graph.hpp>
#include <somc/harness/learning_loop.hpp>

#include <cmath>
#include <future>
#include <string>
#include <vector>

namespace somc::harness {

/// Parses "lo:hi:step" into the inclusive list of points.
inline std::vector<double> parse_grid(const std::string& spec)
{
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  if (b == std::string::npos)
    throw ValidationError("grid must be lo:hi:step, got '" + spec + "'");

  double lo = 0.0, hi = 0.0, step = 0.0;
  try
  {
    lo = std::stod(spec.substr(0, a));
    hi = std::stod(spec.substr(a + 1, b - a - 1));
    step = std::stod(spec.substr(b + 1));
  }
  catch (const std::exception&)
  {
    throw ValidationError("grid must be lo:hi:step, got '" + spec + "'");
  }
  if (!(step > 0.0) || !(hi >= lo))
    throw ValidationError("grid needs step > 0 and hi >= lo");

  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i)
  {
    const double v = std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12;
    require_alpha_in_range(v);
    out.push_back(v);
  }
  return out;
}

/// One episode per grid weight against the scenario's initial registry,
/// under the first phase's context and criterion. Points run in parallel;
/// each has its own registry copy and random stream.
inline std::vector<IterationRecord> sweep_alpha(
    const Scenario& s, const std::vector<double>& grid)
{
  const Context context = s.schedule.empty() ? Context{} : s.schedule.front().context;
  const Criterion criterion =
    s.schedule.empty() ? Criterion::TrackingError : s.schedule.front().criterion;

  std::vector<std::future<IterationRecord>> jobs;
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    jobs.push_back(std::async(std::launch::async, [&s, &grid, context, criterion, i]
      {
        IterationRecord r = evaluate_at(
          s, s.registry, grid[i], context, criterion, episode_seed(s.seed, 0));
        r.iteration = i;
        return r;
      }));
  }

  std::vector<IterationRecord> out;
  for (auto& j : jobs)
    out.push_back(j.get());
  return out;
}

} // namespace somc::harness

#endif // SOMC__HARNESS__SWEEP_HPP
