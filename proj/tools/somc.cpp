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

#include <somc/orchestrate.hpp>
#include <somc/random_instances.hpp>
#include <somc/harness/json_io.hpp>
#include <somc/harness/learning_loop.hpp>
#include <somc/harness/reports.hpp>
#include <somc/harness/scenario.hpp>
#include <somc/harness/sweep.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int exit_validation = 2;
constexpr int exit_infeasible = 3;

using namespace somc;
using namespace somc::harness;

int cmd_run(const std::string& path, const std::string& out_dir,
  std::optional<std::uint64_t> seed, const std::string& timing)
{
  Scenario s = load_scenario(path);
  if (seed)
  {
    s.seed = *seed;
    s.tuner.seed = *seed;
  }
  if (!timing.empty())
  {
    const auto mode = plantlab::parse_timing_mode(timing);
    if (!mode)
      throw ValidationError("--timing must be 'synthetic' or 'wallclock'");
    s.timing = *mode;
  }

  const RunTrace trace = run_learning_loop(s, [](const IterationRecord& r)
    {
      std::cerr << fmt::format("[{:3d}] {:<16} alpha={:.2f} F={:.4g} {}\n",
        r.iteration, to_string(r.criterion), r.alpha, r.f_value,
        harness::detail::join(r.episode.active.service_ids(), ' '));
    });
  emit_reports(trace, out_dir);
  std::cout << fmt::format("{} iterations written to {}\n", trace.records.size(), out_dir);
  return 0;
}

int cmd_orchestrate(const std::string& path, double alpha, bool dump_graph)
{
  const Scenario s = load_scenario(path);
  require_alpha_in_range(alpha);
  const Orchestration o = orchestrate_at(s.registry, alpha);
  if (dump_graph)
    std::cout << Json{{"graph", to_json(o.graph)},
      {"composition", to_json(o.graph, o.composition)}}.dump(2) << "\n";
  else
    std::cout << to_json(o.graph, o.composition).dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& grid_spec)
{
  const Scenario s = load_scenario(path);
  const auto grid = parse_grid(grid_spec);
  const auto rows = sweep_alpha(s, grid);
  std::cout << "alpha,controller,filter,f_value,rmse,computation_time\n";
  for (const auto& r : rows)
  {
    std::cout << fmt::format("{},{},{},{},{},{}\n", r.alpha,
      r.composition.vertex_at(layer::controller), r.composition.vertex_at(layer::filter),
      r.f_value, r.rmse, r.mean_step_time);
  }
  return 0;
}

int cmd_oracle_check(std::size_t instances, std::uint64_t seed)
{
  const auto res = run_oracle_check(instances, seed);
  for (const auto& f : res.failures)
    std::cerr << f << "\n";
  std::cout << fmt::format(
    "instances={} feasible={} infeasible={} mismatches={} inadmissible={}\n",
    res.instances, res.feasible, res.infeasible, res.mismatches,
    res.admissibility_violations);
  return res.mismatches == 0 && res.admissibility_violations == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Service-oriented control loop orchestration"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::string timing;
  auto* run = app.add_subcommand("run", "Run the learning loop and write reports");
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--timing", timing, "synthetic or wallclock");

  double alpha = 0.5;
  bool dump_graph = false;
  auto* orch = app.add_subcommand("orchestrate", "Print the optimal composition for a weight");
  orch->add_option("scenario", scenario, "Scenario file")->required();
  orch->add_option("--alpha", alpha, "Trade-off weight in [0.1, 0.9]")->required();
  orch->add_flag("--dump-graph", dump_graph, "Also print the weighted service graph");

  std::string grid = "0.1:0.9:0.1";
  auto* sweep = app.add_subcommand("sweep-alpha", "Evaluate one episode per weight");
  sweep->add_option("scenario", scenario, "Scenario file")->required();
  sweep->add_option("--grid", grid, "lo:hi:step");

  std::size_t instances = 200;
  std::uint64_t oracle_seed = 0;
  auto* oracle = app.add_subcommand("oracle-check", "Compare A* against exhaustive search");
  oracle->add_option("--instances", instances, "Number of random graphs");
  oracle->add_option("--seed", oracle_seed, "Generator seed");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_validation;
  }

  try
  {
    if (*run)
      return cmd_run(scenario, out_dir, seed, timing);
    if (*orch)
      return cmd_orchestrate(scenario, alpha, dump_graph);
    if (*sweep)
      return cmd_sweep(scenario, grid);
    if (*oracle)
      return cmd_oracle_check(instances, oracle_seed);
  }
  catch (const InfeasibleError& e)
  {
    std::cerr << "infeasible: " << e.what() << "\n";
    return exit_infeasible;
  }
  catch (const ValidationError& e)
  {
    std::cerr << "invalid: " << e.what() << "\n";
    return exit_validation;
  }
  catch (const DomainError& e)
  {
    std::cerr << "invalid: " << e.what() << "\n";
    return exit_validation;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
