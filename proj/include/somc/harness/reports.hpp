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

#ifndef SOMC__HARNESS__REPORTS_HPP
#define SOMC__HARNESS__REPORTS_HPP

#include <somc/errors.hpp>
#include <somc/harness/json_io.hpp>
#include <somc/harness/learning_loop.hpp>

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace somc::harness {

inline const std::string trace_csv_header =
  "iteration,phase,criterion,current_state,reference,alpha,reorchestrated,"
  "composition,f_value,rmse,computation_time";

inline const std::string summary_csv_header =
  "alpha,controller,filter,rmse,computation_time";

inline const std::string episode_csv_header =
  "step,time,reference,true_velocity,measured,estimated,command,applied,step_time";

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out)
    throw Error("failed writing '" + path.string() + "'");
}

inline std::string join(const std::vector<std::string>& items, char sep)
{
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i)
  {
    if (i)
      out += sep;
    out += items[i];
  }
  return out;
}

} // namespace detail

inline std::string episode_csv(const plantlab::EpisodeReport& r)
{
  std::string out = episode_csv_header + "\n";
  for (std::size_t k = 0; k < r.size(); ++k)
  {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n",
      k, r.time[k], r.reference[k], r.true_velocity[k], r.measured[k],
      r.estimated[k], r.command[k], r.applied[k], r.step_times[k]);
  }
  return out;
}

inline std::string trace_csv(const RunTrace& trace)
{
  std::string out = trace_csv_header + "\n";
  for (const auto& r : trace.records)
  {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n",
      r.iteration, r.phase, to_string(r.criterion), r.context.current_state,
      r.context.reference, r.alpha, r.reorchestrated ? 1 : 0,
      detail::join(r.episode.active.service_ids(), ' '),
      r.f_value, r.rmse, r.mean_step_time);
  }
  return out;
}

inline std::string summary_csv(const RunTrace& trace)
{
  std::string out = summary_csv_header + "\n";
  for (const auto& r : trace.records)
  {
    out += fmt::format("{},{},{},{},{}\n",
      r.alpha, r.composition.vertex_at(layer::controller),
      r.composition.vertex_at(layer::filter), r.rmse, r.mean_step_time);
  }
  return out;
}

/// Writes trace.csv, summary.csv and per-iteration episode CSV, episode
/// summary JSON and composition JSON files under @p out_dir.
inline std::vector<std::filesystem::path> emit_reports(
    const RunTrace& trace, const std::filesystem::path& out_dir)
{
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "episodes");
  fs::create_directories(out_dir / "compositions");

  std::vector<fs::path> written;
  const auto put = [&](const fs::path& p, const std::string& content)
    {
      detail::write_file(p, content);
      written.push_back(p);
    };

  put(out_dir / "trace.csv", trace_csv(trace));
  put(out_dir / "summary.csv", summary_csv(trace));

  for (const auto& r : trace.records)
  {
    const std::string stem = fmt::format("{:04d}", r.iteration);
    put(out_dir / "episodes" / ("episode_" + stem + ".csv"), episode_csv(r.episode));
    put(out_dir / "episodes" / ("episode_" + stem + ".json"),
      summary_json(r.episode).dump(2) + "\n");
    put(out_dir / "compositions" / ("composition_" + stem + ".json"),
      to_json(r.graph, r.composition).dump(2) + "\n");
  }
  return written;
}

} // namespace somc::harness

#endif // SOMC__HARNESS__REPORTS_HPP
