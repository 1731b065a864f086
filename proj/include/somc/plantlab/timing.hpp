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

#ifndef SOMC__PLANTLAB__TIMING_HPP
#define SOMC__PLANTLAB__TIMING_HPP

#include <somc/errors.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <utility>

namespace somc::plantlab {

enum class TimingMode
{
  Synthetic,
  WallClock
};

inline constexpr std::string_view to_string(TimingMode m)
{
  return m == TimingMode::Synthetic ? "synthetic" : "wallclock";
}

inline std::optional<TimingMode> parse_timing_mode(std::string_view name)
{
  if (name == "synthetic")
    return TimingMode::Synthetic;
  if (name == "wallclock")
    return TimingMode::WallClock;
  return std::nullopt;
}

/// Produces execution-time samples [ms] for service invocations.
///
/// Wall-clock mode times the invocation on the monotonic clock. Synthetic
/// mode runs the invocation too but reports the configured time, optionally
/// scaled by a seeded uniform factor in [1 - jitter, 1 + jitter].
class ExecutionTimer
{
public:
  ExecutionTimer(TimingMode mode, double jitter = 0.0, std::uint64_t seed = 0)
  : _mode(mode), _jitter(jitter), _rng(seed)
  {
    if (!(jitter >= 0.0 && jitter < 1.0))
      throw DomainError("timing jitter must be in [0, 1)");
  }

  TimingMode mode() const { return _mode; }

  template<typename Invocation>
  double measure(double configured_tau, Invocation&& invocation)
  {
    if (_mode == TimingMode::WallClock)
    {
      const auto t0 = std::chrono::steady_clock::now();
      std::forward<Invocation>(invocation)();
      const auto t1 = std::chrono::steady_clock::now();
      const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      // steady_clock can report 0 for very short calls on coarse clocks.
      return ms > 0.0 ? ms : 1e-6;
    }

    std::forward<Invocation>(invocation)();
    return synthetic(configured_tau);
  }

  double synthetic(double configured_tau)
  {
    if (_jitter == 0.0)
      return configured_tau;
    std::uniform_real_distribution<double> u(-_jitter, _jitter);
    return configured_tau * (1.0 + u(_rng));
  }

private:
  TimingMode _mode;
  double _jitter;
  std::mt19937_64 _rng;
};

} // namespace somc::plantlab

#endif // SOMC__PLANTLAB__TIMING_HPP
