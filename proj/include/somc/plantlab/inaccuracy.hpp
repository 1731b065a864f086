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

#ifndef SOMC__PLANTLAB__INACCURACY_HPP
#define SOMC__PLANTLAB__INACCURACY_HPP

#include <somc/errors.hpp>
#include <somc/plantlab/models.hpp>

#include <cmath>
#include <span>

namespace somc::plantlab {

// Per-service-type inaccuracy measures. All are root-mean-square values over
// the steps of one episode.

inline double rms(std::span<const double> values)
{
  if (values.empty())
    throw DomainError("RMS of an empty sequence");
  double ss = 0.0;
  for (const double v : values)
    ss += v * v;
  return std::sqrt(ss / static_cast<double>(values.size()));
}

/// RMS reference tracking error.
inline double controller_epsilon(
    std::span<const double> reference, std::span<const double> actual)
{
  if (reference.size() != actual.size())
    throw DomainError("trajectory lengths differ");
  if (reference.empty())
    throw DomainError("empty episode");
  double ss = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i)
    ss += (reference[i] - actual[i]) * (reference[i] - actual[i]);
  return std::sqrt(ss / static_cast<double>(reference.size()));
}

/// RMS of (sensor noise - |estimate - measurement|).
///
/// The inner term is signed; a filter scores 0 when it moves its estimate
/// exactly one noise level away from each measurement.
inline double filter_epsilon(
    double sensor_sigma, std::span<const double> estimates,
    std::span<const double> measurements)
{
  if (estimates.size() != measurements.size())
    throw DomainError("trajectory lengths differ");
  if (estimates.empty())
    throw DomainError("empty episode");
  double ss = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i)
  {
    const double d = sensor_sigma - std::abs(estimates[i] - measurements[i]);
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(estimates.size()));
}

/// RMS of (model output - system output) with the model replayed open loop
/// on the applied input sequence from the episode's start state.
///
/// actual[k] is the plant velocity at the start of step k, so actual[0] is
/// the start state and inputs[k] drives the transition k -> k + 1.
inline double model_epsilon(
    const ModelSpec& model, const PlantState& start,
    std::span<const double> inputs, std::span<const double> actual,
    double dt, int substeps)
{
  if (actual.empty())
    throw DomainError("empty episode");
  if (inputs.size() + 1 < actual.size())
    throw DomainError("input sequence shorter than the trajectory");

  PlantState x = start;
  double ss = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k)
  {
    const double d = x.velocity - actual[k];
    ss += d * d;
    if (k < inputs.size())
      x = propagate(model, x, inputs[k], dt, substeps);
  }
  return std::sqrt(ss / static_cast<double>(actual.size()));
}

} // namespace somc::plantlab

#endif // SOMC__PLANTLAB__INACCURACY_HPP
