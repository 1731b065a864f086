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

#ifndef SOMC__PLANTLAB__ACTUATORS_HPP
#define SOMC__PLANTLAB__ACTUATORS_HPP

#include <somc/errors.hpp>

#include <algorithm>
#include <cmath>

namespace somc::plantlab {

struct ActuatorSpec
{
  double accuracy = 0.0;    ///< quantization step [m/s^2]
  double range_min = -3.0;  ///< [m/s^2]
  double range_max = 3.0;   ///< [m/s^2]
};

/// Saturates to the operating range and rounds to the accuracy step.
inline double actuate(const ActuatorSpec& a, double command)
{
  if (!(a.range_max > a.range_min))
    throw DomainError("actuator range must be non-empty");
  double u = std::clamp(command, a.range_min, a.range_max);
  if (a.accuracy > 0.0)
    u = std::clamp(std::round(u / a.accuracy) * a.accuracy, a.range_min, a.range_max);
  return u;
}

inline double actuator_epsilon(const ActuatorSpec& a)
{
  return a.accuracy / (a.range_max - a.range_min);
}

} // namespace somc::plantlab

#endif // SOMC__PLANTLAB__ACTUATORS_HPP
