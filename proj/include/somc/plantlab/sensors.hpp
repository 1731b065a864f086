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

#ifndef SOMC__PLANTLAB__SENSORS_HPP
#define SOMC__PLANTLAB__SENSORS_HPP

#include <somc/errors.hpp>

#include <random>

namespace somc::plantlab {

/// Velocity sensor with white Gaussian noise of the datasheet RMS value.
struct SensorSpec
{
  double noise_sigma = 0.0; ///< [m/s]
};

inline double sense(const SensorSpec& sensor, double true_velocity, std::mt19937_64& rng)
{
  if (!(sensor.noise_sigma >= 0.0))
    throw DomainError("sensor noise must be non-negative");
  if (sensor.noise_sigma == 0.0)
    return true_velocity;
  std::normal_distribution<double> noise(0.0, sensor.noise_sigma);
  return true_velocity + noise(rng);
}

/// Sensor inaccuracy is its datasheet noise and never estimated online.
inline double sensor_epsilon(const SensorSpec& sensor)
{
  return sensor.noise_sigma;
}

} // namespace somc::plantlab

#endif // SOMC__PLANTLAB__SENSORS_HPP
