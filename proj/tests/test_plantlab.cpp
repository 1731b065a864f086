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

#include <somc/plantlab/episode.hpp>
#include <somc/harness/scenario.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

using namespace somc;
using namespace somc::plantlab;

namespace {

const harness::Scenario& scenario()
{
  static const harness::Scenario s =
    harness::load_scenario(SOMC_SCENARIO_DIR "/case_study.yaml");
  return s;
}

ActiveComposition loop(std::string filter, std::optional<std::string> fmodel,
  std::string controller, std::optional<std::string> cmodel)
{
  return {"sensor_1", std::move(filter), std::move(fmodel),
    std::move(controller), std::move(cmodel), "actuator_1"};
}

EpisodeSettings settings(std::uint64_t seed = 11)
{
  EpisodeSettings e;
  e.initial_velocity = 1.0;
  e.reference = 6.0;
  e.seed = seed;
  return e;
}

// Continuous longitudinal dynamics with a first-order traction lag,
// integrated with classical RK4.
struct Rk4Vehicle
{
  VehicleParameters p;

  std::array<double, 2> deriv(const std::array<double, 2>& x, double u) const
  {
    const double v = x[0];
    const double roll = v > 0.0 ? p.rolling_coefficient * p.mass * p.gravity : 0.0;
    return {(x[1] - p.drag_coefficient * v * v - roll) / p.mass,
      (p.mass * u - x[1]) / p.actuator_time_constant};
  }

  std::array<double, 2> step(std::array<double, 2> x, double u, double h) const
  {
    const auto add = [](std::array<double, 2> a, std::array<double, 2> b, double s)
      { return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]}; };
    const auto k1 = deriv(x, u);
    const auto k2 = deriv(add(x, k1, h / 2), u);
    const auto k3 = deriv(add(x, k2, h / 2), u);
    const auto k4 = deriv(add(x, k3, h), u);
    for (int i = 0; i < 2; ++i)
      x[static_cast<std::size_t>(i)] += h / 6 *
        (k1[static_cast<std::size_t>(i)] + 2 * k2[static_cast<std::size_t>(i)] +
         2 * k3[static_cast<std::size_t>(i)] + k4[static_cast<std::size_t>(i)]);
    return x;
  }
};

} // namespace

TEST(Models, PointMassExamples)
{
  const ModelSpec pm{ModelKind::PointMass, {}};
  EXPECT_DOUBLE_EQ(step_model(pm, {5.0, 0.0}, 1.0, 0.05).velocity, 5.05);
  EXPECT_DOUBLE_EQ(step_model(pm, {5.0, 0.0}, 10.0, 0.05).velocity, 5.15);
  EXPECT_DOUBLE_EQ(step_model(pm, {0.0, 0.0}, -1.0, 0.05).velocity, 0.0);
  EXPECT_DOUBLE_EQ(step_model(pm, {14.99, 0.0}, 3.0, 0.05).velocity, 15.0);
  EXPECT_THROW(step_model(pm, {1.0, 0.0}, 1.0, 0.0), DomainError);
  EXPECT_THROW(step_model(pm, {1.0, 0.0}, NAN, 0.05), NumericalError);
}

TEST(Models, SingleTrackSubtractsResistance)
{
  const VehicleParameters p;
  const ModelSpec st{ModelKind::SingleTrack, p};
  const double v = 10.0, u = 1.0, dt = 0.05;
  const double a = u - (0.4 * v * v + 0.012 * 1500.0 * 9.81) / 1500.0;
  EXPECT_NEAR(step_model(st, {v, 0.0}, u, dt).velocity, v + a * dt, 1e-12);
}

TEST(Models, MultiBodyMatchesRk4Reference)
{
  const VehicleParameters p;
  const ModelSpec mb{ModelKind::MultiBody, p};
  const Rk4Vehicle ref{p};

  PlantState x{5.0, 0.0};
  std::array<double, 2> y{5.0, 0.0};
  const double dt = 0.01;
  for (int k = 0; k < 100; ++k)
  {
    const double u = k < 50 ? 2.0 : -1.0;
    x = propagate(mb, x, u, dt, 100);
    for (int j = 0; j < 100; ++j)
      y = ref.step(y, u, dt / 100);
  }
  EXPECT_NEAR(x.velocity, y[0], 2e-3);
  EXPECT_NEAR(x.force, y[1], 5.0);
}

TEST(Models, SingleTrackAndMultiBodyDiverge)
{
  const VehicleParameters p;
  PlantState st{5.0, 0.0};
  PlantState mb{5.0, 0.0};
  for (int k = 0; k < 50; ++k)
  {
    st = propagate({ModelKind::SingleTrack, p}, st, 2.0, 0.01);
    mb = propagate({ModelKind::MultiBody, p}, mb, 2.0, 0.01);
  }
  // The traction lag costs roughly 2 m/s^2 * 0.2 s of velocity.
  EXPECT_GT(st.velocity - mb.velocity, 0.3);
  EXPECT_LT(st.velocity - mb.velocity, 0.45);
}

TEST(Models, CoastingNeverSpeedsUp)
{
  for (const auto kind : {ModelKind::SingleTrack, ModelKind::MultiBody})
  {
    PlantState x{12.0, 0.0};
    for (int k = 0; k < 2000; ++k)
    {
      const PlantState next = step_model({kind, {}}, x, 0.0, 0.01);
      ASSERT_LE(next.velocity, x.velocity) << to_string(kind) << " step " << k;
      ASSERT_GE(next.velocity, 0.0);
      x = next;
    }
  }
}

TEST(Models, LinearizationOfPointMass)
{
  const auto lin = linearize({ModelKind::PointMass, {}}, {5.0, 0.0}, 0.5, 0.1);
  EXPECT_NEAR(lin.A(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(lin.B(0), 0.1, 1e-6);
}

TEST(Sensors, NoiseMatchesSigma)
{
  std::mt19937_64 rng(3);
  const SensorSpec s{0.05};
  const int n = 100000;
  double sum = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i)
  {
    const double e = sense(s, 7.0, rng) - 7.0;
    sum += e;
    ss += e * e;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 1e-3);
  EXPECT_NEAR(std::sqrt(ss / n - mean * mean), 0.05, 0.002);
  EXPECT_EQ(sense({0.0}, 7.0, rng), 7.0);
  EXPECT_EQ(sensor_epsilon(s), 0.05);
  EXPECT_THROW(sense({-1.0}, 7.0, rng), DomainError);
}

TEST(Timing, SyntheticJitterIsCentred)
{
  ExecutionTimer exact(TimingMode::Synthetic);
  EXPECT_EQ(exact.measure(2.5, [] {}), 2.5);

  ExecutionTimer t(TimingMode::Synthetic, 0.2, 9);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i)
  {
    const double x = t.synthetic(4.0);
    ASSERT_GE(x, 3.2);
    ASSERT_LE(x, 4.8);
    sum += x;
  }
  EXPECT_NEAR(sum / 10000 / 4.0, 1.0, 0.01);
  EXPECT_THROW(ExecutionTimer(TimingMode::Synthetic, 1.0), DomainError);
}

TEST(Timing, WallClockIsPositive)
{
  ExecutionTimer t(TimingMode::WallClock);
  volatile double sink = 0.0;
  const double ms = t.measure(0.0, [&] { for (int i = 0; i < 1000; ++i) sink = sink + i; });
  EXPECT_GT(ms, 0.0);
}

TEST(Kalman, ExactMeasurementIsAdopted)
{
  const ModelSpec pm{ModelKind::PointMass, {}};
  const KalmanState s = kalman_init(pm, 3.0, {});
  const KalmanState post = kalman_update(s, 4.0, 0.0);
  EXPECT_NEAR(post.velocity(), 4.0, 1e-12);
  EXPECT_NEAR(post.P(0, 0), 0.0, 1e-12);

  KalmanState certain = s;
  certain.P.setZero();
  EXPECT_EQ(kalman_update(certain, 4.0, 0.0).velocity(), 3.0);
  EXPECT_THROW(kalman_update(s, 4.0, -1.0), DomainError);
}

TEST(Kalman, CovarianceReachesRiccatiFixedPoint)
{
  const ModelSpec pm{ModelKind::PointMass, {}};
  KalmanConfig cfg;
  cfg.process_noise_velocity = 1e-3;
  const double q = cfg.process_noise_velocity;
  const double r = 0.05 * 0.05;

  KalmanState s = kalman_init(pm, 5.0, cfg);
  KalmanState prior = s;
  for (int k = 0; k < 2000; ++k)
  {
    prior = kalman_predict(s, pm, 0.0, 0.05, cfg);
    s = kalman_update(prior, 5.0, r);
  }
  const double p_minus = (q + std::sqrt(q * q + 4 * q * r)) / 2;
  const double p_plus = p_minus * r / (p_minus + r);
  EXPECT_NEAR(prior.P(0, 0) / p_minus, 1.0, 0.01);
  EXPECT_NEAR(s.P(0, 0) / p_plus, 1.0, 0.01);
}

TEST(Kalman, BeatsPassThroughOnTheCaseStudy)
{
  const Lab& lab = scenario().lab;
  const auto k = run_episode(lab, loop("kalman", "multi_body", "pid", std::nullopt), settings());
  const auto d = run_episode(lab, loop("dummy", std::nullopt, "pid", std::nullopt), settings());
  EXPECT_DOUBLE_EQ(d.inaccuracies.services.at("dummy"), 0.05);
  EXPECT_LT(k.inaccuracies.services.at("kalman"), d.inaccuracies.services.at("dummy"));
  EXPECT_LT(k.estimation_rmse, d.estimation_rmse);
}

TEST(Pid, Examples)
{
  const PidGains g{2.0, 0.5, 0.1, -3.0, 3.0};
  const auto a = pid_step(g, 5.0, 4.0, 0.1, {});
  EXPECT_DOUBLE_EQ(a.command, 2.05);
  EXPECT_DOUBLE_EQ(a.state.integral, 0.1);
  const auto b = pid_step(g, 5.0, 4.5, 0.1, a.state);
  EXPECT_NEAR(b.command, 1.0 + 0.075 - 0.5, 1e-12);

  const auto sat = pid_step(g, 15.0, 5.0, 0.1, {});
  EXPECT_EQ(sat.command, 3.0);
  EXPECT_EQ(sat.state.integral, 0.0);
  const auto neg = pid_step(g, 0.0, 10.0, 0.1, {});
  EXPECT_EQ(neg.command, -3.0);
  EXPECT_EQ(neg.state.integral, 0.0);
  EXPECT_THROW(pid_step(g, 1.0, 0.0, 0.0, {}), DomainError);
}

TEST(Pid, SettlesOnPointMass)
{
  const ModelSpec pm{ModelKind::PointMass, {}};
  const PidGains g{2.0, 0.5, 0.0, -3.0, 3.0};
  PlantState x{1.0, 0.0};
  PidState st;
  double peak = 0.0;
  for (int k = 0; k < 400; ++k)
  {
    const auto out = pid_step(g, 6.0, x.velocity, 0.05, st);
    st = out.state;
    x = propagate(pm, x, out.command, 0.05);
    peak = std::max(peak, x.velocity);
  }
  EXPECT_NEAR(x.velocity, 6.0, 0.02);
  EXPECT_LT(peak, 6.6);
}

TEST(Mpc, AtReferenceCommandsNothing)
{
  const ModelSpec pm{ModelKind::PointMass, {}};
  MpcConfig cfg;
  cfg.r = 0.1;
  const std::vector<double> ref{4.0};
  const auto res = mpc_step(pm, cfg, {4.0, 0.0}, ref, 0.05);
  EXPECT_EQ(res.command, 0.0);
  EXPECT_EQ(res.cost, 0.0);
}

TEST(Mpc, SingleStepIsDeadbeat)
{
  ModelSpec pm{ModelKind::PointMass, {}};
  pm.params.a_max = 5.0;
  MpcConfig cfg;
  cfg.horizon = 1;
  cfg.r = 0.0;
  cfg.u_min = -5.0;
  cfg.u_max = 5.0;
  const std::vector<double> ref{2.3};
  EXPECT_NEAR(mpc_step(pm, cfg, {2.0, 0.0}, ref, 0.1).command, 3.0, 1e-4);
  const std::vector<double> far{9.0};
  EXPECT_NEAR(mpc_step(pm, cfg, {2.0, 0.0}, far, 0.1).command, 5.0, 1e-9);
}

TEST(Mpc, MatchesGridSearchOptimum)
{
  ModelSpec pm{ModelKind::PointMass, {}};
  pm.params.a_max = 5.0;
  MpcConfig cfg;
  cfg.horizon = 4;
  cfg.q = 1.0;
  cfg.r = 0.0;
  cfg.u_min = -5.0;
  cfg.u_max = 5.0;
  const double v0 = 2.0, target = 3.25, dt = 0.1;

  const std::array<double, 5> levels{-5.0, -2.5, 0.0, 2.5, 5.0};
  double best = std::numeric_limits<double>::infinity();
  for (int code = 0; code < 625; ++code)
  {
    double v = v0, j = 0.0;
    for (int k = 0, c = code; k < 4; ++k, c /= 5)
    {
      v += levels[static_cast<std::size_t>(c % 5)] * dt;
      j += (v - target) * (v - target);
    }
    best = std::min(best, j);
  }
  EXPECT_NEAR(best, 0.625, 1e-12);

  const std::vector<double> ref{target};
  const auto res = mpc_step(pm, cfg, {v0, 0.0}, ref, dt);
  EXPECT_LE(res.cost, best + 1e-3);
  EXPECT_NEAR(res.cost, mpc_cost(pm, cfg, {v0, 0.0}, ref, res.inputs, dt), 1e-9);
  for (const double u : res.inputs)
  {
    EXPECT_GE(u, cfg.u_min);
    EXPECT_LE(u, cfg.u_max);
  }
}

TEST(Mpc, RejectsBadConfig)
{
  const ModelSpec pm{ModelKind::PointMass, {}};
  MpcConfig cfg;
  cfg.horizon = 0;
  const std::vector<double> ref{1.0};
  EXPECT_THROW(mpc_step(pm, cfg, {0.0, 0.0}, ref, 0.05), DomainError);
  cfg.horizon = 5;
  const std::vector<double> short_ref{1.0, 2.0};
  EXPECT_THROW(mpc_step(pm, cfg, {0.0, 0.0}, short_ref, 0.05), DomainError);
}

TEST(Actuators, Examples)
{
  const ActuatorSpec fine{0.01, -3.0, 3.0};
  EXPECT_EQ(actuate(fine, 5.0), 3.0);
  EXPECT_EQ(actuate(fine, -7.0), -3.0);
  EXPECT_NEAR(actuate(fine, 1.234), 1.23, 1e-12);
  EXPECT_NEAR(actuator_epsilon(fine), 0.0016667, 1e-7);
  EXPECT_NEAR(actuator_epsilon({0.1, -3.0, 3.0}), 0.016667, 1e-6);
  EXPECT_EQ(actuate({0.0, -3.0, 3.0}, 1.2345), 1.2345);
  EXPECT_THROW(actuate({0.1, 1.0, 1.0}, 0.0), DomainError);
}

TEST(Inaccuracy, Examples)
{
  const std::vector<double> ref{1.0, 2.0};
  const std::vector<double> act{1.0, 4.0};
  EXPECT_DOUBLE_EQ(controller_epsilon(ref, act), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(filter_epsilon(0.1, ref, ref), 0.1);
  const std::vector<double> off{1.1, 1.9};
  EXPECT_NEAR(filter_epsilon(0.1, off, ref), 0.0, 1e-12);
  EXPECT_THROW(controller_epsilon(ref, std::vector<double>{1.0}), DomainError);
  EXPECT_THROW(rms(std::vector<double>{}), DomainError);
}

TEST(Inaccuracy, ModelOrderingOnAnEpisode)
{
  const Lab& lab = scenario().lab;
  const auto rep = run_episode(lab, loop("kalman", "multi_body", "pid", std::nullopt), settings());
  const auto eps = [&](const std::string& id)
    {
      return model_epsilon(lab.behavior<ModelSpec>(id), rep.start, rep.applied,
        rep.true_velocity, rep.control_dt, rep.substeps);
    };
  EXPECT_EQ(eps("multi_body"), 0.0);
  EXPECT_GE(eps("single_track"), eps("multi_body"));
  EXPECT_GE(eps("point_mass"), eps("single_track"));
  EXPECT_EQ(rep.inaccuracies.services.at("multi_body"), 0.0);
}

TEST(Episode, RespectsActuatorAndVelocityBounds)
{
  const Lab& lab = scenario().lab;
  for (const auto& a : {loop("kalman", "multi_body", "mpc", "multi_body"),
                        loop("dummy", std::nullopt, "pid", std::nullopt)})
  {
    const auto rep = run_episode(lab, a, settings());
    for (std::size_t k = 0; k < rep.size(); ++k)
    {
      ASSERT_GE(rep.applied[k], -3.0);
      ASSERT_LE(rep.applied[k], 3.0);
      ASSERT_GE(rep.true_velocity[k], 0.0);
      ASSERT_LE(rep.true_velocity[k], lab.plant.v_max);
    }
  }
}

TEST(Episode, MpcTracksBetterThanPid)
{
  const Lab& lab = scenario().lab;
  const auto m = run_episode(lab, loop("kalman", "multi_body", "mpc", "multi_body"), settings());
  const auto p = run_episode(lab, loop("kalman", "multi_body", "pid", std::nullopt), settings());
  EXPECT_LT(m.rmse, p.rmse);
  EXPECT_GT(m.mean_step_time, p.mean_step_time);
}

TEST(Episode, DeterministicAndRecomputable)
{
  const Lab& lab = scenario().lab;
  const auto a = loop("kalman", "single_track", "mpc", "point_mass");
  const auto r1 = run_episode(lab, a, settings(5));
  const auto r2 = run_episode(lab, a, settings(5));
  EXPECT_EQ(r1.measured, r2.measured);
  EXPECT_EQ(r1.applied, r2.applied);
  EXPECT_EQ(r1.rmse, r2.rmse);
  EXPECT_EQ(r1.size(), lab.steps());

  double ss = 0.0;
  for (std::size_t k = 0; k < r1.size(); ++k)
    ss += (r1.reference[k] - r1.true_velocity[k]) * (r1.reference[k] - r1.true_velocity[k]);
  EXPECT_NEAR(r1.rmse, std::sqrt(ss / static_cast<double>(r1.size())), 1e-9);

  double total = 0.0;
  for (const double t : r1.step_times)
    total += t;
  EXPECT_NEAR(r1.mean_step_time, total / static_cast<double>(r1.size()), 1e-9);

  EXPECT_NE(run_episode(lab, a, settings(6)).measured, r1.measured);
}

TEST(Episode, SyntheticStepTimeSumsServiceTimes)
{
  const Lab& lab = scenario().lab;
  const auto rep = run_episode(lab, loop("dummy", std::nullopt, "pid", std::nullopt), settings());
  const double expected = lab.synthetic_tau("sensor_1") + lab.synthetic_tau("dummy") +
    lab.synthetic_tau("pid") + lab.synthetic_tau("actuator_1");
  EXPECT_NEAR(rep.mean_step_time, expected, 1e-12);
}

TEST(Episode, ReferenceRamp)
{
  EXPECT_DOUBLE_EQ(reference_profile(1.0, 6.0, 1.5, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(reference_profile(1.0, 6.0, 1.5, 2.0), 4.0);
  EXPECT_DOUBLE_EQ(reference_profile(1.0, 6.0, 1.5, 10.0), 6.0);
  EXPECT_DOUBLE_EQ(reference_profile(6.0, 1.0, 1.5, 2.0), 3.0);
  EXPECT_DOUBLE_EQ(reference_profile(1.0, 6.0, 0.0, 0.0), 6.0);
}
