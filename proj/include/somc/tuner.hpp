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

#ifndef SOMC__TUNER_HPP
#define SOMC__TUNER_HPP

#include <somc/errors.hpp>
#include <somc/graph.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace somc {

//==============================================================================
/// Operating condition the trade-off weight is learned for.
struct Context
{
  double current_state = 0.0; ///< longitudinal velocity [m/s]
  double reference = 0.0;     ///< reference velocity [m/s]

  bool operator==(const Context&) const = default;
};

enum class Criterion
{
  TrackingError,
  ComputationTime
};

inline constexpr std::string_view to_string(Criterion c)
{
  return c == Criterion::TrackingError ? "tracking_error" : "computation_time";
}

inline std::optional<Criterion> parse_criterion(std::string_view name)
{
  if (name == "tracking_error")
    return Criterion::TrackingError;
  if (name == "computation_time")
    return Criterion::ComputationTime;
  return std::nullopt;
}

struct Observation
{
  Context context;
  double alpha = 0.5;
  double f_value = 0.0;
  Criterion criterion = Criterion::TrackingError;
};

//==============================================================================
struct GpHyperparameters
{
  /// Lengthscales of (current_state, reference, alpha) in normalized units.
  std::array<double, 3> lengthscales = {0.25, 0.25, 0.25};
  double signal_variance = 1.0;
  double noise_variance = 1e-2;
};

struct TunerConfig
{
  GpHyperparameters hyper;

  /// Lower-confidence-bound exploration weight.
  double beta = 2.0;

  /// Candidate alphas, evenly spaced over [0.1, 0.9] (81 -> step 0.01).
  std::size_t grid_points = 81;

  /// Bounds used to normalize both context dimensions to [0, 1].
  double state_min = 0.0;
  double state_max = 15.0;

  std::uint64_t seed = 0;

  /// Number of seeded uniform-random suggestions before the acquisition
  /// takes over (after the first, which is always the starting estimate).
  std::size_t random_initial = 0;

  /// Refit hyperparameters by maximizing the log marginal likelihood over a
  /// small grid whenever an observation arrives.
  bool fit_hyperparameters = false;

  double std_floor = 1e-9;
};

struct GpPosterior
{
  std::vector<double> means;
  std::vector<double> variances; ///< latent-function variance, >= 0
};

/// Sample mean and deviation used to z-score F under one criterion.
struct Standardization
{
  double mean = 0.0;
  double stddev = 1.0;
};

using NormalizedPoint = std::array<double, 3>;

//==============================================================================
namespace detail {

inline double se_kernel(
    const NormalizedPoint& a, const NormalizedPoint& b,
    const GpHyperparameters& hp)
{
  double r2 = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
  {
    const double d = (a[i] - b[i]) / hp.lengthscales[i];
    r2 += d * d;
  }
  return hp.signal_variance * std::exp(-0.5 * r2);
}

/// Cholesky factor of K + noise*I with escalating jitter.
inline Eigen::LLT<Eigen::MatrixXd> factor_gram(Eigen::MatrixXd K, double noise)
{
  K.diagonal().array() += noise;
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt)
  {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success)
      return llt;
    jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0;
  }
  throw NumericalError("GP Gram matrix is not positive definite after jitter");
}

} // namespace detail

//==============================================================================
/// Contextual Bayesian optimizer of the trade-off weight alpha.
///
/// A Gaussian process over normalized (current state, reference, alpha)
/// models the criterion F; suggestions minimize mean - beta * stddev over a
/// fixed alpha grid. Observations are tagged with the criterion active when
/// they were taken and only those matching the active criterion condition
/// the surrogate.
class ContextualBayesTuner
{
public:
  explicit ContextualBayesTuner(TunerConfig config = {})
  : _config(config)
  {
    if (_config.grid_points < 2)
      throw DomainError("alpha grid needs at least two points");
    if (!(_config.state_max > _config.state_min))
      throw DomainError("state bounds must satisfy state_max > state_min");
    _hyper = _config.hyper;
    validate_hyper(_hyper);
  }

  const TunerConfig& config() const { return _config; }
  const GpHyperparameters& hyperparameters() const { return _hyper; }
  const std::vector<Observation>& observations() const { return _observations; }
  Criterion criterion() const { return _criterion; }

  const Standardization& standardization(Criterion c) const
  {
    return _standard[static_cast<std::size_t>(c)];
  }

  /// Switch the objective. History is kept.
  ContextualBayesTuner with_criterion(Criterion c) const
  {
    ContextualBayesTuner out = *this;
    out._criterion = c;
    return out;
  }

  std::vector<double> alpha_grid() const
  {
    std::vector<double> grid(_config.grid_points);
    const double step =
      (max_alpha - min_alpha) / static_cast<double>(_config.grid_points - 1);
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid[i] = std::round((min_alpha + step * static_cast<double>(i)) * 1e12) / 1e12;
    return grid;
  }

  NormalizedPoint normalize(const Context& c, double alpha) const
  {
    const double span = _config.state_max - _config.state_min;
    return {
      (c.current_state - _config.state_min) / span,
      (c.reference - _config.state_min) / span,
      (alpha - min_alpha) / (max_alpha - min_alpha)};
  }

  /// Appends an observation and refreshes the standardization of its
  /// criterion.
  ContextualBayesTuner observed(const Observation& obs) const
  {
    require_alpha_in_range(obs.alpha);
    if (!std::isfinite(obs.f_value) || obs.f_value < 0.0)
      throw DomainError("criterion value must be finite and non-negative");
    if (!std::isfinite(obs.context.current_state) ||
        !std::isfinite(obs.context.reference))
      throw DomainError("context must be finite");

    ContextualBayesTuner out = *this;
    out._observations.push_back(obs);
    out._last_alpha = obs.alpha;
    out.refresh_standardization(obs.criterion);
    if (out._config.fit_hyperparameters)
      out.fit_hyperparameters();
    return out;
  }

  /// Exact GP posterior at points already in normalized coordinates, in the
  /// units of F (de-standardized).
  GpPosterior posterior(const std::vector<NormalizedPoint>& queries) const
  {
    const auto data = active_data();
    const Standardization& st = standardization(_criterion);

    GpPosterior out;
    out.means.resize(queries.size());
    out.variances.resize(queries.size());

    if (data.x.empty())
    {
      for (std::size_t i = 0; i < queries.size(); ++i)
      {
        out.means[i] = 0.0;
        out.variances[i] = _hyper.signal_variance;
      }
      return out;
    }

    const auto n = static_cast<Eigen::Index>(data.x.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
      for (Eigen::Index j = 0; j < n; ++j)
        K(i, j) = detail::se_kernel(
          data.x[static_cast<std::size_t>(i)], data.x[static_cast<std::size_t>(j)], _hyper);
    }
    const auto llt = detail::factor_gram(K, _hyper.noise_variance);

    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i)
      z(i) = (data.f[static_cast<std::size_t>(i)] - st.mean) / st.stddev;
    const Eigen::VectorXd weights = llt.solve(z);

    Eigen::VectorXd k_star(n);
    for (std::size_t q = 0; q < queries.size(); ++q)
    {
      for (Eigen::Index i = 0; i < n; ++i)
        k_star(i) = detail::se_kernel(queries[q], data.x[static_cast<std::size_t>(i)], _hyper);

      const double mean_z = k_star.dot(weights);
      const Eigen::VectorXd v = llt.matrixL().solve(k_star);
      const double var_z = std::max(0.0, _hyper.signal_variance - v.squaredNorm());

      out.means[q] = st.mean + st.stddev * mean_z;
      out.variances[q] = st.stddev * st.stddev * var_z;
    }
    return out;
  }

  /// Next alpha to try in @p context.
  double suggest_alpha(const Context& context) const
  {
    if (!std::isfinite(context.current_state) || !std::isfinite(context.reference))
      throw DomainError("context must be finite");

    const auto data = active_data();
    if (data.x.empty())
      return _last_alpha.value_or(0.5);

    const auto grid = alpha_grid();
    if (data.x.size() < _config.random_initial)
    {
      std::mt19937_64 rng(_config.seed + data.x.size());
      std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
      return grid[pick(rng)];
    }

    std::vector<NormalizedPoint> queries;
    queries.reserve(grid.size());
    for (const double a : grid)
      queries.push_back(normalize(context, a));
    const auto post = posterior(queries);

    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
      const double lcb =
        post.means[i] - _config.beta * std::sqrt(post.variances[i]);
      if (lcb < best_value)
      {
        best_value = lcb;
        best = i;
      }
    }
    return std::clamp(grid[best], min_alpha, max_alpha);
  }

private:
  TunerConfig _config;
  GpHyperparameters _hyper;
  std::vector<Observation> _observations;
  std::array<Standardization, 2> _standard{};
  Criterion _criterion = Criterion::TrackingError;
  std::optional<double> _last_alpha;

  struct Data
  {
    std::vector<NormalizedPoint> x;
    std::vector<double> f;
  };

  static void validate_hyper(const GpHyperparameters& hp)
  {
    for (const double l : hp.lengthscales)
    {
      if (!(l > 0.0))
        throw DomainError("GP lengthscales must be positive");
    }
    if (!(hp.signal_variance > 0.0) || !(hp.noise_variance > 0.0))
      throw DomainError("GP variances must be positive");
  }

  Data active_data() const
  {
    Data d;
    for (const auto& o : _observations)
    {
      if (o.criterion != _criterion)
        continue;
      d.x.push_back(normalize(o.context, o.alpha));
      d.f.push_back(o.f_value);
    }
    return d;
  }

  void refresh_standardization(Criterion c)
  {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& o : _observations)
    {
      if (o.criterion == c)
      {
        sum += o.f_value;
        ++n;
      }
    }
    Standardization st;
    st.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& o : _observations)
    {
      if (o.criterion == c)
        ss += (o.f_value - st.mean) * (o.f_value - st.mean);
    }
    st.stddev = std::max(std::sqrt(ss / static_cast<double>(n)), _config.std_floor);
    _standard[static_cast<std::size_t>(c)] = st;
  }

  double log_marginal_likelihood(const GpHyperparameters& hp) const
  {
    const auto data = active_data();
    const Standardization& st = standardization(_criterion);
    const auto n = static_cast<Eigen::Index>(data.x.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
      for (Eigen::Index j = 0; j < n; ++j)
        K(i, j) = detail::se_kernel(
          data.x[static_cast<std::size_t>(i)], data.x[static_cast<std::size_t>(j)], hp);
    }
    const auto llt = detail::factor_gram(K, hp.noise_variance);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i)
      z(i) = (data.f[static_cast<std::size_t>(i)] - st.mean) / st.stddev;
    const Eigen::VectorXd w = llt.solve(z);
    const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * z.dot(w) - 0.5 * log_det;
  }

  void fit_hyperparameters()
  {
    if (active_data().x.size() < 3)
      return;

    GpHyperparameters best = _hyper;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (const double l : {0.05, 0.1, 0.2, 0.3, 0.5, 1.0})
    {
      for (const double noise : {1e-4, 1e-3, 1e-2, 1e-1})
      {
        GpHyperparameters hp = _config.hyper;
        hp.lengthscales = {l, l, l};
        hp.noise_variance = noise;
        const double ll = log_marginal_likelihood(hp);
        if (ll > best_ll)
        {
          best_ll = ll;
          best = hp;
        }
      }
    }
    _hyper = best;
  }
};

//==============================================================================
inline GpPosterior gp_posterior(
    const ContextualBayesTuner& state, const std::vector<NormalizedPoint>& queries)
{
  return state.posterior(queries);
}

inline double suggest_alpha(const ContextualBayesTuner& state, const Context& context)
{
  return state.suggest_alpha(context);
}

inline ContextualBayesTuner observe(
    const ContextualBayesTuner& state, const Observation& observation)
{
  return state.observed(observation);
}

} // namespace somc

#endif // SOMC__TUNER_HPP
