// Copyright 2026 The SBC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SBC_SAMPLERS_HPP
#define SBC_SAMPLERS_HPP

#include <sbc/detail/math.hpp>
#include <sbc/model.hpp>
#include <sbc/models.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/**
 * \file
 * \brief Posterior samplers under test and the failure injectors.
 *
 * All MCMC samplers start from a fresh prior draw taken from the chain's own
 * stream, adapt their step size during warmup only, and return post-warmup
 * states mapped back to the constrained scale.
 */

namespace sbc {

enum class SamplerKind { kExactConjugate, kRwMetropolis, kHmc, kMeanfieldVi };

constexpr std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kExactConjugate: return "exact-conjugate";
    case SamplerKind::kRwMetropolis: return "rw-metropolis";
    case SamplerKind::kHmc: return "hmc";
    case SamplerKind::kMeanfieldVi: return "meanfield-vi";
  }
  return "unknown";
}

constexpr bool is_mcmc(SamplerKind kind) { return kind == SamplerKind::kRwMetropolis || kind == SamplerKind::kHmc; }

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kExactConjugate;
  double step_size = 0.5;
  int n_leapfrog = 20;
  int vi_iterations = 10000;
  double vi_learning_rate = 0.1;
  int warmup = 500;

  void validate() const {
    if (!(step_size > 0.0)) fail(ErrorCode::kConfigError, "step_size must be positive");
    if (n_leapfrog < 1) fail(ErrorCode::kConfigError, "n_leapfrog must be >= 1");
    if (vi_iterations < 1) fail(ErrorCode::kConfigError, "vi_iterations must be >= 1");
    if (!(vi_learning_rate > 0.0)) fail(ErrorCode::kConfigError, "vi_learning_rate must be positive");
    if (warmup < 0) fail(ErrorCode::kConfigError, "warmup must be >= 0");
  }

  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

/// Acceptance-rate targets used during warmup.
inline constexpr double kRwTargetAcceptance1d = 0.44;
inline constexpr double kRwTargetAcceptanceMultid = 0.234;
inline constexpr double kHmcTargetAcceptance = 0.8;
/// Energy error above which an HMC trajectory counts as divergent.
inline constexpr double kDivergenceThreshold = 1000.0;

/// Nesterov dual averaging of log step size toward a target acceptance statistic.
class StepSizeAdapter {
 public:
  StepSizeAdapter(double initial_step, double target)
      : mu_{std::log(10.0 * initial_step)}, target_{target}, log_step_{std::log(initial_step)} {}

  double update(double accept_stat) {
    ++t_;
    const double w = 1.0 / (t_ + kT0);
    h_bar_ = (1.0 - w) * h_bar_ + w * (target_ - accept_stat);
    log_step_ = mu_ - std::sqrt(t_) / kGamma * h_bar_;
    const double eta = std::pow(t_, -kKappa);
    log_step_bar_ = eta * log_step_ + (1.0 - eta) * log_step_bar_;
    return std::exp(log_step_);
  }

  [[nodiscard]] double current() const { return std::exp(log_step_); }
  [[nodiscard]] double final_step() const { return t_ > 0 ? std::exp(log_step_bar_) : current(); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;

  double mu_;
  double target_;
  double log_step_;
  double log_step_bar_ = 0.0;
  double h_bar_ = 0.0;
  double t_ = 0.0;
};

namespace detail {

inline PosteriorDraws empty_draws(const GenerativeModel& model, std::string_view sampler, std::size_t n,
                                  const RandomStream& rng) {
  PosteriorDraws draws;
  draws.names = model.shared_names();
  draws.values.resize(n * model.dimension());
  draws.sampler_name = std::string{sampler};
  draws.chain_length_raw = n;
  draws.rng_stream_id = rng.stream_id();
  return draws;
}

inline std::vector<double> initial_point(const GenerativeModel& model, const Dataset& data, RandomStream& rng) {
  auto z = model.unconstrain(model.draw_prior(rng));
  if (!std::isfinite(model.log_density(z, data))) {
    fail(ErrorCode::kNonFiniteDensity, "log density is not finite at the initial point");
  }
  return z;
}

}  // namespace detail

/// L independent draws from the closed-form normal-normal posterior.
inline PosteriorDraws sample_exact_conjugate(const GenerativeModel& model, const Dataset& data, std::size_t L,
                                             RandomStream& rng) {
  const auto* conjugate = dynamic_cast<const NormalNormalModel*>(&model);
  if (conjugate == nullptr) {
    fail(ErrorCode::kNotConjugate, "exact sampling needs the conjugate normal-normal model, got " +
                                       std::string{model.name()});
  }
  if (L < 1) fail(ErrorCode::kInvalidSpec, "need at least one posterior draw");
  const auto post = conjugate->posterior(data);
  const double sd = std::sqrt(post.variance);
  auto draws = detail::empty_draws(model, to_string(SamplerKind::kExactConjugate), L, rng);
  for (auto& v : draws.values) v = rng.normal(post.mean, sd);
  return draws;
}

/// Gaussian random-walk Metropolis on the unconstrained scale.
inline PosteriorDraws sample_rw_metropolis(const GenerativeModel& model, const Dataset& data, std::size_t n_steps,
                                           double step_size, int warmup, RandomStream& rng) {
  if (n_steps < 1) fail(ErrorCode::kInvalidSpec, "n_steps must be >= 1");
  const std::size_t dim = model.dimension();
  auto draws = detail::empty_draws(model, to_string(SamplerKind::kRwMetropolis), n_steps, rng);

  auto z = detail::initial_point(model, data, rng);
  double lp = model.log_density(z, data);
  std::vector<double> proposal(dim);
  StepSizeAdapter adapter{step_size, dim == 1 ? kRwTargetAcceptance1d : kRwTargetAcceptanceMultid};
  double step = step_size;
  std::size_t accepted = 0;

  const auto total = static_cast<std::size_t>(warmup) + n_steps;
  for (std::size_t it = 0; it < total; ++it) {
    const bool warming = it < static_cast<std::size_t>(warmup);
    for (std::size_t d = 0; d < dim; ++d) proposal[d] = z[d] + step * rng.normal();
    const double lp_prop = model.log_density(proposal, data);
    const double log_ratio = std::isfinite(lp_prop) ? lp_prop - lp : -INFINITY;
    const bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) {
      z.swap(proposal);
      lp = lp_prop;
    }
    if (warming) {
      step = adapter.update(std::min(1.0, std::exp(log_ratio)));
      if (it + 1 == static_cast<std::size_t>(warmup)) step = adapter.final_step();
    } else {
      accepted += accept ? 1 : 0;
      model.constrain(z, draws.row(it - static_cast<std::size_t>(warmup)));
    }
  }
  draws.diagnostics.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(n_steps);
  draws.diagnostics.step_size = step;
  return draws;
}

/// One HMC transition as seen by an observer.
struct HmcTrajectory {
  std::vector<double> position_initial;
  std::vector<double> momentum_initial;
  std::vector<double> position_final;
  std::vector<double> momentum_final;
  double step_size = 0.0;
  int n_leapfrog = 0;
  double delta_h = 0.0;
  double accept_prob = 0.0;
  bool accepted = false;
  bool divergent = false;
};

using HmcObserver = std::function<void(const HmcTrajectory&)>;

/**
 * Leapfrog integration of the Hamiltonian -log p(z) + |p|^2 / 2 with an
 * identity mass matrix. `grad` must hold the gradient at z on entry and holds
 * the gradient at the final position on exit. Returns the final log density.
 */
inline double leapfrog(const GenerativeModel& model, const Dataset& data, std::span<double> z, std::span<double> p,
                       std::span<double> grad, double step, int n_steps) {
  const std::size_t dim = z.size();
  double lp = 0.0;
  for (int s = 0; s < n_steps; ++s) {
    for (std::size_t d = 0; d < dim; ++d) p[d] += 0.5 * step * grad[d];
    for (std::size_t d = 0; d < dim; ++d) z[d] += step * p[d];
    lp = model.log_density_gradient(z, data, grad);
    for (std::size_t d = 0; d < dim; ++d) p[d] += 0.5 * step * grad[d];
  }
  return lp;
}

inline double kinetic_energy(std::span<const double> p) {
  double k = 0.0;
  for (double v : p) k += 0.5 * v * v;
  return k;
}

/**
 * Fixed-trajectory Hamiltonian Monte Carlo.
 *
 * After warmup the step size is jittered uniformly within +/-10% of the
 * adapted value on each transition, which avoids trajectories that are
 * resonant with the target's natural frequencies.
 */
inline PosteriorDraws sample_hmc(const GenerativeModel& model, const Dataset& data, std::size_t n_steps,
                                 double step_size, int n_leapfrog, int warmup, RandomStream& rng,
                                 const HmcObserver& observer = {}) {
  if (n_steps < 1) fail(ErrorCode::kInvalidSpec, "n_steps must be >= 1");
  const std::size_t dim = model.dimension();
  auto draws = detail::empty_draws(model, to_string(SamplerKind::kHmc), n_steps, rng);

  auto z = detail::initial_point(model, data, rng);
  std::vector<double> grad(dim);
  double lp = model.log_density_gradient(z, data, grad);

  std::vector<double> z_new(dim);
  std::vector<double> p(dim);
  std::vector<double> p0(dim);
  std::vector<double> grad_new(dim);
  StepSizeAdapter adapter{step_size, kHmcTargetAcceptance};
  double step = step_size;
  std::size_t accepted = 0;
  std::int64_t divergences = 0;

  const auto total = static_cast<std::size_t>(warmup) + n_steps;
  for (std::size_t it = 0; it < total; ++it) {
    const bool warming = it < static_cast<std::size_t>(warmup);
    const double eps = warming ? step : step * (0.9 + 0.2 * rng.uniform());
    for (auto& v : p) v = rng.normal();
    p0 = p;
    z_new = z;
    grad_new = grad;
    const double lp_new = leapfrog(model, data, z_new, p, grad_new, eps, n_leapfrog);

    const double h0 = -lp + kinetic_energy(p0);
    const double h1 = -lp_new + kinetic_energy(p);
    double delta_h = h1 - h0;
    const bool divergent = !std::isfinite(delta_h) || delta_h > kDivergenceThreshold;
    if (!std::isfinite(delta_h)) delta_h = INFINITY;
    const double accept_prob = divergent ? 0.0 : std::min(1.0, std::exp(-delta_h));
    const bool accept = !divergent && rng.uniform() < accept_prob;

    if (observer) {
      HmcTrajectory t{z, p0, z_new, p, eps, n_leapfrog, delta_h, accept_prob, accept, divergent};
      observer(t);
    }
    if (accept) {
      z.swap(z_new);
      grad.swap(grad_new);
      lp = lp_new;
    }
    if (warming) {
      step = adapter.update(accept_prob);
      if (it + 1 == static_cast<std::size_t>(warmup)) step = adapter.final_step();
    } else {
      accepted += accept ? 1 : 0;
      divergences += divergent ? 1 : 0;
      model.constrain(z, draws.row(it - static_cast<std::size_t>(warmup)));
    }
  }
  draws.diagnostics.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(n_steps);
  draws.diagnostics.divergences = divergences;
  draws.diagnostics.step_size = step;
  return draws;
}

/// Product of independent Gaussians on the unconstrained scale.
struct GaussianApprox {
  std::vector<double> mean;
  std::vector<double> log_sd;
  int iterations = 0;
};

/**
 * Mean-field Gaussian variational fit by stochastic gradient ascent on the
 * evidence lower bound with single-sample reparameterized gradients.
 *
 * The step for each variational coordinate is
 *   lr * t^-1/2 / (1 + sqrt(s_t)),   s_t = 0.1 g_t^2 + 0.9 s_{t-1},
 * and the fit starts at mean 0, log-sd 0 on the unconstrained scale.
 */
inline GaussianApprox fit_meanfield_vi(const GenerativeModel& model, const Dataset& data, int iterations,
                                       double learning_rate, RandomStream& rng) {
  if (iterations < 1) fail(ErrorCode::kInvalidSpec, "vi iterations must be >= 1");
  const std::size_t dim = model.dimension();
  GaussianApprox q{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), iterations};
  std::vector<double> eps(dim);
  std::vector<double> z(dim);
  std::vector<double> grad(dim);
  std::vector<double> g_mean(dim);
  std::vector<double> g_log_sd(dim);
  std::vector<double> s_mean(dim, 0.0);
  std::vector<double> s_log_sd(dim, 0.0);

  for (int t = 1; t <= iterations; ++t) {
    for (std::size_t d = 0; d < dim; ++d) {
      eps[d] = rng.normal();
      z[d] = q.mean[d] + std::exp(q.log_sd[d]) * eps[d];
    }
    const double lp = model.log_density_gradient(z, data, grad);
    if (!std::isfinite(lp)) fail(ErrorCode::kDiverged, "evidence lower bound became non-finite");
    const double decay = learning_rate / std::sqrt(static_cast<double>(t));
    for (std::size_t d = 0; d < dim; ++d) {
      g_mean[d] = grad[d];
      g_log_sd[d] = grad[d] * eps[d] * std::exp(q.log_sd[d]) + 1.0;
      if (t == 1) {
        s_mean[d] = g_mean[d] * g_mean[d];
        s_log_sd[d] = g_log_sd[d] * g_log_sd[d];
      } else {
        s_mean[d] = 0.1 * g_mean[d] * g_mean[d] + 0.9 * s_mean[d];
        s_log_sd[d] = 0.1 * g_log_sd[d] * g_log_sd[d] + 0.9 * s_log_sd[d];
      }
      q.mean[d] += decay * g_mean[d] / (1.0 + std::sqrt(s_mean[d]));
      q.log_sd[d] += decay * g_log_sd[d] / (1.0 + std::sqrt(s_log_sd[d]));
    }
    if (!detail::all_finite(q.mean) || !detail::all_finite(q.log_sd)) {
      fail(ErrorCode::kDiverged, "variational parameters became non-finite");
    }
  }
  return q;
}

/// Exact independent draws from a fitted approximation, mapped to the constrained scale.
inline PosteriorDraws sample_approx(const GenerativeModel& model, const GaussianApprox& q, std::size_t L,
                                    RandomStream& rng) {
  const std::size_t dim = model.dimension();
  auto draws = detail::empty_draws(model, to_string(SamplerKind::kMeanfieldVi), L, rng);
  std::vector<double> z(dim);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t d = 0; d < dim; ++d) z[d] = q.mean[d] + std::exp(q.log_sd[d]) * rng.normal();
    model.constrain(z, draws.row(i));
  }
  return draws;
}

enum class CorruptionKind { kNone, kShift, kScale };

constexpr std::string_view to_string(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::kNone: return "none";
    case CorruptionKind::kShift: return "shift";
    case CorruptionKind::kScale: return "scale";
  }
  return "unknown";
}

/// A deliberate defect applied to posterior draws.
struct Corruption {
  CorruptionKind kind = CorruptionKind::kNone;
  double amount = 0.0;
  std::string target_quantity;

  friend bool operator==(const Corruption&, const Corruption&) = default;
};

/// Shift adds `amount` to the target coordinate; scale stretches its deviation from the draw mean.
inline PosteriorDraws corrupt(PosteriorDraws draws, const Corruption& c) {
  if (c.kind == CorruptionKind::kNone) return draws;
  if (c.kind == CorruptionKind::kScale && !(c.amount > 0.0)) {
    fail(ErrorCode::kInvalidSpec, "scale corruption needs a positive amount");
  }
  const std::size_t col = ParamView{*draws.names, draws.row(0)}.index_of(c.target_quantity);
  const std::size_t n = draws.size();
  const std::size_t dim = draws.dimension();
  if (c.kind == CorruptionKind::kShift) {
    for (std::size_t i = 0; i < n; ++i) draws.values[i * dim + col] += c.amount;
    return draws;
  }
  double center = 0.0;
  for (std::size_t i = 0; i < n; ++i) center += draws.values[i * dim + col];
  center /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = draws.values[i * dim + col];
    v = center + (v - center) * c.amount;
  }
  return draws;
}

}  // namespace sbc

#endif
