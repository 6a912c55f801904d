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

#ifndef SBC_MODELS_HPP
#define SBC_MODELS_HPP

#include <sbc/detail/math.hpp>
#include <sbc/model.hpp>

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

/**
 * \file
 * \brief The built-in reference models.
 *
 * Positive parameters (sigma, tau) are log-transformed on the unconstrained
 * scale; every log density below carries the matching +log(x) Jacobian term.
 */

namespace sbc {

struct NormalNormalSpec {
  double prior_mean = 0.0;
  double prior_sd = 1.0;
  double likelihood_sd = 1.0;
  int n_obs = 1;

  friend bool operator==(const NormalNormalSpec&, const NormalNormalSpec&) = default;
};

struct LinRegSpec {
  int n_obs = 25;
  /// Empty means x_n = n / n_obs for n = 1..n_obs.
  std::vector<double> x;
  double prior_sd_alpha = 10.0;
  double prior_sd_beta = 10.0;
  double noise_sd_prior_scale = 5.0;
  double gen_prior_sd_beta = 10.0;

  friend bool operator==(const LinRegSpec&, const LinRegSpec&) = default;
};

enum class Parameterization { kCentered, kNonCentered };

struct EightSchoolsSpec {
  int J = 8;
  std::vector<double> sigma{15, 10, 16, 11, 9, 11, 10, 18};
  Parameterization parameterization = Parameterization::kNonCentered;
  double mu_prior_sd = 5.0;
  double tau_prior_scale = 5.0;

  friend bool operator==(const EightSchoolsSpec&, const EightSchoolsSpec&) = default;
};

/// Closed-form normal posterior.
struct NormalPosterior {
  double mean;
  double variance;
};

/// mu ~ N(m0, s0^2), y_i | mu ~ N(mu, s^2).
class NormalNormalModel final : public GenerativeModel {
 public:
  explicit NormalNormalModel(const NormalNormalSpec& spec)
      : GenerativeModel{{"mu"}, coordinate_quantities({"mu"})}, spec_{spec} {
    if (!(spec.prior_sd > 0.0) || !(spec.likelihood_sd > 0.0)) {
      fail(ErrorCode::kInvalidSpec, "normal-normal standard deviations must be positive");
    }
    if (spec.n_obs < 1) fail(ErrorCode::kInvalidSpec, "normal-normal needs n_obs >= 1");
    if (!std::isfinite(spec.prior_mean)) fail(ErrorCode::kInvalidSpec, "prior mean must be finite");
  }

  [[nodiscard]] std::string_view name() const override { return "normal-normal"; }
  [[nodiscard]] std::size_t data_size() const override { return static_cast<std::size_t>(spec_.n_obs); }
  [[nodiscard]] const NormalNormalSpec& spec() const { return spec_; }

  [[nodiscard]] ParamVector draw_prior(RandomStream& rng) const override {
    return {shared_names(), {rng.normal(spec_.prior_mean, spec_.prior_sd)}};
  }

  using GenerativeModel::constrain;
  using GenerativeModel::unconstrain;

  void unconstrain(std::span<const double> theta, std::span<double> z) const override { z[0] = theta[0]; }
  void constrain(std::span<const double> z, std::span<double> theta) const override { theta[0] = z[0]; }

  [[nodiscard]] double log_density(std::span<const double> z, const Dataset& data) const override {
    double lp = detail::normal_lpdf(z[0], spec_.prior_mean, spec_.prior_sd);
    for (double y : data.observations) lp += detail::normal_lpdf(y, z[0], spec_.likelihood_sd);
    return lp;
  }

  double log_density_gradient(std::span<const double> z, const Dataset& data,
                              std::span<double> grad) const override {
    const double mu = z[0];
    const double prior_var = spec_.prior_sd * spec_.prior_sd;
    const double lik_var = spec_.likelihood_sd * spec_.likelihood_sd;
    double g = -(mu - spec_.prior_mean) / prior_var;
    for (double y : data.observations) g += (y - mu) / lik_var;
    grad[0] = g;
    return log_density(z, data);
  }

  /// Precision-weighted conjugate update.
  [[nodiscard]] NormalPosterior posterior(const Dataset& data) const {
    const double prior_precision = 1.0 / (spec_.prior_sd * spec_.prior_sd);
    const double lik_precision = 1.0 / (spec_.likelihood_sd * spec_.likelihood_sd);
    double sum_y = 0.0;
    for (double y : data.observations) sum_y += y;
    const double precision = prior_precision + static_cast<double>(data.observations.size()) * lik_precision;
    return {(spec_.prior_mean * prior_precision + sum_y * lik_precision) / precision, 1.0 / precision};
  }

 protected:
  [[nodiscard]] Dataset simulate_data(std::span<const double> theta, RandomStream& rng) const override {
    Dataset data;
    data.observations.resize(data_size());
    for (auto& y : data.observations) y = rng.normal(theta[0], spec_.likelihood_sd);
    return data;
  }

 private:
  NormalNormalSpec spec_;
};

/**
 * y_n = alpha + beta * x_n + eps_n, eps_n ~ N(0, sigma^2).
 *
 * The prior simulator draws beta with `gen_prior_sd_beta` while the log
 * density uses `prior_sd_beta`; equal values give a self-consistent model.
 */
class LinearRegressionModel final : public GenerativeModel {
 public:
  explicit LinearRegressionModel(LinRegSpec spec)
      : GenerativeModel{{"alpha", "beta", "sigma"}, coordinate_quantities({"alpha", "beta", "sigma"})},
        spec_{std::move(spec)} {
    if (spec_.n_obs < 1) fail(ErrorCode::kInvalidSpec, "linear regression needs n_obs >= 1");
    if (!(spec_.prior_sd_alpha > 0.0) || !(spec_.prior_sd_beta > 0.0) || !(spec_.noise_sd_prior_scale > 0.0) ||
        !(spec_.gen_prior_sd_beta > 0.0)) {
      fail(ErrorCode::kInvalidSpec, "linear regression scales must be positive");
    }
    if (spec_.x.empty()) {
      for (int n = 1; n <= spec_.n_obs; ++n) spec_.x.push_back(static_cast<double>(n) / spec_.n_obs);
    }
    if (spec_.x.size() != static_cast<std::size_t>(spec_.n_obs)) {
      fail(ErrorCode::kInvalidSpec, "covariate count must equal n_obs");
    }
    if (!detail::all_finite(spec_.x)) fail(ErrorCode::kInvalidSpec, "covariates must be finite");
  }

  [[nodiscard]] std::string_view name() const override { return "linear-regression"; }
  [[nodiscard]] std::size_t data_size() const override { return static_cast<std::size_t>(spec_.n_obs); }
  [[nodiscard]] const LinRegSpec& spec() const { return spec_; }

  [[nodiscard]] ParamVector draw_prior(RandomStream& rng) const override {
    const double alpha = rng.normal(0.0, spec_.prior_sd_alpha);
    const double beta = rng.normal(0.0, spec_.gen_prior_sd_beta);
    const double sigma = std::abs(rng.normal(0.0, spec_.noise_sd_prior_scale));
    return {shared_names(), {alpha, beta, sigma}};
  }

  using GenerativeModel::constrain;
  using GenerativeModel::unconstrain;

  void unconstrain(std::span<const double> theta, std::span<double> z) const override {
    z[0] = theta[0];
    z[1] = theta[1];
    z[2] = std::log(theta[2]);
  }
  void constrain(std::span<const double> z, std::span<double> theta) const override {
    theta[0] = z[0];
    theta[1] = z[1];
    theta[2] = std::exp(z[2]);
  }

  [[nodiscard]] double log_density(std::span<const double> z, const Dataset& data) const override {
    const double sigma = std::exp(z[2]);
    double lp = detail::normal_lpdf(z[0], 0.0, spec_.prior_sd_alpha) +
                detail::normal_lpdf(z[1], 0.0, spec_.prior_sd_beta) +
                detail::half_normal_lpdf(sigma, spec_.noise_sd_prior_scale) + z[2];
    for (std::size_t n = 0; n < data.observations.size(); ++n) {
      lp += detail::normal_lpdf(data.observations[n], z[0] + z[1] * spec_.x[n], sigma);
    }
    return lp;
  }

  double log_density_gradient(std::span<const double> z, const Dataset& data,
                              std::span<double> grad) const override {
    const double sigma = std::exp(z[2]);
    const double inv_var = 1.0 / (sigma * sigma);
    double sum_r = 0.0;
    double sum_rx = 0.0;
    double sum_r2 = 0.0;
    for (std::size_t n = 0; n < data.observations.size(); ++n) {
      const double r = data.observations[n] - z[0] - z[1] * spec_.x[n];
      sum_r += r;
      sum_rx += r * spec_.x[n];
      sum_r2 += r * r;
    }
    const auto n_obs = static_cast<double>(data.observations.size());
    const double scale2 = spec_.noise_sd_prior_scale * spec_.noise_sd_prior_scale;
    grad[0] = -z[0] / (spec_.prior_sd_alpha * spec_.prior_sd_alpha) + sum_r * inv_var;
    grad[1] = -z[1] / (spec_.prior_sd_beta * spec_.prior_sd_beta) + sum_rx * inv_var;
    grad[2] = -sigma * sigma / scale2 + 1.0 - n_obs + sum_r2 * inv_var;

    return detail::normal_lpdf(z[0], 0.0, spec_.prior_sd_alpha) +
           detail::normal_lpdf(z[1], 0.0, spec_.prior_sd_beta) +
           detail::half_normal_lpdf(sigma, spec_.noise_sd_prior_scale) + z[2] - n_obs * detail::kHalfLogTwoPi -
           n_obs * z[2] - 0.5 * sum_r2 * inv_var;
  }

 protected:
  [[nodiscard]] Dataset simulate_data(std::span<const double> theta, RandomStream& rng) const override {
    Dataset data;
    data.fixed_covariates = spec_.x;
    data.observations.resize(data_size());
    for (std::size_t n = 0; n < data.observations.size(); ++n) {
      data.observations[n] = rng.normal(theta[0] + theta[1] * spec_.x[n], theta[2]);
    }
    return data;
  }

 private:
  LinRegSpec spec_;
};

/**
 * Hierarchical eight-schools model with known per-school standard errors.
 *
 * Centered: parameters (mu, tau, theta[1..J]) with theta_j ~ N(mu, tau^2).
 * Non-centered: parameters (mu, tau, eta[1..J]) with eta_j ~ N(0, 1) and
 * theta_j = mu + tau * eta_j exposed as derived quantities.
 * Priors: mu ~ N(0, mu_prior_sd^2), tau ~ half-normal(0, tau_prior_scale^2).
 */
class EightSchoolsModel final : public GenerativeModel {
 public:
  explicit EightSchoolsModel(const EightSchoolsSpec& spec)
      : GenerativeModel{make_names(spec), make_quantities(spec)}, spec_{spec} {
    if (spec.J != 8 || spec.sigma.size() != 8) fail(ErrorCode::kInvalidSpec, "eight schools needs J = 8 and 8 sigmas");
    for (double s : spec.sigma) {
      if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::kInvalidSpec, "school sigmas must be positive");
    }
    if (!(spec.mu_prior_sd > 0.0) || !(spec.tau_prior_scale > 0.0)) {
      fail(ErrorCode::kInvalidSpec, "eight schools prior scales must be positive");
    }
  }

  [[nodiscard]] std::string_view name() const override { return "eight-schools"; }
  [[nodiscard]] std::size_t data_size() const override { return 8; }
  [[nodiscard]] const EightSchoolsSpec& spec() const { return spec_; }
  [[nodiscard]] bool centered() const { return spec_.parameterization == Parameterization::kCentered; }

  /// Both parameterizations consume the stream identically: mu, tau, then one
  /// standard normal per school, so equal streams give equal school effects.
  [[nodiscard]] ParamVector draw_prior(RandomStream& rng) const override {
    std::vector<double> theta(dimension());
    theta[0] = rng.normal(0.0, spec_.mu_prior_sd);
    theta[1] = std::abs(rng.normal(0.0, spec_.tau_prior_scale));
    for (std::size_t j = 0; j < 8; ++j) {
      const double eta = rng.normal();
      theta[2 + j] = centered() ? theta[0] + theta[1] * eta : eta;
    }
    return {shared_names(), std::move(theta)};
  }

  using GenerativeModel::constrain;
  using GenerativeModel::unconstrain;

  void unconstrain(std::span<const double> theta, std::span<double> z) const override {
    std::copy(theta.begin(), theta.end(), z.begin());
    z[1] = std::log(theta[1]);
  }
  void constrain(std::span<const double> z, std::span<double> theta) const override {
    std::copy(z.begin(), z.end(), theta.begin());
    theta[1] = std::exp(z[1]);
  }

  [[nodiscard]] double log_density(std::span<const double> z, const Dataset& data) const override {
    const double mu = z[0];
    const double tau = std::exp(z[1]);
    double lp = detail::normal_lpdf(mu, 0.0, spec_.mu_prior_sd) + detail::half_normal_lpdf(tau, spec_.tau_prior_scale) +
                z[1];
    for (std::size_t j = 0; j < 8; ++j) {
      const double coord = z[2 + j];
      if (centered()) {
        lp += detail::normal_lpdf(coord, mu, tau) + detail::normal_lpdf(data.observations[j], coord, spec_.sigma[j]);
      } else {
        lp += detail::normal_lpdf(coord, 0.0, 1.0) +
              detail::normal_lpdf(data.observations[j], mu + tau * coord, spec_.sigma[j]);
      }
    }
    return lp;
  }

  double log_density_gradient(std::span<const double> z, const Dataset& data,
                              std::span<double> grad) const override {
    const double mu = z[0];
    const double tau = std::exp(z[1]);
    const double scale2 = spec_.tau_prior_scale * spec_.tau_prior_scale;
    grad[0] = -mu / (spec_.mu_prior_sd * spec_.mu_prior_sd);
    grad[1] = -tau * tau / scale2 + 1.0;
    for (std::size_t j = 0; j < 8; ++j) {
      const double coord = z[2 + j];
      const double inv_var_y = 1.0 / (spec_.sigma[j] * spec_.sigma[j]);
      if (centered()) {
        const double d = (coord - mu) / tau;
        grad[0] += d / tau;
        grad[1] += -1.0 + d * d;
        grad[2 + j] = -d / tau + (data.observations[j] - coord) * inv_var_y;
      } else {
        const double r = data.observations[j] - mu - tau * coord;
        grad[0] += r * inv_var_y;
        grad[1] += r * tau * coord * inv_var_y;
        grad[2 + j] = -coord + r * tau * inv_var_y;
      }
    }
    return log_density(z, data);
  }

 protected:
  [[nodiscard]] Dataset simulate_data(std::span<const double> theta, RandomStream& rng) const override {
    Dataset data;
    data.fixed_covariates = spec_.sigma;
    data.observations.resize(8);
    for (std::size_t j = 0; j < 8; ++j) {
      const double effect = centered() ? theta[2 + j] : theta[0] + theta[1] * theta[2 + j];
      data.observations[j] = rng.normal(effect, spec_.sigma[j]);
    }
    return data;
  }

 private:
  static Names make_names(const EightSchoolsSpec& spec) {
    Names names{"mu", "tau"};
    const std::string stem = spec.parameterization == Parameterization::kCentered ? "theta[" : "eta[";
    for (int j = 1; j <= 8; ++j) names.push_back(stem + std::to_string(j) + "]");
    return names;
  }

  static std::vector<Quantity> make_quantities(const EightSchoolsSpec& spec) {
    auto quantities = coordinate_quantities(make_names(spec));
    if (spec.parameterization == Parameterization::kNonCentered) {
      for (std::size_t j = 0; j < 8; ++j) {
        quantities.push_back({"theta[" + std::to_string(j + 1) + "]",
                              [j](const ParamView& p) { return p[0] + p[1] * p[2 + j]; }});
      }
    }
    return quantities;
  }

  EightSchoolsSpec spec_;
};

inline std::shared_ptr<const NormalNormalModel> make_normal_normal(const NormalNormalSpec& spec) {
  return std::make_shared<const NormalNormalModel>(spec);
}

inline std::shared_ptr<const LinearRegressionModel> make_lin_reg(const LinRegSpec& spec) {
  return std::make_shared<const LinearRegressionModel>(spec);
}

inline std::shared_ptr<const EightSchoolsModel> make_eight_schools(const EightSchoolsSpec& spec) {
  return std::make_shared<const EightSchoolsModel>(spec);
}

}  // namespace sbc

#endif
