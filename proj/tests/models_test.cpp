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

#include <sbc/models.hpp>

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

namespace {

using sbc::Dataset;
using sbc::ErrorCode;
using sbc::GenerativeModel;
using sbc::RandomStream;
using sbc::StreamTag;

template <typename F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    FAIL() << "expected " << sbc::to_string(code);
  } catch (const sbc::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

std::vector<std::shared_ptr<const GenerativeModel>> all_models() {
  sbc::EightSchoolsSpec centered;
  centered.parameterization = sbc::Parameterization::kCentered;
  sbc::LinRegSpec misspecified;
  misspecified.prior_sd_beta = 1.0;
  return {sbc::make_normal_normal({0.3, 2.0, 0.7, 5}), sbc::make_lin_reg({}), sbc::make_lin_reg(misspecified),
          sbc::make_eight_schools({}), sbc::make_eight_schools(centered)};
}

// Central differences against the analytic gradient, at points drawn from the
// prior and jittered on the unconstrained scale.
TEST(Models, GradientMatchesFiniteDifferences) {
  for (const auto& model : all_models()) {
    SCOPED_TRACE(std::string{model->name()});
    const std::size_t dim = model->dimension();
    for (std::uint32_t point = 0; point < 50; ++point) {
      RandomStream prior{11, point, StreamTag::kPrior};
      RandomStream data_rng{11, point, StreamTag::kData};
      RandomStream jitter{11, point, StreamTag::kChain};
      const auto theta = model->draw_prior(prior);
      const auto data = model->draw_data(theta, data_rng);
      auto z = model->unconstrain(theta);
      for (auto& v : z) v += 0.3 * jitter.normal();

      std::vector<double> grad(dim);
      const double lp = model->log_density_gradient(z, data, grad);
      ASSERT_NEAR(lp, model->log_density(z, data), 1e-9 * std::max(1.0, std::abs(lp)));
      const double h = 1e-6;
      for (std::size_t d = 0; d < dim; ++d) {
        auto up = z;
        auto down = z;
        up[d] += h;
        down[d] -= h;
        const double fd = (model->log_density(up, data) - model->log_density(down, data)) / (2.0 * h);
        EXPECT_NEAR(grad[d], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "coordinate " << d << " point " << point;
      }
    }
  }
}

TEST(Models, ConstrainUnconstrainRoundTrip) {
  for (const auto& model : all_models()) {
    SCOPED_TRACE(std::string{model->name()});
    for (std::uint32_t i = 0; i < 200; ++i) {
      RandomStream rng{5, i, StreamTag::kPrior};
      const auto theta = model->draw_prior(rng);
      const auto back = model->constrain(model->unconstrain(theta));
      for (std::size_t d = 0; d < theta.size(); ++d) {
        EXPECT_NEAR(back[d], theta[d], 1e-12 * std::max(1.0, std::abs(theta[d])));
      }
    }
  }
}

TEST(NormalNormal, WorkedExamplePosterior) {
  const auto model = sbc::make_normal_normal({0.0, 1.0, 1.0, 1});
  const auto post = model->posterior(Dataset{{2.1}, {}});
  EXPECT_NEAR(post.mean, 1.05, 1e-12);
  EXPECT_NEAR(post.variance, 0.5, 1e-12);
  const auto symmetric = model->posterior(Dataset{{0.0}, {}});
  EXPECT_EQ(symmetric.mean, 0.0);
}

// Posterior moments by brute-force quadrature of prior x likelihood.
TEST(NormalNormal, PosteriorMatchesNumericalIntegration) {
  RandomStream rng{2024, 0, StreamTag::kPrior};
  for (int trial = 0; trial < 200; ++trial) {
    const double m0 = 4.0 * (rng.uniform() - 0.5);
    const double s0 = 0.2 + 3.0 * rng.uniform();
    const double s = 0.1 + 2.0 * rng.uniform();
    const int n = 1 + static_cast<int>(rng.uniform() * 10);
    const auto model = sbc::make_normal_normal({m0, s0, s, n});
    Dataset data;
    for (int i = 0; i < n; ++i) data.observations.push_back(m0 + s0 * rng.normal() + s * rng.normal());

    const auto log_joint = [&](double mu) {
      double lp = -0.5 * (mu - m0) * (mu - m0) / (s0 * s0);
      for (double y : data.observations) lp += -0.5 * (y - mu) * (y - mu) / (s * s);
      return lp;
    };
    // Locate the mode by golden-section search, then integrate +/- 40 widths around it.
    double lo = -50.0;
    double hi = 50.0;
    for (int it = 0; it < 200; ++it) {
      const double a = hi - (hi - lo) / std::numbers::phi;
      const double b = lo + (hi - lo) / std::numbers::phi;
      if (log_joint(a) > log_joint(b)) hi = b;
      else lo = a;
    }
    const double mode = 0.5 * (lo + hi);
    const double width = std::min(s0, s);
    const int points = 200000;
    const double a = mode - 40.0 * width;
    const double step = 80.0 * width / points;
    const double ref = log_joint(mode);
    double z0 = 0.0;
    double z1 = 0.0;
    double z2 = 0.0;
    for (int k = 0; k <= points; ++k) {
      const double mu = a + step * k;
      const double w = std::exp(log_joint(mu) - ref) * ((k == 0 || k == points) ? 0.5 : 1.0);
      z0 += w;
      z1 += w * mu;
      z2 += w * mu * mu;
    }
    const double mean = z1 / z0;
    const double var = z2 / z0 - mean * mean;
    const auto post = model->posterior(data);
    EXPECT_NEAR(post.mean, mean, 1e-4 * std::max(1.0, std::abs(mean)));
    EXPECT_NEAR(post.variance, var, 1e-4 * var);

    // log_density differs from the oracle only by a constant.
    const std::vector<double> z_a{mode};
    const std::vector<double> z_b{mode + width};
    EXPECT_NEAR(model->log_density(z_a, data) - model->log_density(z_b, data),
                log_joint(mode) - log_joint(mode + width), 1e-9);
  }
}

TEST(NormalNormal, PriorAndDataMonteCarlo) {
  const auto model = sbc::make_normal_normal({});
  RandomStream prior{1, 0, StreamTag::kPrior};
  RandomStream prior_again{1, 0, StreamTag::kPrior};
  EXPECT_EQ(model->draw_prior(prior), model->draw_prior(prior_again));

  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += model->draw_prior(prior)[0];
  EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));

  const auto wide = sbc::make_normal_normal({0.0, 1.0, 1.0, n});
  RandomStream data_rng{1, 0, StreamTag::kData};
  const auto data = wide->draw_data(sbc::ParamVector{wide->shared_names(), {0.0}}, data_rng);
  ASSERT_EQ(data.observations.size(), static_cast<std::size_t>(n));
  EXPECT_NEAR(sbc::testing::moments(data.observations).first, 0.0, 4.0 / std::sqrt(n));
}

TEST(NormalNormal, RejectsInvalidSpecs) {
  expect_error(ErrorCode::kInvalidSpec, [] { sbc::make_normal_normal({0.0, 0.0, 1.0, 1}); });
  expect_error(ErrorCode::kInvalidSpec, [] { sbc::make_normal_normal({0.0, 1.0, -1.0, 1}); });
  expect_error(ErrorCode::kInvalidSpec, [] { sbc::make_normal_normal({0.0, 1.0, 1.0, 0}); });
}

TEST(LinearRegression, NoiselessLineAndCovariates) {
  sbc::LinRegSpec spec;
  spec.n_obs = 3;
  spec.x = {1, 2, 3};
  const auto model = sbc::make_lin_reg(spec);
  RandomStream rng{1, 0, StreamTag::kData};
  const auto data = model->draw_data(sbc::ParamVector{model->shared_names(), {0.0, 1.0, 1e-9}}, rng);
  ASSERT_EQ(data.observations.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(data.observations[i], i + 1.0, 1e-6);
  EXPECT_EQ(data.fixed_covariates, spec.x);

  const auto default_x = sbc::make_lin_reg({})->spec().x;
  ASSERT_EQ(default_x.size(), 25u);
  EXPECT_DOUBLE_EQ(default_x.front(), 1.0 / 25.0);
  EXPECT_DOUBLE_EQ(default_x.back(), 1.0);
}

TEST(LinearRegression, GenerationPriorIsSeparateFromInferencePrior) {
  sbc::LinRegSpec spec;
  spec.prior_sd_beta = 1.0;
  spec.gen_prior_sd_beta = 10.0;
  const auto model = sbc::make_lin_reg(spec);
  RandomStream rng{3, 0, StreamTag::kPrior};
  std::vector<double> beta;
  std::vector<double> sigma;
  for (int i = 0; i < 20000; ++i) {
    const auto theta = model->draw_prior(rng);
    beta.push_back(theta["beta"]);
    sigma.push_back(theta["sigma"]);
  }
  EXPECT_NEAR(std::sqrt(sbc::testing::moments(beta).second), 10.0, 0.3);
  // Half-normal mean is scale * sqrt(2 / pi).
  EXPECT_NEAR(sbc::testing::moments(sigma).first, 5.0 * std::sqrt(2.0 / std::numbers::pi), 0.1);
}

TEST(LinearRegression, RejectsInvalidSpecs) {
  sbc::LinRegSpec bad_x;
  bad_x.x = {1.0, 2.0};
  expect_error(ErrorCode::kInvalidSpec, [&] { sbc::make_lin_reg(bad_x); });
  sbc::LinRegSpec bad_scale;
  bad_scale.noise_sd_prior_scale = 0.0;
  expect_error(ErrorCode::kInvalidSpec, [&] { sbc::make_lin_reg(bad_scale); });
}

TEST(EightSchools, NamesAndQuantities) {
  const auto ncp = sbc::make_eight_schools({});
  EXPECT_EQ(ncp->parameter_names()[2], "eta[1]");
  ASSERT_EQ(ncp->quantities().size(), 18u);
  EXPECT_EQ(ncp->quantities()[10].name, "theta[1]");

  sbc::EightSchoolsSpec spec;
  spec.parameterization = sbc::Parameterization::kCentered;
  const auto cp = sbc::make_eight_schools(spec);
  EXPECT_EQ(cp->parameter_names()[2], "theta[1]");
  EXPECT_EQ(cp->quantities().size(), 10u);

  RandomStream rng{8, 0, StreamTag::kPrior};
  const auto theta = cp->draw_prior(rng);
  EXPECT_EQ(sbc::eval_quantity(cp->quantities()[2], theta), theta[2]);
  EXPECT_DOUBLE_EQ(sbc::eval_quantity(sbc::Quantity::log_of("tau"), sbc::ParamVector{cp->shared_names(),
      {0.0, 1.0, 0, 0, 0, 0, 0, 0, 0, 0}}), 0.0);
}

TEST(EightSchools, TauIsPositiveOnEveryPriorDraw) {
  const auto model = sbc::make_eight_schools({});
  for (std::uint32_t i = 0; i < 5000; ++i) {
    RandomStream rng{4, i, StreamTag::kPrior};
    ASSERT_GT(model->draw_prior(rng)["tau"], 0.0);
  }
}

// Same streams give the same school effects, hence identical datasets.
TEST(EightSchools, ParameterizationsShareTheJoint) {
  sbc::EightSchoolsSpec spec;
  spec.parameterization = sbc::Parameterization::kCentered;
  const auto cp = sbc::make_eight_schools(spec);
  const auto ncp = sbc::make_eight_schools({});
  for (std::uint32_t i = 0; i < 100; ++i) {
    RandomStream a{6, i, StreamTag::kPrior};
    RandomStream b{6, i, StreamTag::kPrior};
    const auto theta_cp = cp->draw_prior(a);
    const auto theta_ncp = ncp->draw_prior(b);
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_NEAR(theta_cp[2 + j], sbc::eval_quantity(ncp->quantities()[10 + j], theta_ncp), 1e-12);
    }
    RandomStream da{6, i, StreamTag::kData};
    RandomStream db{6, i, StreamTag::kData};
    const auto ya = cp->draw_data(theta_cp, da);
    const auto yb = ncp->draw_data(theta_ncp, db);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(ya.observations[j], yb.observations[j], 1e-9);
  }
}

// The non-centered density equals the centered one at theta = mu + tau eta plus
// the log-Jacobian J log tau of that map.
TEST(EightSchools, DensitiesAgreeUnderReparameterization) {
  sbc::EightSchoolsSpec spec;
  spec.parameterization = sbc::Parameterization::kCentered;
  const auto cp = sbc::make_eight_schools(spec);
  const auto ncp = sbc::make_eight_schools({});
  for (std::uint32_t i = 0; i < 100; ++i) {
    RandomStream rng{9, i, StreamTag::kChain};
    std::vector<double> z_ncp(10);
    for (auto& v : z_ncp) v = 2.0 * rng.normal();
    const Dataset data{{28, 8, -3, 7, -1, 1, 18, 12}, spec.sigma};
    const double tau = std::exp(z_ncp[1]);
    auto z_cp = z_ncp;
    for (std::size_t j = 0; j < 8; ++j) z_cp[2 + j] = z_ncp[0] + tau * z_ncp[2 + j];
    const double lhs = ncp->log_density(z_ncp, data);
    const double rhs = cp->log_density(z_cp, data) + 8.0 * z_ncp[1];
    EXPECT_NEAR(lhs, rhs, 1e-8 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(EightSchools, RejectsInvalidSpecs) {
  sbc::EightSchoolsSpec wrong_j;
  wrong_j.J = 7;
  expect_error(ErrorCode::kInvalidSpec, [&] { sbc::make_eight_schools(wrong_j); });
  sbc::EightSchoolsSpec bad_sigma;
  bad_sigma.sigma[3] = -1.0;
  expect_error(ErrorCode::kInvalidSpec, [&] { sbc::make_eight_schools(bad_sigma); });
}

}  // namespace
