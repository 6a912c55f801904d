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

#ifndef SBC_RUNNER_HPP
#define SBC_RUNNER_HPP

#include <sbc/error.hpp>
#include <sbc/ess.hpp>
#include <sbc/model.hpp>
#include <sbc/models.hpp>
#include <sbc/random.hpp>
#include <sbc/rank_stats.hpp>
#include <sbc/samplers.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

/**
 * \file
 * \brief The replication harness.
 *
 * Replication i draws from streams (master_seed, i, tag), so its output does
 * not depend on the worker that ran it. Results are written into slots
 * indexed by replication and flattened in index order afterwards.
 */

namespace sbc {

using ModelSpec = std::variant<NormalNormalSpec, LinRegSpec, EightSchoolsSpec>;

enum class Thinning { kOff, kAlgorithm2 };

constexpr std::string_view to_string(Thinning t) { return t == Thinning::kOff ? "off" : "algorithm-2"; }

struct RunConfig {
  ModelSpec model = NormalNormalSpec{};
  SamplerConfig sampler;
  Corruption corruption;
  std::int64_t N = 2000;
  std::int64_t L = 99;
  Thinning thinning = Thinning::kOff;
  std::uint64_t master_seed = 20180412;
  std::int64_t max_chain_length = kDefaultMaxChainLength;
  /// Length L' of the first chain under thinning; 0 means 10 * L.
  std::int64_t initial_chain_length = 0;
  /// Failed replications tolerated before the run aborts, as a fraction of N.
  double max_failure_fraction = 0.01;
  std::string output_path;
  int worker_count_hint = 1;

  [[nodiscard]] std::int64_t first_chain_length() const {
    return initial_chain_length > 0 ? initial_chain_length : 10 * L;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ReplicationDiagnostics {
  std::int64_t replication_index = 0;
  double acceptance_rate = 1.0;
  std::int64_t divergences = 0;
  std::optional<double> n_eff;
  std::int64_t raw_chain_length = 0;
  bool rerun = false;
  bool cap_hit = false;
  /// n_eff was still below L after the single rerun.
  bool still_short = false;

  friend bool operator==(const ReplicationDiagnostics&, const ReplicationDiagnostics&) = default;
};

struct FailureRecord {
  std::int64_t replication_index = 0;
  std::string reason;

  friend bool operator==(const FailureRecord&, const FailureRecord&) = default;
};

inline constexpr std::string_view kFormatVersion = "1.0";

struct RunArtifact {
  std::string format_version{kFormatVersion};
  RunConfig config;
  std::vector<std::string> quantities;
  /// Sorted by replication, then by quantity order.
  std::vector<RankRecord> records;
  /// One entry per successful replication.
  std::vector<ReplicationDiagnostics> diagnostics;
  std::vector<FailureRecord> failures;
  std::string started_at;
  double elapsed_seconds = 0.0;

  [[nodiscard]] bool has_quantity(std::string_view q) const {
    return std::find(quantities.begin(), quantities.end(), q) != quantities.end();
  }

  /// Ranks of one quantity in replication order.
  [[nodiscard]] std::vector<std::int64_t> ranks(std::string_view quantity) const {
    if (!has_quantity(quantity)) fail(ErrorCode::kUnknownQuantity, "artifact has no quantity '" + std::string{quantity} + "'");
    std::vector<std::int64_t> out;
    for (const auto& r : records) {
      if (r.quantity == quantity) out.push_back(r.rank);
    }
    return out;
  }

  friend bool operator==(const RunArtifact&, const RunArtifact&) = default;
};

inline std::shared_ptr<const GenerativeModel> make_model(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::shared_ptr<const GenerativeModel> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NormalNormalSpec>) return make_normal_normal(s);
        else if constexpr (std::is_same_v<T, LinRegSpec>) return make_lin_reg(s);
        else return make_eight_schools(s);
      },
      spec);
}

/// Rejects configurations that cannot run; errors are ConfigError or InvalidSpec.
inline void validate(const RunConfig& config) {
  if (config.N < 1) fail(ErrorCode::kConfigError, "N must be >= 1");
  if (config.L < 1) fail(ErrorCode::kConfigError, "L must be >= 1");
  if (config.L >= (std::int64_t{1} << 31)) fail(ErrorCode::kConfigError, "L is too large");
  if (config.N >= (std::int64_t{1} << 32)) fail(ErrorCode::kConfigError, "N is too large");
  config.sampler.validate();
  if (config.thinning == Thinning::kAlgorithm2 && !is_mcmc(config.sampler.kind)) {
    fail(ErrorCode::kConfigError, "algorithm-2 thinning needs an MCMC sampler");
  }
  if (config.thinning == Thinning::kAlgorithm2 &&
      (config.first_chain_length() < config.L || config.max_chain_length < config.first_chain_length())) {
    fail(ErrorCode::kConfigError, "need L <= initial_chain_length <= max_chain_length");
  }
  if (config.sampler.kind == SamplerKind::kExactConjugate && !std::holds_alternative<NormalNormalSpec>(config.model)) {
    fail(ErrorCode::kConfigError, "exact-conjugate sampling is only available for the normal-normal model");
  }
  if (!(config.max_failure_fraction >= 0.0 && config.max_failure_fraction <= 1.0)) {
    fail(ErrorCode::kConfigError, "max_failure_fraction must lie in [0, 1]");
  }
  if (config.worker_count_hint < 1) fail(ErrorCode::kConfigError, "worker_count_hint must be >= 1");
  const auto model = make_model(config.model);
  if (config.corruption.kind != CorruptionKind::kNone) {
    const auto& names = model->parameter_names();
    if (std::find(names.begin(), names.end(), config.corruption.target_quantity) == names.end()) {
      fail(ErrorCode::kConfigError, "corruption target '" + config.corruption.target_quantity +
                                        "' is not a parameter of " + std::string{model->name()});
    }
    if (config.corruption.kind == CorruptionKind::kScale && !(config.corruption.amount > 0.0)) {
      fail(ErrorCode::kConfigError, "scale corruption needs a positive amount");
    }
  }
}

namespace detail {

inline PosteriorDraws run_chain(const GenerativeModel& model, const Dataset& data, const SamplerConfig& sampler,
                                std::size_t n_steps, RandomStream& rng) {
  if (sampler.kind == SamplerKind::kHmc) {
    return sample_hmc(model, data, n_steps, sampler.step_size, sampler.n_leapfrog, sampler.warmup, rng);
  }
  return sample_rw_metropolis(model, data, n_steps, sampler.step_size, sampler.warmup, rng);
}

struct ReplicationOutcome {
  std::vector<std::int64_t> ranks;
  ReplicationDiagnostics diagnostics;
  std::optional<std::string> failure;
};

inline ReplicationOutcome run_replication(const GenerativeModel& model, const RunConfig& config, std::int64_t index) {
  ReplicationOutcome out;
  out.diagnostics.replication_index = index;
  const auto rep = static_cast<std::uint32_t>(index);
  try {
    RandomStream prior_rng{config.master_seed, rep, StreamTag::kPrior};
    RandomStream data_rng{config.master_seed, rep, StreamTag::kData};
    const auto theta = model.draw_prior(prior_rng);
    const auto data = model.draw_data(theta, data_rng);
    const auto L = static_cast<std::size_t>(config.L);
    auto& diag = out.diagnostics;

    PosteriorDraws draws;
    switch (config.sampler.kind) {
      case SamplerKind::kExactConjugate: {
        RandomStream rng{config.master_seed, rep, StreamTag::kChain};
        draws = sample_exact_conjugate(model, data, L, rng);
        break;
      }
      case SamplerKind::kMeanfieldVi: {
        RandomStream rng{config.master_seed, rep, StreamTag::kVi};
        const auto q = fit_meanfield_vi(model, data, config.sampler.vi_iterations, config.sampler.vi_learning_rate, rng);
        draws = sample_approx(model, q, L, rng);
        break;
      }
      case SamplerKind::kRwMetropolis:
      case SamplerKind::kHmc: {
        RandomStream rng{config.master_seed, rep, StreamTag::kChain};
        if (config.thinning == Thinning::kOff) {
          draws = run_chain(model, data, config.sampler, L, rng);
          break;
        }
        draws = run_chain(model, data, config.sampler, static_cast<std::size_t>(config.first_chain_length()), rng);
        double n_eff = min_ess_across_quantities(draws, model.quantities());
        const auto plan = required_chain_length(static_cast<std::int64_t>(draws.size()), config.L, n_eff,
                                                config.max_chain_length);
        if (plan.rerun) {
          RandomStream rerun_rng{config.master_seed, rep, StreamTag::kChainRerun};
          draws = run_chain(model, data, config.sampler, static_cast<std::size_t>(plan.length), rerun_rng);
          n_eff = min_ess_across_quantities(draws, model.quantities());
        }
        diag.n_eff = n_eff;
        diag.rerun = plan.rerun;
        diag.cap_hit = plan.cap_hit;
        diag.still_short = n_eff < static_cast<double>(config.L);
        draws = thin_to(draws, L);
        break;
      }
    }
    diag.acceptance_rate = draws.diagnostics.acceptance_rate;
    diag.divergences = draws.diagnostics.divergences;
    diag.raw_chain_length = static_cast<std::int64_t>(draws.chain_length_raw);

    draws = corrupt(std::move(draws), config.corruption);
    const auto prior_view = theta.view();
    for (const auto& q : model.quantities()) {
      out.ranks.push_back(rank_statistic(draws.evaluate(q), q.evaluate(prior_view)));
    }
  } catch (const Error& e) {
    out.failure = e.what();
  }
  return out;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline RunArtifact run_replications(const RunConfig& config) {
  validate(config);
  const auto model = make_model(config.model);
  const auto started = std::chrono::system_clock::now();
  const auto clock_start = std::chrono::steady_clock::now();

  const auto n = static_cast<std::size_t>(config.N);
  std::vector<ReplicationOutcome> outcomes(n);
  const auto max_failures =
      static_cast<std::int64_t>(std::floor(config.max_failure_fraction * static_cast<double>(config.N)));
  std::atomic<std::size_t> next{0};
  std::atomic<std::int64_t> failures{0};
  std::atomic<bool> abort{false};

  const auto worker = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      outcomes[i] = run_replication(*model, config, static_cast<std::int64_t>(i));
      if (outcomes[i].failure && failures.fetch_add(1) + 1 > max_failures) abort = true;
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.worker_count_hint), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (abort) {
    fail(ErrorCode::kFailureRateExceeded, std::to_string(failures.load()) + " failed replications exceed the cap of " +
                                              std::to_string(max_failures));
  }

  RunArtifact artifact;
  artifact.config = config;
  for (const auto& q : model->quantities()) artifact.quantities.push_back(q.name);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = outcomes[i];
    if (o.failure) {
      artifact.failures.push_back({static_cast<std::int64_t>(i), *o.failure});
      continue;
    }
    artifact.diagnostics.push_back(o.diagnostics);
    for (std::size_t k = 0; k < o.ranks.size(); ++k) {
      artifact.records.push_back({static_cast<std::int64_t>(i), artifact.quantities[k], o.ranks[k], config.L,
                                  o.diagnostics.n_eff, o.diagnostics.raw_chain_length});
    }
  }
  artifact.started_at = utc_timestamp(started);
  artifact.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return artifact;
}

}  // namespace detail

/// Plain SBC: L posterior draws per replication, used as-is.
inline RunArtifact run_sbc(const RunConfig& config) {
  if (config.thinning != Thinning::kOff) fail(ErrorCode::kConfigError, "run_sbc expects thinning off");
  return detail::run_replications(config);
}

/// SBC over MCMC output: chain of L', ESS check, one rerun if short, thin to L.
inline RunArtifact run_sbc_mcmc(const RunConfig& config) {
  if (config.thinning != Thinning::kAlgorithm2) fail(ErrorCode::kConfigError, "run_sbc_mcmc expects algorithm-2 thinning");
  return detail::run_replications(config);
}

/// Dispatches on the configured thinning mode.
inline RunArtifact execute(const RunConfig& config) {
  return config.thinning == Thinning::kOff ? run_sbc(config) : run_sbc_mcmc(config);
}

}  // namespace sbc

#endif
