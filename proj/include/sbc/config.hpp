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

#ifndef SBC_CONFIG_HPP
#define SBC_CONFIG_HPP

#include <sbc/error.hpp>
#include <sbc/runner.hpp>

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

/**
 * \file
 * \brief JSON form of RunConfig.
 *
 * The document mirrors the struct field for field. Missing keys keep their
 * defaults; unknown keys and wrongly typed values are ConfigErrors.
 */

namespace sbc {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(ErrorCode::kConfigError, std::string{where} + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(ErrorCode::kConfigError, "unknown key '" + key + "' in " + std::string{where});
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    if constexpr (std::is_integral_v<T>) {
      if (!j.at(key).is_number_integer()) fail(ErrorCode::kConfigError, std::string{"'"} + key + "' must be an integer");
    }
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, std::string{"bad value for '"} + key + "': " + e.what());
  }
}

template <typename Enum, std::size_t N>
Enum parse_enum(const json& j, const char* key, Enum fallback, const std::pair<std::string_view, Enum> (&table)[N]) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) fail(ErrorCode::kConfigError, std::string{"'"} + key + "' must be a string");
  const auto text = j.at(key).get<std::string>();
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  fail(ErrorCode::kConfigError, "unknown " + std::string{key} + " '" + text + "'");
}

inline constexpr std::pair<std::string_view, SamplerKind> kSamplerKinds[] = {
    {"exact-conjugate", SamplerKind::kExactConjugate},
    {"rw-metropolis", SamplerKind::kRwMetropolis},
    {"hmc", SamplerKind::kHmc},
    {"meanfield-vi", SamplerKind::kMeanfieldVi}};

inline constexpr std::pair<std::string_view, CorruptionKind> kCorruptionKinds[] = {
    {"none", CorruptionKind::kNone}, {"shift", CorruptionKind::kShift}, {"scale", CorruptionKind::kScale}};

inline constexpr std::pair<std::string_view, Thinning> kThinningModes[] = {{"off", Thinning::kOff},
                                                                           {"algorithm-2", Thinning::kAlgorithm2}};

inline constexpr std::pair<std::string_view, Parameterization> kParameterizations[] = {
    {"centered", Parameterization::kCentered}, {"non-centered", Parameterization::kNonCentered}};

}  // namespace detail

inline json model_spec_to_json(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NormalNormalSpec>) {
          return {{"kind", "normal-normal"},
                  {"prior_mean", s.prior_mean},
                  {"prior_sd", s.prior_sd},
                  {"likelihood_sd", s.likelihood_sd},
                  {"n_obs", s.n_obs}};
        } else if constexpr (std::is_same_v<T, LinRegSpec>) {
          return {{"kind", "linear-regression"},
                  {"n_obs", s.n_obs},
                  {"x", s.x},
                  {"prior_sd_alpha", s.prior_sd_alpha},
                  {"prior_sd_beta", s.prior_sd_beta},
                  {"noise_sd_prior_scale", s.noise_sd_prior_scale},
                  {"gen_prior_sd_beta", s.gen_prior_sd_beta}};
        } else {
          return {{"kind", "eight-schools"},
                  {"J", s.J},
                  {"sigma", s.sigma},
                  {"parameterization",
                   s.parameterization == Parameterization::kCentered ? "centered" : "non-centered"},
                  {"mu_prior_sd", s.mu_prior_sd},
                  {"tau_prior_scale", s.tau_prior_scale}};
        }
      },
      spec);
}

inline ModelSpec model_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    fail(ErrorCode::kConfigError, "model needs a string 'kind'");
  }
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "normal-normal") {
    detail::reject_unknown_keys(j, "model", {"kind", "prior_mean", "prior_sd", "likelihood_sd", "n_obs"});
    NormalNormalSpec s;
    detail::read_field(j, "prior_mean", s.prior_mean);
    detail::read_field(j, "prior_sd", s.prior_sd);
    detail::read_field(j, "likelihood_sd", s.likelihood_sd);
    detail::read_field(j, "n_obs", s.n_obs);
    return s;
  }
  if (kind == "linear-regression") {
    detail::reject_unknown_keys(j, "model", {"kind", "n_obs", "x", "prior_sd_alpha", "prior_sd_beta",
                                             "noise_sd_prior_scale", "gen_prior_sd_beta"});
    LinRegSpec s;
    detail::read_field(j, "n_obs", s.n_obs);
    detail::read_field(j, "x", s.x);
    detail::read_field(j, "prior_sd_alpha", s.prior_sd_alpha);
    detail::read_field(j, "prior_sd_beta", s.prior_sd_beta);
    detail::read_field(j, "noise_sd_prior_scale", s.noise_sd_prior_scale);
    detail::read_field(j, "gen_prior_sd_beta", s.gen_prior_sd_beta);
    return s;
  }
  if (kind == "eight-schools") {
    detail::reject_unknown_keys(j, "model", {"kind", "J", "sigma", "parameterization", "mu_prior_sd", "tau_prior_scale"});
    EightSchoolsSpec s;
    detail::read_field(j, "J", s.J);
    detail::read_field(j, "sigma", s.sigma);
    s.parameterization = detail::parse_enum(j, "parameterization", s.parameterization, detail::kParameterizations);
    detail::read_field(j, "mu_prior_sd", s.mu_prior_sd);
    detail::read_field(j, "tau_prior_scale", s.tau_prior_scale);
    return s;
  }
  fail(ErrorCode::kConfigError, "unknown model kind '" + kind + "'");
}

inline json to_json(const RunConfig& c) {
  return {{"model", model_spec_to_json(c.model)},
          {"sampler",
           {{"kind", to_string(c.sampler.kind)},
            {"step_size", c.sampler.step_size},
            {"n_leapfrog", c.sampler.n_leapfrog},
            {"vi_iterations", c.sampler.vi_iterations},
            {"vi_learning_rate", c.sampler.vi_learning_rate},
            {"warmup", c.sampler.warmup}}},
          {"corruption",
           {{"kind", to_string(c.corruption.kind)},
            {"amount", c.corruption.amount},
            {"target_quantity", c.corruption.target_quantity}}},
          {"N", c.N},
          {"L", c.L},
          {"thinning", to_string(c.thinning)},
          {"master_seed", c.master_seed},
          {"max_chain_length", c.max_chain_length},
          {"initial_chain_length", c.initial_chain_length},
          {"max_failure_fraction", c.max_failure_fraction},
          {"output_path", c.output_path},
          {"worker_count_hint", c.worker_count_hint}};
}

inline RunConfig run_config_from_json(const json& j) {
  detail::reject_unknown_keys(j, "run config",
                              {"model", "sampler", "corruption", "N", "L", "thinning", "master_seed", "max_chain_length",
                               "initial_chain_length", "max_failure_fraction", "output_path", "worker_count_hint"});
  RunConfig c;
  if (j.contains("model")) c.model = model_spec_from_json(j.at("model"));
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    detail::reject_unknown_keys(s, "sampler",
                                {"kind", "step_size", "n_leapfrog", "vi_iterations", "vi_learning_rate", "warmup"});
    c.sampler.kind = detail::parse_enum(s, "kind", c.sampler.kind, detail::kSamplerKinds);
    detail::read_field(s, "step_size", c.sampler.step_size);
    detail::read_field(s, "n_leapfrog", c.sampler.n_leapfrog);
    detail::read_field(s, "vi_iterations", c.sampler.vi_iterations);
    detail::read_field(s, "vi_learning_rate", c.sampler.vi_learning_rate);
    detail::read_field(s, "warmup", c.sampler.warmup);
  }
  if (j.contains("corruption")) {
    const auto& s = j.at("corruption");
    detail::reject_unknown_keys(s, "corruption", {"kind", "amount", "target_quantity"});
    c.corruption.kind = detail::parse_enum(s, "kind", c.corruption.kind, detail::kCorruptionKinds);
    detail::read_field(s, "amount", c.corruption.amount);
    detail::read_field(s, "target_quantity", c.corruption.target_quantity);
  }
  detail::read_field(j, "N", c.N);
  detail::read_field(j, "L", c.L);
  c.thinning = detail::parse_enum(j, "thinning", c.thinning, detail::kThinningModes);
  detail::read_field(j, "master_seed", c.master_seed);
  detail::read_field(j, "max_chain_length", c.max_chain_length);
  detail::read_field(j, "initial_chain_length", c.initial_chain_length);
  detail::read_field(j, "max_failure_fraction", c.max_failure_fraction);
  detail::read_field(j, "output_path", c.output_path);
  detail::read_field(j, "worker_count_hint", c.worker_count_hint);
  return c;
}

/// Reads and validates a config file.
inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in{path};
  if (!in) fail(ErrorCode::kConfigError, "cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigError, "config is not valid JSON: " + std::string{e.what()});
  }
  auto config = run_config_from_json(j);
  validate(config);
  return config;
}

}  // namespace sbc

#endif
