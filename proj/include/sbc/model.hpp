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

#ifndef SBC_MODEL_HPP
#define SBC_MODEL_HPP

#include <sbc/detail/math.hpp>
#include <sbc/error.hpp>
#include <sbc/random.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

/**
 * \file
 * \brief Generative-model and posterior-draw contracts.
 *
 * Models expose two scales. The constrained scale is what users see and what
 * quantities are evaluated on. The unconstrained scale is R^d; samplers work
 * there exclusively, and `log_density` includes the log-Jacobian of the
 * constraining map so that it is a proper density on R^d.
 */

namespace sbc {

using Names = std::vector<std::string>;

/// Non-owning view of one parameter vector with its labels.
class ParamView {
 public:
  ParamView(const Names& names, std::span<const double> values) : names_{&names}, values_{values} {}

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const Names& names() const { return *names_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

  /// Index of a label; throws UnknownParameter when absent.
  [[nodiscard]] std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_->size(); ++i) {
      if ((*names_)[i] == name) return i;
    }
    fail(ErrorCode::kUnknownParameter, "no parameter named '" + std::string{name} + "'");
  }

  [[nodiscard]] double operator[](std::string_view name) const { return values_[index_of(name)]; }

 private:
  const Names* names_;
  std::span<const double> values_;
};

/// Owning parameter vector (theta). Names are shared between all vectors of a model.
class ParamVector {
 public:
  ParamVector(std::shared_ptr<const Names> names, std::vector<double> values)
      : names_{std::move(names)}, values_{std::move(values)} {
    if (!names_ || names_->empty()) fail(ErrorCode::kInvalidSpec, "parameter vector needs at least one name");
    if (names_->size() != values_.size()) fail(ErrorCode::kInvalidSpec, "names and values differ in length");
    std::unordered_set<std::string_view> seen;
    for (const auto& n : *names_) {
      if (!seen.insert(n).second) fail(ErrorCode::kInvalidSpec, "duplicate parameter name '" + n + "'");
    }
  }

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const Names& names() const { return *names_; }
  [[nodiscard]] const std::shared_ptr<const Names>& shared_names() const { return names_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] ParamView view() const { return {*names_, values_}; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] double operator[](std::string_view name) const { return view()[name]; }
  [[nodiscard]] bool finite() const { return detail::all_finite(values_); }

  friend bool operator==(const ParamVector& a, const ParamVector& b) {
    return *a.names_ == *b.names_ && a.values_ == b.values_;
  }

 private:
  std::shared_ptr<const Names> names_;
  std::vector<double> values_;
};

/// Simulated or observed data (y) plus the model's fixed constants.
struct Dataset {
  std::vector<double> observations;
  std::vector<double> fixed_covariates;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// A scalar test statistic f(theta).
struct Quantity {
  std::string name;
  std::function<double(const ParamView&)> evaluate;

  /// Projection onto one named coordinate; `hint` is the expected index.
  static Quantity coordinate(std::string name, std::size_t hint = 0) {
    auto label = name;
    return {std::move(name), [label = std::move(label), hint](const ParamView& theta) {
              if (hint < theta.size() && theta.names()[hint] == label) return theta[hint];
              return theta[label];
            }};
  }

  /// log of a positive coordinate, labelled "log_<name>".
  static Quantity log_of(const std::string& name) {
    return {"log_" + name, [name](const ParamView& theta) { return std::log(theta[name]); }};
  }
};

inline double eval_quantity(const Quantity& q, const ParamView& theta) { return q.evaluate(theta); }
inline double eval_quantity(const Quantity& q, const ParamVector& theta) { return q.evaluate(theta.view()); }

/// Diagnostics a sampler reports alongside its draws.
struct ChainDiagnostics {
  double acceptance_rate = 1.0;
  std::int64_t divergences = 0;
  double step_size = 0.0;

  friend bool operator==(const ChainDiagnostics&, const ChainDiagnostics&) = default;
};

/// Posterior draws from one fit, stored row-major on the constrained scale.
struct PosteriorDraws {
  std::shared_ptr<const Names> names;
  std::vector<double> values;
  std::string sampler_name;
  std::size_t chain_length_raw = 0;
  bool thinned = false;
  std::uint64_t rng_stream_id = 0;
  ChainDiagnostics diagnostics;

  [[nodiscard]] std::size_t dimension() const { return names->size(); }
  [[nodiscard]] std::size_t size() const { return values.size() / dimension(); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return std::span<const double>{values}.subspan(i * dimension(), dimension());
  }
  [[nodiscard]] std::span<double> row(std::size_t i) {
    return std::span<double>{values}.subspan(i * dimension(), dimension());
  }
  [[nodiscard]] ParamView view(std::size_t i) const { return {*names, row(i)}; }
  [[nodiscard]] ParamVector draw(std::size_t i) const {
    const auto r = row(i);
    return {names, std::vector<double>(r.begin(), r.end())};
  }

  /// f evaluated on every draw, in order.
  [[nodiscard]] std::vector<double> evaluate(const Quantity& q) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = q.evaluate(view(i));
    return out;
  }
};

/**
 * Contract for a joint model pi(y, theta).
 *
 * `draw_prior` followed by `draw_data` samples the joint. `log_density` is
 * the log posterior up to a constant on the unconstrained scale, Jacobian
 * included. Implementations are immutable and may be shared across threads.
 */
class GenerativeModel {
 public:
  virtual ~GenerativeModel() = default;

  [[nodiscard]] virtual std::string_view name() const = 0;
  [[nodiscard]] virtual std::size_t data_size() const = 0;

  [[nodiscard]] const Names& parameter_names() const { return *names_; }
  [[nodiscard]] const std::shared_ptr<const Names>& shared_names() const { return names_; }
  [[nodiscard]] std::size_t dimension() const { return names_->size(); }
  [[nodiscard]] const std::vector<Quantity>& quantities() const { return quantities_; }

  [[nodiscard]] virtual ParamVector draw_prior(RandomStream& rng) const = 0;

  [[nodiscard]] Dataset draw_data(const ParamVector& theta, RandomStream& rng) const {
    if (!theta.finite()) fail(ErrorCode::kNonFiniteParameter, "cannot simulate data from a non-finite parameter");
    return simulate_data(theta.values(), rng);
  }

  virtual void unconstrain(std::span<const double> theta, std::span<double> z) const = 0;
  virtual void constrain(std::span<const double> z, std::span<double> theta) const = 0;

  [[nodiscard]] std::vector<double> unconstrain(const ParamVector& theta) const {
    std::vector<double> z(dimension());
    unconstrain(theta.values(), z);
    return z;
  }
  [[nodiscard]] ParamVector constrain(std::span<const double> z) const {
    std::vector<double> theta(dimension());
    constrain(z, theta);
    return {names_, std::move(theta)};
  }

  [[nodiscard]] virtual double log_density(std::span<const double> z, const Dataset& data) const = 0;

  /// Writes the gradient into `grad` and returns the log density at z.
  virtual double log_density_gradient(std::span<const double> z, const Dataset& data,
                                      std::span<double> grad) const = 0;

 protected:
  GenerativeModel(Names names, std::vector<Quantity> quantities)
      : names_{std::make_shared<const Names>(std::move(names))}, quantities_{std::move(quantities)} {}

  /// All coordinate projections, in parameter order.
  static std::vector<Quantity> coordinate_quantities(const Names& names) {
    std::vector<Quantity> out;
    for (std::size_t i = 0; i < names.size(); ++i) out.push_back(Quantity::coordinate(names[i], i));
    return out;
  }

  [[nodiscard]] virtual Dataset simulate_data(std::span<const double> theta, RandomStream& rng) const = 0;

 private:
  std::shared_ptr<const Names> names_;
  std::vector<Quantity> quantities_;
};

inline ParamVector draw_prior(const GenerativeModel& model, RandomStream& rng) { return model.draw_prior(rng); }

inline Dataset draw_data(const GenerativeModel& model, const ParamVector& theta, RandomStream& rng) {
  return model.draw_data(theta, rng);
}

}  // namespace sbc

#endif
