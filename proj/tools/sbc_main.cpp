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

#include <sbc/sbc.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;
constexpr int kExitReport = 4;

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
};

struct ReportOptions {
  std::string run;
  std::vector<std::string> quantities;
  std::optional<std::int64_t> bins;
  std::string formats = "svg,csv,json";
  double coverage = 0.99;
  std::string out;
};

int default_workers() {
  if (const char* env = std::getenv("SBC_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring invalid SBC_WORKERS='" << env << "'\n";
  }
  return 1;
}

int run_command(const RunOptions& opts) {
  sbc::RunConfig config;
  try {
    config = sbc::load_run_config(opts.config_path);
    if (opts.seed) config.master_seed = *opts.seed;
    config.worker_count_hint = opts.workers ? *opts.workers : default_workers();
    config.output_path = opts.out;
    sbc::validate(config);
  } catch (const sbc::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const auto artifact = sbc::execute(config);
    sbc::save_artifact(artifact, opts.out);
    std::cout << "wrote " << artifact.records.size() << " ranks for " << config.N << " replications ("
              << artifact.failures.size() << " failed) to " << opts.out << "\n";
  } catch (const sbc::Error& e) {
    std::cerr << e.what() << "\n";
    switch (e.code()) {
      case sbc::ErrorCode::kFailureRateExceeded: return kExitAborted;
      case sbc::ErrorCode::kConfigError:
      case sbc::ErrorCode::kInvalidSpec: return kExitConfig;
      default: return kExitFailure;
    }
  }
  return kExitOk;
}

int report_command(const ReportOptions& opts) {
  try {
    sbc::ReportRequest request;
    request.artifact_path = opts.run;
    request.quantities = opts.quantities;
    request.bins = opts.bins;
    request.coverage = opts.coverage;
    request.svg = request.csv = request.json = false;
    std::size_t start = 0;
    while (start <= opts.formats.size()) {
      const auto comma = opts.formats.find(',', start);
      const auto item = opts.formats.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (item == "svg") request.svg = true;
      else if (item == "csv") request.csv = true;
      else if (item == "json") request.json = true;
      else sbc::fail(sbc::ErrorCode::kInvalidSpec, "unknown report format '" + item + "'");
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    const auto artifact = sbc::load_artifact(request.artifact_path);
    sbc::write_report(artifact, request, opts.out);
    for (const auto& q : request.quantities.empty() ? artifact.quantities : request.quantities) {
      const auto s = sbc::summarize(artifact, q, request.bins, request.coverage);
      std::cout << q << ": " << sbc::to_string(s.shape) << " (chi2 " << s.chi_square << " on " << s.dof << " dof, "
                << s.bins_outside_band << "/" << s.B << " bins outside band)\n";
    }
  } catch (const sbc::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitReport;
  }
  return kExitOk;
}

int list_models() {
  sbc::json out = sbc::json::array();
  for (const sbc::ModelSpec& spec :
       {sbc::ModelSpec{sbc::NormalNormalSpec{}}, sbc::ModelSpec{sbc::LinRegSpec{}}, sbc::ModelSpec{sbc::EightSchoolsSpec{}}}) {
    const auto model = sbc::make_model(spec);
    sbc::json names = model->parameter_names();
    out.push_back({{"defaults", sbc::model_spec_to_json(spec)}, {"parameters", names}});
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int list_samplers() {
  const sbc::SamplerConfig defaults;
  sbc::json out = sbc::json::array();
  for (auto kind : {sbc::SamplerKind::kExactConjugate, sbc::SamplerKind::kRwMetropolis, sbc::SamplerKind::kHmc,
                    sbc::SamplerKind::kMeanfieldVi}) {
    sbc::json fields = sbc::json::object();
    switch (kind) {
      case sbc::SamplerKind::kExactConjugate:
        break;
      case sbc::SamplerKind::kRwMetropolis:
        fields = {{"step_size", defaults.step_size}, {"warmup", defaults.warmup}};
        break;
      case sbc::SamplerKind::kHmc:
        fields = {{"step_size", defaults.step_size}, {"n_leapfrog", defaults.n_leapfrog}, {"warmup", defaults.warmup}};
        break;
      case sbc::SamplerKind::kMeanfieldVi:
        fields = {{"vi_iterations", defaults.vi_iterations}, {"vi_learning_rate", defaults.vi_learning_rate}};
        break;
    }
    out.push_back({{"kind", sbc::to_string(kind)}, {"mcmc", sbc::is_mcmc(kind)}, {"fields", fields}});
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation-based calibration of Bayesian samplers"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run SBC replications and save a run artifact");
  run->add_option("--config", run_opts.config_path, "Run configuration (JSON)")->required();
  run->add_option("--seed", run_opts.seed, "Override the master seed");
  run->add_option("--workers", run_opts.workers, "Worker threads (default: $SBC_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", run_opts.out, "Artifact directory")->required();

  ReportOptions report_opts;
  auto* report = app.add_subcommand("report", "Render figures and summaries for a saved run");
  report->add_option("--run", report_opts.run, "Artifact directory")->required();
  report->add_option("--quantity", report_opts.quantities, "Quantity to report (repeatable; default all)");
  report->add_option("--bins", report_opts.bins, "Histogram bins; must divide L+1");
  report->add_option("--format", report_opts.formats, "Comma-separated subset of svg,csv,json");
  report->add_option("--coverage", report_opts.coverage, "Band coverage")->check(CLI::Range(0.0, 1.0));
  report->add_option("--out", report_opts.out, "Output directory")->required();

  app.add_subcommand("list-models", "Print built-in models with their default specs");
  app.add_subcommand("list-samplers", "Print built-in samplers with their settings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return kExitOk;
    return app.got_subcommand("report") ? kExitReport : kExitConfig;
  }

  if (*run) return run_command(run_opts);
  if (*report) return report_command(report_opts);
  if (app.got_subcommand("list-models")) return list_models();
  return list_samplers();
}
