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

#ifndef SBC_REPORT_HPP
#define SBC_REPORT_HPP

#include <sbc/artifact_io.hpp>
#include <sbc/config.hpp>
#include <sbc/detail/math.hpp>
#include <sbc/rank_stats.hpp>
#include <sbc/runner.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

/**
 * \file
 * \brief Self-contained SVG figures and summary records for a run.
 *
 * Output is byte-stable: all coordinates are printed with two decimals and
 * nothing depends on the clock or locale.
 */

namespace sbc {

// Red for data, gray for what uniformity predicts.
inline constexpr std::string_view kDataColor = "#8F2727";
inline constexpr std::string_view kDataFill = "#B97C7C";
inline constexpr std::string_view kBandColor = "#DDDDDD";
inline constexpr std::string_view kMedianColor = "#999999";
inline constexpr std::string_view kAxisColor = "#333333";

enum class EcdfMode { kEcdf, kDiff };

namespace detail {

inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 400.0;
inline constexpr double kLeft = 60.0;
inline constexpr double kRight = 20.0;
inline constexpr double kTop = 40.0;
inline constexpr double kBottom = 50.0;
inline constexpr double kPlotW = kWidth - kLeft - kRight;
inline constexpr double kPlotH = kHeight - kTop - kBottom;

inline std::string fixed2(double v) {
  if (std::abs(v) < 0.005) v = 0.0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return {buf, res.ptr};
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string svg_open(std::string_view title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"#FFFFFF\"/>\n";
  s += "<text class=\"title\" x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       xml_escape(title) + "</text>\n";
  return s;
}

inline std::string axes(std::string_view x_label, std::string_view y_label, std::string_view x_lo,
                        std::string_view x_hi, std::string_view y_lo, std::string_view y_hi) {
  const std::string x0 = fixed2(kLeft);
  const std::string x1 = fixed2(kLeft + kPlotW);
  const std::string y0 = fixed2(kTop + kPlotH);
  const std::string y1 = fixed2(kTop);
  std::string s;
  s += "<path class=\"axes\" d=\"M" + x0 + " " + y1 + " V" + y0 + " H" + x1 + "\" fill=\"none\" stroke=\"" +
       std::string{kAxisColor} + "\" stroke-width=\"1\"/>\n";
  const auto label = [](std::string_view x, std::string_view y, std::string_view anchor, std::string_view text) {
    return "<text x=\"" + std::string{x} + "\" y=\"" + std::string{y} + "\" text-anchor=\"" + std::string{anchor} +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + xml_escape(text) + "</text>\n";
  };
  s += label(x0, fixed2(kTop + kPlotH + 15), "start", x_lo);
  s += label(x1, fixed2(kTop + kPlotH + 15), "end", x_hi);
  s += label(fixed2(kLeft + kPlotW / 2), fixed2(kHeight - 12), "middle", x_label);
  s += label(fixed2(kLeft - 6), y0, "end", y_lo);
  s += label(fixed2(kLeft - 6), fixed2(kTop + 10), "end", y_hi);
  s += "<text x=\"16\" y=\"" + fixed2(kTop + kPlotH / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" " +
       "font-size=\"11\" transform=\"rotate(-90 16 " + fixed2(kTop + kPlotH / 2) + ")\">" + xml_escape(y_label) +
       "</text>\n";
  return s;
}

inline std::string join_values(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

}  // namespace detail

/// Histogram of binned ranks with the gray binomial band and its median.
inline std::string histogram_svg(const SbcHistogram& h, std::string_view quantity) {
  using namespace detail;
  const auto B = h.bins();
  const auto median = binomial_quantile(h.N, 1.0 / static_cast<double>(B), 0.5);
  std::int64_t top = h.band_high;
  for (auto c : h.counts) top = std::max(top, c);
  const double y_max = std::max<double>(1.0, std::ceil(static_cast<double>(top) * 1.1));
  const auto y_of = [&](double count) { return kTop + kPlotH * (1.0 - count / y_max); };
  const double bar_w = kPlotW / static_cast<double>(B);

  std::string s = svg_open(std::string{quantity} + " (N = " + std::to_string(h.N) + ", L = " + std::to_string(h.L) +
                           ", B = " + std::to_string(B) + ")");
  s += "<rect class=\"band\" data-low=\"" + std::to_string(h.band_low) + "\" data-high=\"" +
       std::to_string(h.band_high) + "\" x=\"" + fixed2(kLeft) + "\" y=\"" +
       fixed2(y_of(static_cast<double>(h.band_high))) + "\" width=\"" + fixed2(kPlotW) + "\" height=\"" +
       fixed2(y_of(static_cast<double>(h.band_low)) - y_of(static_cast<double>(h.band_high))) + "\" fill=\"" +
       std::string{kBandColor} + "\"/>\n";
  for (std::int64_t b = 0; b < B; ++b) {
    const auto c = h.counts[static_cast<std::size_t>(b)];
    const double x = kLeft + bar_w * static_cast<double>(b);
    const double y = y_of(static_cast<double>(c));
    s += "<path class=\"bar\" data-bin=\"" + std::to_string(b) + "\" data-count=\"" + std::to_string(c) + "\" d=\"M" +
         fixed2(x) + " " + fixed2(kTop + kPlotH) + " V" + fixed2(y) + " H" + fixed2(x + bar_w) + " V" +
         fixed2(kTop + kPlotH) + " Z\" fill=\"" + std::string{kDataFill} + "\" stroke=\"" + std::string{kDataColor} +
         "\" stroke-width=\"0.5\"/>\n";
  }
  s += "<path class=\"median\" data-median=\"" + std::to_string(median) + "\" d=\"M" + fixed2(kLeft) + " " +
       fixed2(y_of(static_cast<double>(median))) + " H" + fixed2(kLeft + kPlotW) + "\" stroke=\"" +
       std::string{kMedianColor} + "\" stroke-width=\"1.5\"/>\n";
  s += axes("rank", "count", "0", std::to_string(h.L), "0", fixed2(y_max));
  s += "</svg>\n";
  return s;
}

/// ECDF (or its difference from the uniform CDF) with the pointwise band.
inline std::string ecdf_svg(const EcdfSummary& summary, std::int64_t N, std::string_view quantity, EcdfMode mode) {
  using namespace detail;
  const auto shown = mode == EcdfMode::kDiff ? ecdf_diff_summary(summary) : summary;
  const auto L = static_cast<std::int64_t>(shown.values.size()) - 1;
  double y_lo = 0.0;
  double y_hi = 1.0;
  if (mode == EcdfMode::kDiff) {
    double extent = 0.0;
    for (std::size_t k = 0; k < shown.values.size(); ++k) {
      extent = std::max({extent, std::abs(shown.values[k]), std::abs(shown.envelope_low[k]),
                         std::abs(shown.envelope_high[k])});
    }
    extent = extent > 0.0 ? extent * 1.1 : 0.01;
    y_lo = -extent;
    y_hi = extent;
  }
  const auto x_of = [&](double k) { return kLeft + kPlotW * k / static_cast<double>(L + 1); };
  const auto y_of = [&](double v) { return kTop + kPlotH * (y_hi - v) / (y_hi - y_lo); };

  const std::string what = mode == EcdfMode::kDiff ? "ECDF difference" : "ECDF";
  std::string s = svg_open(std::string{quantity} + " " + what + " (N = " + std::to_string(N) +
                           ", L = " + std::to_string(L) + ")");

  // Envelope: upper edge left to right, lower edge back.
  std::string band = "M" + fixed2(x_of(0)) + " " + fixed2(y_of(mode == EcdfMode::kDiff ? 0.0 : 0.0));
  for (std::int64_t k = 0; k <= L; ++k) {
    const auto i = static_cast<std::size_t>(k);
    band += " L" + fixed2(x_of(static_cast<double>(k))) + " " + fixed2(y_of(shown.envelope_high[i])) + " L" +
            fixed2(x_of(static_cast<double>(k + 1))) + " " + fixed2(y_of(shown.envelope_high[i]));
  }
  for (std::int64_t k = L; k >= 0; --k) {
    const auto i = static_cast<std::size_t>(k);
    band += " L" + fixed2(x_of(static_cast<double>(k + 1))) + " " + fixed2(y_of(shown.envelope_low[i])) + " L" +
            fixed2(x_of(static_cast<double>(k))) + " " + fixed2(y_of(shown.envelope_low[i]));
  }
  band += " Z";
  s += "<path class=\"envelope\" d=\"" + band + "\" fill=\"" + std::string{kBandColor} + "\" stroke=\"none\"/>\n";

  std::string expected = "M" + fixed2(x_of(0)) + " " + fixed2(y_of(0.0));
  for (std::int64_t k = 0; k <= L; ++k) {
    expected += " L" + fixed2(x_of(static_cast<double>(k + 1))) + " " +
                fixed2(y_of(shown.expected[static_cast<std::size_t>(k)]));
  }
  s += "<path class=\"expected\" d=\"" + expected + "\" fill=\"none\" stroke=\"" + std::string{kMedianColor} +
       "\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";

  std::string curve = "M" + fixed2(x_of(0)) + " " + fixed2(y_of(0.0));
  for (std::int64_t k = 0; k <= L; ++k) {
    const double v = shown.values[static_cast<std::size_t>(k)];
    curve += " V" + fixed2(y_of(v)) + " H" + fixed2(x_of(static_cast<double>(k + 1)));
  }
  s += "<path class=\"ecdf\" data-values=\"" + join_values(shown.values) + "\" d=\"" + curve +
       "\" fill=\"none\" stroke=\"" + std::string{kDataColor} + "\" stroke-width=\"1.5\"/>\n";
  s += axes("rank", mode == EcdfMode::kDiff ? "ECDF - uniform CDF" : "ECDF", "0", std::to_string(L), fixed2(y_lo),
            fixed2(y_hi));
  s += "</svg>\n";
  return s;
}

inline std::int64_t resolve_bins(const RunArtifact& artifact, std::int64_t n_ranks, std::optional<std::int64_t> bins) {
  return bins ? *bins : default_bins(n_ranks, artifact.config.L);
}

inline SbcHistogram artifact_histogram(const RunArtifact& artifact, std::string_view quantity,
                                       std::optional<std::int64_t> bins = std::nullopt, double coverage = 0.99) {
  const auto ranks = artifact.ranks(quantity);
  return rebin(ranks, artifact.config.L, resolve_bins(artifact, static_cast<std::int64_t>(ranks.size()), bins),
               coverage);
}

inline std::string render_histogram_svg(const RunArtifact& artifact, std::string_view quantity,
                                        std::optional<std::int64_t> bins = std::nullopt, double coverage = 0.99) {
  return histogram_svg(artifact_histogram(artifact, quantity, bins, coverage), quantity);
}

inline std::string render_ecdf_svg(const RunArtifact& artifact, std::string_view quantity, EcdfMode mode,
                                   double coverage = 0.99) {
  const auto ranks = artifact.ranks(quantity);
  return ecdf_svg(ecdf_summary(ranks, artifact.config.L, coverage), static_cast<std::int64_t>(ranks.size()), quantity,
                  mode);
}

struct Summary {
  std::string quantity;
  std::int64_t N = 0;
  std::int64_t L = 0;
  std::int64_t B = 0;
  std::vector<std::int64_t> counts;
  std::int64_t band_low = 0;
  std::int64_t band_high = 0;
  double coverage = 0.99;
  std::int64_t bins_outside_band = 0;
  double chi_square = 0.0;
  std::int64_t dof = 0;
  Shape shape = Shape::kUniform;
  double mean_normalized_rank = 0.0;
  double var_normalized_rank = 0.0;
  std::int64_t failure_count = 0;
  /// 25%, 50% and 75% quantiles of per-replication n_eff, for thinned MCMC runs.
  std::optional<std::array<double, 3>> ess_quartiles;
  std::int64_t divergent_replications = 0;
};

namespace detail {

/// Linear-interpolation quantile of a sorted sample.
inline double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline Summary summarize(const RunArtifact& artifact, std::string_view quantity,
                         std::optional<std::int64_t> bins = std::nullopt, double coverage = 0.99) {
  const auto ranks = artifact.ranks(quantity);
  if (ranks.empty()) fail(ErrorCode::kUnknownQuantity, "no ranks recorded for '" + std::string{quantity} + "'");
  const auto h = rebin(ranks, artifact.config.L,
                       resolve_bins(artifact, static_cast<std::int64_t>(ranks.size()), bins), coverage);
  Summary s;
  s.quantity = std::string{quantity};
  s.N = h.N;
  s.L = h.L;
  s.B = h.bins();
  s.counts = h.counts;
  s.band_low = h.band_low;
  s.band_high = h.band_high;
  s.coverage = coverage;
  s.bins_outside_band = bins_outside_band(h);
  const auto chi = chi_square_uniformity(h.counts);
  s.chi_square = chi.statistic;
  s.dof = chi.dof;
  s.shape = classify_shape(h);
  double sum = 0.0;
  double sum2 = 0.0;
  for (auto r : ranks) {
    const double u = static_cast<double>(r) / static_cast<double>(h.L);
    sum += u;
    sum2 += u * u;
  }
  const auto n = static_cast<double>(ranks.size());
  s.mean_normalized_rank = sum / n;
  s.var_normalized_rank = sum2 / n - s.mean_normalized_rank * s.mean_normalized_rank;
  s.failure_count = static_cast<std::int64_t>(artifact.failures.size());
  std::vector<double> ess;
  for (const auto& d : artifact.diagnostics) {
    if (d.n_eff) ess.push_back(*d.n_eff);
    s.divergent_replications += d.divergences > 0 ? 1 : 0;
  }
  if (!ess.empty()) {
    std::sort(ess.begin(), ess.end());
    s.ess_quartiles = std::array{detail::sorted_quantile(ess, 0.25), detail::sorted_quantile(ess, 0.5),
                                 detail::sorted_quantile(ess, 0.75)};
  }
  return s;
}

inline json to_json(const Summary& s) {
  return {{"quantity", s.quantity},
          {"N", s.N},
          {"L", s.L},
          {"B", s.B},
          {"counts", s.counts},
          {"band", {{"low", s.band_low}, {"high", s.band_high}, {"coverage", s.coverage}}},
          {"bins_outside_band", s.bins_outside_band},
          {"chi_square", {{"statistic", s.chi_square}, {"dof", s.dof}}},
          {"shape", to_string(s.shape)},
          {"mean_normalized_rank", s.mean_normalized_rank},
          {"var_normalized_rank", s.var_normalized_rank},
          {"failure_count", s.failure_count},
          {"divergent_replications", s.divergent_replications},
          {"ess_quartiles", s.ess_quartiles ? json(*s.ess_quartiles) : json(nullptr)}};
}

inline constexpr std::string_view kSummaryCsvHeader =
    "quantity,N,L,B,band_low,band_high,bins_outside_band,chi_square,dof,shape,mean_normalized_rank,"
    "var_normalized_rank,failure_count,divergent_replications,ess_q25,ess_q50,ess_q75";

inline std::string to_csv_row(const Summary& s) {
  using detail::format_double;
  std::string row = s.quantity + ',' + std::to_string(s.N) + ',' + std::to_string(s.L) + ',' + std::to_string(s.B) +
                    ',' + std::to_string(s.band_low) + ',' + std::to_string(s.band_high) + ',' +
                    std::to_string(s.bins_outside_band) + ',' + format_double(s.chi_square) + ',' +
                    std::to_string(s.dof) + ',' + std::string{to_string(s.shape)} + ',' +
                    format_double(s.mean_normalized_rank) + ',' + format_double(s.var_normalized_rank) + ',' +
                    std::to_string(s.failure_count) + ',' + std::to_string(s.divergent_replications);
  for (std::size_t i = 0; i < 3; ++i) row += ',' + (s.ess_quartiles ? format_double((*s.ess_quartiles)[i]) : "");
  return row;
}

struct ReportRequest {
  std::filesystem::path artifact_path;
  /// Empty means every quantity in the artifact.
  std::vector<std::string> quantities;
  std::optional<std::int64_t> bins;
  bool svg = true;
  bool csv = true;
  bool json = true;
  double coverage = 0.99;
};

/// File-name-safe form of a quantity label, e.g. theta[1] -> theta_1_.
inline std::string file_stem(std::string_view quantity) {
  std::string out;
  for (char c : quantity) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  return out;
}

/// Renders every requested output for `artifact` into `out_dir`.
inline void write_report(const RunArtifact& artifact, const ReportRequest& request,
                         const std::filesystem::path& out_dir) {
  if (!(request.coverage > 0.0 && request.coverage < 1.0)) {
    fail(ErrorCode::kInvalidSpec, "coverage must lie strictly between 0 and 1");
  }
  auto quantities = request.quantities.empty() ? artifact.quantities : request.quantities;
  for (const auto& q : quantities) {
    if (!artifact.has_quantity(q)) fail(ErrorCode::kUnknownQuantity, "artifact has no quantity '" + q + "'");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + out_dir.string());

  std::vector<Summary> summaries;
  for (const auto& q : quantities) {
    summaries.push_back(summarize(artifact, q, request.bins, request.coverage));
    if (request.svg) {
      const auto stem = file_stem(q);
      detail::write_file(out_dir / (stem + "_hist.svg"),
                         render_histogram_svg(artifact, q, request.bins, request.coverage));
      detail::write_file(out_dir / (stem + "_ecdf.svg"), render_ecdf_svg(artifact, q, EcdfMode::kEcdf, request.coverage));
      detail::write_file(out_dir / (stem + "_ecdf_diff.svg"),
                         render_ecdf_svg(artifact, q, EcdfMode::kDiff, request.coverage));
    }
  }
  if (request.csv) {
    std::string csv{kSummaryCsvHeader};
    csv += '\n';
    for (const auto& s : summaries) csv += to_csv_row(s) + '\n';
    detail::write_file(out_dir / "summary.csv", csv);
  }
  if (request.json) {
    json doc = json::array();
    for (const auto& s : summaries) doc.push_back(to_json(s));
    detail::write_file(out_dir / "summary.json", doc.dump(2) + "\n");
  }
}

}  // namespace sbc

#endif
