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

#ifndef SBC_ARTIFACT_IO_HPP
#define SBC_ARTIFACT_IO_HPP

#include <sbc/config.hpp>
#include <sbc/error.hpp>
#include <sbc/runner.hpp>

#include <openssl/evp.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

/**
 * \file
 * \brief On-disk run artifacts.
 *
 * An artifact is a directory holding
 *   meta.json        - format version, config echo, quantities, diagnostics, failures
 *   ranks.csv        - replication,quantity,rank,L,n_eff,raw_chain_length
 *   checksums.sha256 - sha256sum-compatible digests of the two files above
 *
 * Readers accept any format_version with the same major number.
 */

namespace sbc {

inline constexpr std::string_view kMetaFile = "meta.json";
inline constexpr std::string_view kRanksFile = "ranks.csv";
inline constexpr std::string_view kChecksumFile = "checksums.sha256";
inline constexpr std::string_view kRanksHeader = "replication,quantity,rank,L,n_eff,raw_chain_length";

namespace detail {

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kIoError, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out{path, std::ios::binary | std::ios::trunc};
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIoError, "short write to " + path.string());
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

template <typename T>
T parse_number(std::string_view field, std::string_view what) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    fail(ErrorCode::kIoError, "malformed " + std::string{what} + " '" + std::string{field} + "' in ranks.csv");
  }
  return value;
}

inline std::string ranks_csv(const RunArtifact& a) {
  std::string out{kRanksHeader};
  out += '\n';
  for (const auto& r : a.records) {
    out += std::to_string(r.replication_index) + ',' + r.quantity + ',' + std::to_string(r.rank) + ',' +
           std::to_string(r.L) + ',' + (r.ess ? format_double(*r.ess) : std::string{}) + ',' +
           std::to_string(r.raw_chain_length) + '\n';
  }
  return out;
}

inline std::vector<RankRecord> parse_ranks_csv(std::string_view text) {
  std::vector<RankRecord> records;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    if (header) {
      if (line != kRanksHeader) fail(ErrorCode::kIoError, "unexpected ranks.csv header");
      header = false;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 6) fail(ErrorCode::kIoError, "ranks.csv row needs 6 fields");
    RankRecord r;
    r.replication_index = parse_number<std::int64_t>(fields[0], "replication");
    r.quantity = std::string{fields[1]};
    r.rank = parse_number<std::int64_t>(fields[2], "rank");
    r.L = parse_number<std::int64_t>(fields[3], "L");
    if (!fields[4].empty()) r.ess = parse_number<double>(fields[4], "n_eff");
    r.raw_chain_length = parse_number<std::int64_t>(fields[5], "raw_chain_length");
    if (r.rank < 0 || r.rank > r.L) fail(ErrorCode::kIoError, "rank outside [0, L] in ranks.csv");
    records.push_back(std::move(r));
  }
  if (header) fail(ErrorCode::kIoError, "ranks.csv is empty");
  return records;
}

inline json meta_json(const RunArtifact& a) {
  json diagnostics = json::array();
  for (const auto& d : a.diagnostics) {
    diagnostics.push_back({{"replication", d.replication_index},
                           {"acceptance_rate", d.acceptance_rate},
                           {"divergences", d.divergences},
                           {"n_eff", d.n_eff ? json(*d.n_eff) : json(nullptr)},
                           {"raw_chain_length", d.raw_chain_length},
                           {"rerun", d.rerun},
                           {"cap_hit", d.cap_hit},
                           {"still_short", d.still_short}});
  }
  json failures = json::array();
  for (const auto& f : a.failures) failures.push_back({{"replication", f.replication_index}, {"reason", f.reason}});
  return {{"format_version", a.format_version},
          {"config", to_json(a.config)},
          {"master_seed", a.config.master_seed},
          {"quantities", a.quantities},
          {"started_at", a.started_at},
          {"elapsed_seconds", a.elapsed_seconds},
          {"diagnostics", diagnostics},
          {"failures", failures}};
}

inline int major_version(const std::string& version) {
  int major = -1;
  const auto dot = version.find('.');
  const std::string_view head{version.data(), dot == std::string::npos ? version.size() : dot};
  const auto res = std::from_chars(head.data(), head.data() + head.size(), major);
  if (res.ec != std::errc{} || res.ptr != head.data() + head.size()) return -1;
  return major;
}

/// Writes the checksum file for the two payload files already on disk.
inline void write_checksums(const std::filesystem::path& dir) {
  std::string sums;
  for (auto name : {kMetaFile, kRanksFile}) {
    sums += sha256_hex(read_file(dir / name)) + "  " + std::string{name} + "\n";
  }
  write_file(dir / kChecksumFile, sums);
}

}  // namespace detail

inline void save_artifact(const RunArtifact& artifact, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  detail::write_file(dir / kMetaFile, detail::meta_json(artifact).dump(2) + "\n");
  detail::write_file(dir / kRanksFile, detail::ranks_csv(artifact));
  detail::write_checksums(dir);
}

inline RunArtifact load_artifact(const std::filesystem::path& dir) {
  const auto meta_text = detail::read_file(dir / kMetaFile);
  const auto ranks_text = detail::read_file(dir / kRanksFile);
  const auto sums = detail::read_file(dir / kChecksumFile);
  for (const auto& [name, text] : {std::pair{kMetaFile, std::string_view{meta_text}},
                                   std::pair{kRanksFile, std::string_view{ranks_text}}}) {
    const auto expected = detail::sha256_hex(text) + "  " + std::string{name} + "\n";
    if (sums.find(expected) == std::string::npos) {
      fail(ErrorCode::kChecksumMismatch, std::string{name} + " does not match its recorded checksum");
    }
  }

  RunArtifact a;
  try {
    const auto meta = json::parse(meta_text);
    a.format_version = meta.at("format_version").get<std::string>();
    if (detail::major_version(a.format_version) != detail::major_version(std::string{kFormatVersion})) {
      fail(ErrorCode::kFormatVersionMismatch,
           "artifact format " + a.format_version + " is not readable by a " + std::string{kFormatVersion} + " reader");
    }
    a.config = run_config_from_json(meta.at("config"));
    a.quantities = meta.at("quantities").get<std::vector<std::string>>();
    a.started_at = meta.at("started_at").get<std::string>();
    a.elapsed_seconds = meta.at("elapsed_seconds").get<double>();
    for (const auto& d : meta.at("diagnostics")) {
      ReplicationDiagnostics r;
      r.replication_index = d.at("replication").get<std::int64_t>();
      r.acceptance_rate = d.at("acceptance_rate").get<double>();
      r.divergences = d.at("divergences").get<std::int64_t>();
      if (!d.at("n_eff").is_null()) r.n_eff = d.at("n_eff").get<double>();
      r.raw_chain_length = d.at("raw_chain_length").get<std::int64_t>();
      r.rerun = d.at("rerun").get<bool>();
      r.cap_hit = d.at("cap_hit").get<bool>();
      r.still_short = d.at("still_short").get<bool>();
      a.diagnostics.push_back(r);
    }
    for (const auto& f : meta.at("failures")) {
      a.failures.push_back({f.at("replication").get<std::int64_t>(), f.at("reason").get<std::string>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kIoError, "malformed meta.json: " + std::string{e.what()});
  }
  a.records = detail::parse_ranks_csv(ranks_text);
  return a;
}

}  // namespace sbc

#endif
