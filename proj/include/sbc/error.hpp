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

#ifndef SBC_ERROR_HPP
#define SBC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace sbc {

/// Every failure raised by the library carries one of these codes.
enum class ErrorCode {
  kInvalidSpec,
  kNonFiniteParameter,
  kUnknownParameter,
  kNotConjugate,
  kNonFiniteDensity,
  kDiverged,
  kNonFiniteInput,
  kIndivisibleBinning,
  kZeroVariance,
  kAllConstant,
  kTooShort,
  kFailureRateExceeded,
  kIoError,
  kFormatVersionMismatch,
  kChecksumMismatch,
  kConfigError,
  kUnknownQuantity,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kNonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::kUnknownParameter: return "UnknownParameter";
    case ErrorCode::kNotConjugate: return "NotConjugate";
    case ErrorCode::kNonFiniteDensity: return "NonFiniteDensity";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kIndivisibleBinning: return "IndivisibleBinning";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kAllConstant: return "AllConstant";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kFailureRateExceeded: return "FailureRateExceeded";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kUnknownQuantity: return "UnknownQuantity";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string{to_string(code)} + ": " + message), code_{code} {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error{code, message}; }

}  // namespace sbc

#endif
