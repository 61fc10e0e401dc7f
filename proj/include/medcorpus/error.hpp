// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace medcorpus {

enum class ErrorCode {
  kFileNotFound,
  kDecodeError,
  kIoError,
  kParseError,
  kBudgetExceeded,
  kInvalidInput,
  kEmptyInput,
  kDimensionMismatch,
  kTooManyImages,
  kTooExtreme,
  kTooSmall,
  kBackendExhausted,
  kBackendRefusal,
  kBackendError,
  kEmptySet,
  kTaskMismatch,
  kUnknownTokenizer,
  kMissingUpstream,
  kConfigMismatch,
  kConfigError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for every failure the library reports. Data-level
// outcomes (validation violations, rejections, QC discards) are returned as
// values instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::size_t skipped, std::size_t total);

  std::size_t skipped() const noexcept { return skipped_; }
  std::size_t total() const noexcept { return total_; }

 private:
  std::size_t skipped_;
  std::size_t total_;
};

}  // namespace medcorpus
