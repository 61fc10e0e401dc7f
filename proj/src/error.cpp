// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/error.hpp"

#include <fmt/format.h>

namespace medcorpus {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kDecodeError: return "DecodeError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kTooManyImages: return "TooManyImages";
    case ErrorCode::kTooExtreme: return "TooExtreme";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kBackendExhausted: return "BackendExhausted";
    case ErrorCode::kBackendRefusal: return "BackendRefusal";
    case ErrorCode::kBackendError: return "BackendError";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kTaskMismatch: return "TaskMismatch";
    case ErrorCode::kUnknownTokenizer: return "UnknownTokenizer";
    case ErrorCode::kMissingUpstream: return "MissingUpstream";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

BudgetExceeded::BudgetExceeded(std::size_t skipped, std::size_t total)
    : Error(ErrorCode::kBudgetExceeded,
            fmt::format("skipped {} of {} manifest lines", skipped, total)),
      skipped_(skipped),
      total_(total) {}

}  // namespace medcorpus
