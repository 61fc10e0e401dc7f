// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "medcorpus/corpus_model.hpp"

namespace medcorpus {

inline constexpr double kDefaultErrorBudget = 0.01;

struct SkipEntry {
  std::size_t line_no = 0;  // 1-based
  std::string reason;  // one of the skip_reason constants
  std::string detail;
  std::optional<std::string> id;  // when the line parsed far enough to have one

  bool operator==(const SkipEntry&) const = default;
};

namespace skip_reason {
inline constexpr std::string_view kMalformedJson = "malformed_json";
inline constexpr std::string_view kBadSchema = "bad_schema";
inline constexpr std::string_view kInvalidRecord = "invalid_record";
inline constexpr std::string_view kSourceMismatch = "source_mismatch";
inline constexpr std::string_view kDuplicateId = "duplicate_id";
}  // namespace skip_reason

struct SkipReport {
  std::size_t total = 0;  // non-blank lines seen
  std::size_t skipped = 0;
  std::vector<SkipEntry> entries;

  bool operator==(const SkipReport&) const = default;
};

// JSONL of {"line_no", "reason", "detail"} (plus "id" when known).
std::string skip_report_jsonl(const SkipReport& report);

// Single-consumer stream over a manifest file. Holds one line at a time plus
// the set of ids seen so far (for the uniqueness invariant). Blank lines are
// ignored and not counted.
class ManifestReader {
 public:
  // Throws Error(kFileNotFound) or Error(kConfigError) for a budget outside [0, 1].
  // When `expected_source` is set, records from another source are skipped.
  ManifestReader(const std::filesystem::path& path, double error_budget,
                 std::optional<Source> expected_source = std::nullopt);

  // Next valid record in file order, or nullopt at end of file. At end of
  // file throws BudgetExceeded if skipped / total > error_budget.
  std::optional<SourceRecord> next();

  const SkipReport& report() const noexcept { return report_; }
  // 1-based physical line of the record last returned by next().
  std::size_t line_no() const noexcept { return line_no_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void skip(std::string_view reason, std::string detail, std::optional<std::string> id);

  std::filesystem::path path_;
  std::ifstream in_;
  double budget_;
  std::optional<Source> expected_source_;
  std::size_t line_no_ = 0;
  std::unordered_set<std::string> seen_ids_;
  SkipReport report_;
  bool finished_ = false;
};

struct ManifestContents {
  std::vector<SourceRecord> records;
  SkipReport report;
};

// Drains a ManifestReader.
ManifestContents read_manifest(const std::filesystem::path& path, double error_budget = kDefaultErrorBudget,
                               std::optional<Source> expected_source = std::nullopt);

}  // namespace medcorpus
