// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/ingestion.hpp"

#include <fmt/format.h>

#include "medcorpus/error.hpp"

namespace medcorpus {

std::string skip_report_jsonl(const SkipReport& report) {
  std::string out;
  for (const auto& e : report.entries) {
    nlohmann::json j{{"line_no", e.line_no}, {"reason", e.reason}, {"detail", e.detail}};
    if (e.id) j["id"] = *e.id;
    out += to_jsonl_line(j);
    out += '\n';
  }
  return out;
}

ManifestReader::ManifestReader(const std::filesystem::path& path, double error_budget,
                               std::optional<Source> expected_source)
    : path_(path), in_(path), budget_(error_budget), expected_source_(expected_source) {
  if (!(error_budget >= 0.0 && error_budget <= 1.0)) {
    throw Error(ErrorCode::kConfigError, fmt::format("error budget {} outside [0,1]", error_budget));
  }
  if (!in_ || std::filesystem::is_directory(path)) throw Error(ErrorCode::kFileNotFound, path.string());
}

void ManifestReader::skip(std::string_view reason, std::string detail, std::optional<std::string> id) {
  ++report_.skipped;
  report_.entries.push_back({line_no_, std::string(reason), std::move(detail), std::move(id)});
}

std::optional<SourceRecord> ManifestReader::next() {
  if (finished_) return std::nullopt;
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++report_.total;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      skip(skip_reason::kMalformedJson, e.what(), std::nullopt);
      continue;
    }
    std::optional<std::string> id;
    if (j.is_object()) {
      if (auto it = j.find("id"); it != j.end() && it->is_string()) id = it->get<std::string>();
    }
    SourceRecord record;
    try {
      record = source_record_from_json(j);
    } catch (const Error& e) {
      skip(skip_reason::kBadSchema, e.what(), id);
      continue;
    }
    if (const auto v = validate_source_record(record); !v.ok()) {
      std::string detail;
      for (const auto& violation : v.violations) detail += (detail.empty() ? "" : "; ") + violation;
      skip(skip_reason::kInvalidRecord, std::move(detail), id);
      continue;
    }
    if (expected_source_ && record.source != *expected_source_) {
      skip(skip_reason::kSourceMismatch, fmt::format("source {} in a {} manifest", to_string(record.source), to_string(*expected_source_)), id);
      continue;
    }
    if (!seen_ids_.insert(record.id).second) {
      skip(skip_reason::kDuplicateId, record.id, id);
      continue;
    }
    return record;
  }
  finished_ = true;
  if (report_.total > 0 &&
      static_cast<double>(report_.skipped) / static_cast<double>(report_.total) > budget_) {
    throw BudgetExceeded(report_.skipped, report_.total);
  }
  return std::nullopt;
}

ManifestContents read_manifest(const std::filesystem::path& path, double error_budget,
                               std::optional<Source> expected_source) {
  ManifestReader reader(path, error_budget, expected_source);
  ManifestContents out;
  while (auto r = reader.next()) out.records.push_back(std::move(*r));
  out.report = reader.report();
  return out;
}

}  // namespace medcorpus
