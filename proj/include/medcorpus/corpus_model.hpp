// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace medcorpus {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kImagePlaceholder = "<image>";

enum class Source { kPmcOa, kPmcCaseReport, kPmcVqa };
enum class TextRole { kContext, kInlineDescription, kQuestionAnswer };
enum class Category { kContext, kDescription };
enum class Role { kHuman, kAssistant };
enum class Task { kCaption, kVqa };
enum class Layout { kSingle, kHorizontal, kVertical };

std::string_view to_string(Source v);
std::string_view to_string(TextRole v);
std::string_view to_string(Category v);
std::string_view to_string(Role v);
std::string_view to_string(Task v);
std::string_view to_string(Layout v);

// Parsers throw Error(kParseError) on unknown names.
Source parse_source(std::string_view s);
TextRole parse_text_role(std::string_view s);
Category parse_category(std::string_view s);
Role parse_role(std::string_view s);
Task parse_task(std::string_view s);
Layout parse_layout(std::string_view s);

// Human-readable column name used in statistics tables.
std::string_view display_name(Source v);

struct QaPair {
  std::string question;
  std::string answer;

  bool operator==(const QaPair&) const = default;
};

struct SourceRecord {
  std::string id;
  Source source = Source::kPmcOa;
  std::vector<std::string> image_paths;
  TextRole text_role = TextRole::kContext;
  std::string text;
  std::optional<QaPair> qa;

  bool operator==(const SourceRecord&) const = default;
};

struct AlignmentPair {
  std::string id;
  std::string image_ref;
  std::string text_zh;
  Category category = Category::kDescription;

  bool operator==(const AlignmentPair&) const = default;
};

struct InstructionPair {
  std::string id;
  std::string image_ref;
  std::string question_zh;
  std::string answer_zh;

  bool operator==(const InstructionPair&) const = default;
};

struct Turn {
  Role role = Role::kHuman;
  std::string text;

  bool operator==(const Turn&) const = default;
};

struct DialogSample {
  std::string id;
  std::string image_ref;
  std::vector<Turn> turns;
  Task task = Task::kCaption;
  std::int64_t template_id = 0;

  bool operator==(const DialogSample&) const = default;
};

struct CompositeImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB, 3 bytes per pixel
  Layout layout = Layout::kSingle;
  int source_count = 1;

  bool operator==(const CompositeImage&) const = default;
};

// Either ok or the full list of violated invariants.
struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(std::string_view violation) const;
};

// Violation names, exposed so callers and tests can match on them.
namespace violation {
inline constexpr std::string_view kIdNonEmpty = "id non-empty";
inline constexpr std::string_view kImagePathsNonEmpty = "image_paths length ≥ 1";
inline constexpr std::string_view kImagePathNonEmpty = "image path non-empty";
inline constexpr std::string_view kQaRequired = "qa required";
inline constexpr std::string_view kQaNotAllowed = "qa only for question_answer";
inline constexpr std::string_view kQaPartsNonEmpty = "qa parts non-empty";
inline constexpr std::string_view kTextRequired = "text non-empty";
inline constexpr std::string_view kTextXorQa = "exactly one of text or qa";
inline constexpr std::string_view kTurnsMinLength = "turns length ≥ 2";
inline constexpr std::string_view kTurnsEven = "turns even-length";
inline constexpr std::string_view kTurnsAlternate = "turns alternate starting with human";
inline constexpr std::string_view kPlaceholderCount = "placeholder count = 1";
inline constexpr std::string_view kPlaceholderFirstHuman = "placeholder in first human turn";
inline constexpr std::string_view kAssistantNonEmpty = "assistant turns non-empty";
inline constexpr std::string_view kTextZhNonEmpty = "text_zh non-empty";
inline constexpr std::string_view kQuestionZhNonEmpty = "question_zh non-empty";
inline constexpr std::string_view kAnswerZhNonEmpty = "answer_zh non-empty";
inline constexpr std::string_view kSourceCountRange = "source_count in [1,4]";
inline constexpr std::string_view kDimensionsPositive = "width, height ≥ 1";
inline constexpr std::string_view kLayoutSingleIffOne = "layout = single iff source_count = 1";
inline constexpr std::string_view kPixelBufferSize = "pixel buffer = width × height × 3";
}  // namespace violation

ValidationResult validate_source_record(const SourceRecord& record);
ValidationResult validate_dialog(const DialogSample& sample);
ValidationResult validate_alignment_pair(const AlignmentPair& pair);
ValidationResult validate_instruction_pair(const InstructionPair& pair);
ValidationResult validate_composite(const CompositeImage& image);

// Number of non-overlapping occurrences of needle in haystack.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// The category an alignment pair takes for a source text role. Only defined
// for context and inline_description.
Category category_for(TextRole role);

// JSON encoding, one object per line. Every object carries
// "schema_version": 1. Decoding throws Error(kParseError) on missing or
// mistyped fields and on an unsupported schema_version.
nlohmann::json to_json(const SourceRecord& v);
nlohmann::json to_json(const AlignmentPair& v);
nlohmann::json to_json(const InstructionPair& v);
nlohmann::json to_json(const DialogSample& v);

SourceRecord source_record_from_json(const nlohmann::json& j);
AlignmentPair alignment_pair_from_json(const nlohmann::json& j);
InstructionPair instruction_pair_from_json(const nlohmann::json& j);
DialogSample dialog_from_json(const nlohmann::json& j);

// Compact single-line dump with sorted keys and raw UTF-8.
std::string to_jsonl_line(const nlohmann::json& j);

}  // namespace medcorpus
