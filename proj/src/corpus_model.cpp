// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/corpus_model.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include <fmt/format.h>

#include "medcorpus/error.hpp"

namespace medcorpus {

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Source, 3> kSourceNames{{
    {Source::kPmcOa, "pmc_oa"},
    {Source::kPmcCaseReport, "pmc_casereport"},
    {Source::kPmcVqa, "pmc_vqa"},
}};
constexpr NameTable<TextRole, 3> kTextRoleNames{{
    {TextRole::kContext, "context"},
    {TextRole::kInlineDescription, "inline_description"},
    {TextRole::kQuestionAnswer, "question_answer"},
}};
constexpr NameTable<Category, 2> kCategoryNames{{
    {Category::kContext, "context"},
    {Category::kDescription, "description"},
}};
constexpr NameTable<Role, 2> kRoleNames{{
    {Role::kHuman, "human"},
    {Role::kAssistant, "assistant"},
}};
constexpr NameTable<Task, 2> kTaskNames{{
    {Task::kCaption, "caption"},
    {Task::kVqa, "vqa"},
}};
constexpr NameTable<Layout, 3> kLayoutNames{{
    {Layout::kSingle, "single"},
    {Layout::kHorizontal, "horizontal"},
    {Layout::kVertical, "vertical"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E v) {
  for (const auto& [e, name] : table) {
    if (e == v) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
E parse_name(const NameTable<E, N>& table, std::string_view s, std::string_view what) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  throw Error(ErrorCode::kParseError, fmt::format("unknown {} '{}'", what, s));
}

void check_schema_version(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "expected a JSON object");
  if (auto it = j.find("schema_version"); it != j.end()) {
    if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
      throw Error(ErrorCode::kParseError, "unsupported schema_version");
    }
  }
}

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kParseError, fmt::format("missing field '{}'", key));
  return *it;
}

std::string string_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw Error(ErrorCode::kParseError, fmt::format("field '{}' must be a string", key));
  return v.get<std::string>();
}

void add(ValidationResult& r, std::string_view violation) {
  r.violations.emplace_back(violation);
}

}  // namespace

std::string_view to_string(Source v) { return name_of(kSourceNames, v); }
std::string_view to_string(TextRole v) { return name_of(kTextRoleNames, v); }
std::string_view to_string(Category v) { return name_of(kCategoryNames, v); }
std::string_view to_string(Role v) { return name_of(kRoleNames, v); }
std::string_view to_string(Task v) { return name_of(kTaskNames, v); }
std::string_view to_string(Layout v) { return name_of(kLayoutNames, v); }

Source parse_source(std::string_view s) { return parse_name(kSourceNames, s, "source"); }
TextRole parse_text_role(std::string_view s) { return parse_name(kTextRoleNames, s, "text_role"); }
Category parse_category(std::string_view s) { return parse_name(kCategoryNames, s, "category"); }
Role parse_role(std::string_view s) { return parse_name(kRoleNames, s, "role"); }
Task parse_task(std::string_view s) { return parse_name(kTaskNames, s, "task"); }
Layout parse_layout(std::string_view s) { return parse_name(kLayoutNames, s, "layout"); }

std::string_view display_name(Source v) {
  switch (v) {
    case Source::kPmcOa: return "PMC-OA";
    case Source::kPmcCaseReport: return "PMC-CaseReport";
    case Source::kPmcVqa: return "PMC-VQA";
  }
  return "?";
}

bool ValidationResult::has(std::string_view v) const {
  return std::find(violations.begin(), violations.end(), v) != violations.end();
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

Category category_for(TextRole role) {
  switch (role) {
    case TextRole::kContext: return Category::kContext;
    case TextRole::kInlineDescription: return Category::kDescription;
    case TextRole::kQuestionAnswer: break;
  }
  throw Error(ErrorCode::kInvalidInput, "question_answer records have no alignment category");
}

ValidationResult validate_source_record(const SourceRecord& record) {
  ValidationResult r;
  if (record.id.empty()) add(r, violation::kIdNonEmpty);
  if (record.image_paths.empty()) add(r, violation::kImagePathsNonEmpty);
  if (std::any_of(record.image_paths.begin(), record.image_paths.end(),
                  [](const std::string& p) { return p.empty(); })) {
    add(r, violation::kImagePathNonEmpty);
  }
  const bool is_qa = record.text_role == TextRole::kQuestionAnswer;
  if (is_qa && !record.qa) add(r, violation::kQaRequired);
  if (!is_qa && record.qa) add(r, violation::kQaNotAllowed);
  if (record.qa && (record.qa->question.empty() || record.qa->answer.empty())) {
    add(r, violation::kQaPartsNonEmpty);
  }
  if (!is_qa && record.text.empty()) add(r, violation::kTextRequired);
  if (!record.text.empty() && record.qa) add(r, violation::kTextXorQa);
  return r;
}

ValidationResult validate_dialog(const DialogSample& sample) {
  ValidationResult r;
  if (sample.id.empty()) add(r, violation::kIdNonEmpty);
  const auto& turns = sample.turns;
  if (turns.size() < 2) add(r, violation::kTurnsMinLength);
  if (turns.size() % 2 != 0) add(r, violation::kTurnsEven);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Role expected = i % 2 == 0 ? Role::kHuman : Role::kAssistant;
    if (turns[i].role != expected) {
      add(r, violation::kTurnsAlternate);
      break;
    }
  }
  std::size_t total = 0;
  for (const auto& t : turns) total += count_occurrences(t.text, kImagePlaceholder);
  if (total != 1) add(r, violation::kPlaceholderCount);
  const bool in_first_human = !turns.empty() && turns.front().role == Role::kHuman &&
                              count_occurrences(turns.front().text, kImagePlaceholder) >= 1;
  if (!in_first_human) add(r, violation::kPlaceholderFirstHuman);
  for (const auto& t : turns) {
    if (t.role == Role::kAssistant && t.text.empty()) {
      add(r, violation::kAssistantNonEmpty);
      break;
    }
  }
  return r;
}

ValidationResult validate_alignment_pair(const AlignmentPair& pair) {
  ValidationResult r;
  if (pair.id.empty()) add(r, violation::kIdNonEmpty);
  if (pair.text_zh.empty()) add(r, violation::kTextZhNonEmpty);
  return r;
}

ValidationResult validate_instruction_pair(const InstructionPair& pair) {
  ValidationResult r;
  if (pair.id.empty()) add(r, violation::kIdNonEmpty);
  if (pair.question_zh.empty()) add(r, violation::kQuestionZhNonEmpty);
  if (pair.answer_zh.empty()) add(r, violation::kAnswerZhNonEmpty);
  return r;
}

ValidationResult validate_composite(const CompositeImage& image) {
  ValidationResult r;
  if (image.source_count < 1 || image.source_count > 4) add(r, violation::kSourceCountRange);
  if (image.width < 1 || image.height < 1) {
    add(r, violation::kDimensionsPositive);
  } else if (image.pixels.size() !=
             static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height) * 3) {
    add(r, violation::kPixelBufferSize);
  }
  if ((image.layout == Layout::kSingle) != (image.source_count == 1)) {
    add(r, violation::kLayoutSingleIffOne);
  }
  return r;
}

nlohmann::json to_json(const SourceRecord& v) {
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"id", v.id},
                   {"source", to_string(v.source)},
                   {"image_paths", v.image_paths},
                   {"text_role", to_string(v.text_role)},
                   {"text", v.text}};
  if (v.qa) j["qa"] = {{"question", v.qa->question}, {"answer", v.qa->answer}};
  return j;
}

nlohmann::json to_json(const AlignmentPair& v) {
  return {{"schema_version", kSchemaVersion},
          {"id", v.id},
          {"image_ref", v.image_ref},
          {"text_zh", v.text_zh},
          {"category", to_string(v.category)}};
}

nlohmann::json to_json(const InstructionPair& v) {
  return {{"schema_version", kSchemaVersion},
          {"id", v.id},
          {"image_ref", v.image_ref},
          {"question_zh", v.question_zh},
          {"answer_zh", v.answer_zh}};
}

nlohmann::json to_json(const DialogSample& v) {
  auto turns = nlohmann::json::array();
  for (const auto& t : v.turns) turns.push_back({{"role", to_string(t.role)}, {"text", t.text}});
  return {{"schema_version", kSchemaVersion},
          {"id", v.id},
          {"image_ref", v.image_ref},
          {"turns", std::move(turns)},
          {"task", to_string(v.task)},
          {"template_id", v.template_id}};
}

SourceRecord source_record_from_json(const nlohmann::json& j) {
  check_schema_version(j);
  SourceRecord r;
  r.id = string_field(j, "id");
  r.source = parse_source(string_field(j, "source"));
  const auto& paths = field(j, "image_paths");
  if (!paths.is_array()) throw Error(ErrorCode::kParseError, "field 'image_paths' must be an array");
  for (const auto& p : paths) {
    if (!p.is_string()) throw Error(ErrorCode::kParseError, "image path must be a string");
    r.image_paths.push_back(p.get<std::string>());
  }
  r.text_role = parse_text_role(string_field(j, "text_role"));
  if (j.contains("text")) r.text = string_field(j, "text");
  if (auto it = j.find("qa"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(ErrorCode::kParseError, "field 'qa' must be an object");
    r.qa = QaPair{string_field(*it, "question"), string_field(*it, "answer")};
  }
  return r;
}

AlignmentPair alignment_pair_from_json(const nlohmann::json& j) {
  check_schema_version(j);
  return {string_field(j, "id"), string_field(j, "image_ref"), string_field(j, "text_zh"),
          parse_category(string_field(j, "category"))};
}

InstructionPair instruction_pair_from_json(const nlohmann::json& j) {
  check_schema_version(j);
  return {string_field(j, "id"), string_field(j, "image_ref"), string_field(j, "question_zh"),
          string_field(j, "answer_zh")};
}

DialogSample dialog_from_json(const nlohmann::json& j) {
  check_schema_version(j);
  DialogSample d;
  d.id = string_field(j, "id");
  d.image_ref = string_field(j, "image_ref");
  const auto& turns = field(j, "turns");
  if (!turns.is_array()) throw Error(ErrorCode::kParseError, "field 'turns' must be an array");
  for (const auto& t : turns) {
    d.turns.push_back({parse_role(string_field(t, "role")), string_field(t, "text")});
  }
  d.task = parse_task(string_field(j, "task"));
  const auto& tid = field(j, "template_id");
  if (!tid.is_number_integer()) throw Error(ErrorCode::kParseError, "template_id must be an integer");
  d.template_id = tid.get<std::int64_t>();
  return d;
}

std::string to_jsonl_line(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

}  // namespace medcorpus
