// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "medcorpus/corpus_model.hpp"

namespace medcorpus {

inline constexpr std::string_view kQuestionSlot = "{question}";

struct PromptTemplate {
  std::int64_t template_id = 0;
  Task task = Task::kCaption;
  std::string body;

  bool operator==(const PromptTemplate&) const = default;
};

ValidationResult validate_template(const PromptTemplate& t);

class TemplateSet {
 public:
  TemplateSet() = default;

  // Throws Error(kConfigError) if a template is malformed or an id repeats
  // within its task.
  explicit TemplateSet(std::vector<PromptTemplate> templates);

  // Built-in 20 caption + 20 VQA Chinese prompts (ids 0-19 and 20-39).
  static TemplateSet defaults();

  // JSONL of {"template_id", "task", "body"}.
  static TemplateSet load(const std::filesystem::path& path);
  std::string to_jsonl() const;

  const std::vector<PromptTemplate>& for_task(Task task) const;
  std::size_t size() const;
  // Digest of the JSONL form; changes whenever any template changes.
  std::string digest() const;

 private:
  std::map<Task, std::vector<PromptTemplate>> by_task_;
};

// H(record_id || 0x1F || seed as 8 little-endian bytes) with stable_hash64.
std::uint64_t template_hash(std::string_view record_id, std::uint64_t seed);

// Picks template_hash(record_id, seed) mod |set[task]|.
// Throws Error(kEmptySet) if the task has no templates.
const PromptTemplate& select_template(Task task, std::string_view record_id, std::uint64_t seed,
                                      const TemplateSet& set);

// Throw Error(kTaskMismatch) when the template belongs to the other task.
DialogSample render_alignment_dialog(const AlignmentPair& pair, const PromptTemplate& tmpl);
DialogSample render_instruction_dialog(const InstructionPair& pair, const PromptTemplate& tmpl);

}  // namespace medcorpus
