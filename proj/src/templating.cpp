// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/templating.hpp"

#include <array>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "medcorpus/error.hpp"
#include "medcorpus/hashing.hpp"

namespace medcorpus {

namespace {

constexpr std::array<std::string_view, 20> kCaptionBodies{
    "<image>\n请简要描述这张医学图像。",
    "<image>\n这张医学影像显示了什么？请给出说明。",
    "<image>\n请为这张图像撰写一段医学图注。",
    "<image>\n请描述图中可见的主要解剖结构和异常表现。",
    "<image>\n用专业的医学语言解释这张图片的内容。",
    "请观察下面的医学图像并描述其内容。\n<image>",
    "<image>\n这是一张什么类型的医学影像？请详细描述。",
    "<image>\n请总结这张图像中的关键发现。",
    "<image>\n请为这张临床图片生成一段描述性文字。",
    "<image>\n作为一名放射科医生，你会如何描述这张影像？",
    "<image>\n请说明这张图像所展示的病变特征。",
    "下面是一张医学图像：<image>\n请给出相应的图像说明。",
    "<image>\n描述这幅图像的成像方式及所见。",
    "<image>\n请对该影像进行简明的文字解读。",
    "<image>\n这张图片中有哪些值得注意的医学信息？",
    "<image>\n请根据图像内容写一段简短的报告。",
    "<image>\n请用中文描述这张医学图片。",
    "<image>\n请分析这张图像并给出描述。",
    "<image>\n这张图展示了哪些临床表现？请加以说明。",
    "仔细观察这张图像<image>，然后给出一段医学描述。",
};

constexpr std::array<std::string_view, 20> kVqaBodies{
    "<image>\n{question}",
    "<image>\n请根据图像回答以下问题：{question}",
    "<image>\n问题：{question}\n请结合图像中的信息作答。",
    "请查看这张医学图像：<image>\n{question}",
    "<image>\n{question}\n请使用图像中的信息回答该问题。",
    "<image>\n根据这张影像，{question}",
    "<image>\n作为医学专家，请回答：{question}",
    "<image>\n请仔细观察图像后回答：{question}",
    "<image>\n关于这张图片，{question}",
    "下面是一张医学图像和一个问题。\n<image>\n{question}",
    "<image>\n请基于图像内容给出准确答案。问题：{question}",
    "<image>\n{question}\n请给出简洁、准确的回答。",
    "<image>\n结合影像所见，回答下列问题：{question}",
    "<image>\n请阅读这张图像，并回答：{question}",
    "<image>\n这是一个关于医学影像的问题：{question}",
    "观察图像<image>后，请回答：{question}",
    "<image>\n问：{question}\n答：",
    "<image>\n请依据图中的信息，回答这个问题：{question}",
    "<image>\n{question}\n请直接给出答案。",
    "<image>\n请以医生的身份回答以下关于图像的问题：{question}",
};

const std::vector<PromptTemplate>& empty_templates() {
  static const std::vector<PromptTemplate> empty;
  return empty;
}

DialogSample two_turn(std::string id, std::string image_ref, std::string human, std::string assistant,
                      Task task, std::int64_t template_id) {
  DialogSample d;
  d.id = std::move(id);
  d.image_ref = std::move(image_ref);
  d.turns = {{Role::kHuman, std::move(human)}, {Role::kAssistant, std::move(assistant)}};
  d.task = task;
  d.template_id = template_id;
  return d;
}

}  // namespace

ValidationResult validate_template(const PromptTemplate& t) {
  ValidationResult r;
  if (count_occurrences(t.body, kImagePlaceholder) != 1) r.violations.emplace_back("body contains <image> exactly once");
  const auto slots = count_occurrences(t.body, kQuestionSlot);
  if (t.task == Task::kVqa && slots != 1) r.violations.emplace_back("vqa body contains {question} exactly once");
  if (t.task == Task::kCaption && slots != 0) r.violations.emplace_back("caption body has no {question} slot");
  return r;
}

TemplateSet::TemplateSet(std::vector<PromptTemplate> templates) {
  for (auto& t : templates) {
    const auto v = validate_template(t);
    if (!v.ok()) {
      throw Error(ErrorCode::kConfigError,
                  fmt::format("template {} invalid: {}", t.template_id, v.violations.front()));
    }
    auto& list = by_task_[t.task];
    for (const auto& existing : list) {
      if (existing.template_id == t.template_id) {
        throw Error(ErrorCode::kConfigError,
                    fmt::format("duplicate template_id {} for task {}", t.template_id, to_string(t.task)));
      }
    }
    list.push_back(std::move(t));
  }
}

TemplateSet TemplateSet::defaults() {
  std::vector<PromptTemplate> all;
  std::int64_t id = 0;
  for (auto body : kCaptionBodies) all.push_back({id++, Task::kCaption, std::string(body)});
  for (auto body : kVqaBodies) all.push_back({id++, Task::kVqa, std::string(body)});
  return TemplateSet(std::move(all));
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::vector<PromptTemplate> all;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      all.push_back({j.at("template_id").get<std::int64_t>(), parse_task(j.at("task").get<std::string>()),
                     j.at("body").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfigError, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfigError, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return TemplateSet(std::move(all));
}

std::string TemplateSet::to_jsonl() const {
  std::string out;
  for (const auto& [task, list] : by_task_) {
    for (const auto& t : list) {
      out += to_jsonl_line({{"template_id", t.template_id}, {"task", to_string(t.task)}, {"body", t.body}});
      out += '\n';
    }
  }
  return out;
}

const std::vector<PromptTemplate>& TemplateSet::for_task(Task task) const {
  auto it = by_task_.find(task);
  return it == by_task_.end() ? empty_templates() : it->second;
}

std::size_t TemplateSet::size() const {
  std::size_t n = 0;
  for (const auto& [task, list] : by_task_) n += list.size();
  return n;
}

std::string TemplateSet::digest() const { return sha256_hex(to_jsonl()); }

std::uint64_t template_hash(std::string_view record_id, std::uint64_t seed) {
  std::string key(record_id);
  key.push_back('\x1F');
  for (int i = 0; i < 8; ++i) key.push_back(static_cast<char>((seed >> (8 * i)) & 0xFF));
  return stable_hash64(key);
}

const PromptTemplate& select_template(Task task, std::string_view record_id, std::uint64_t seed,
                                      const TemplateSet& set) {
  const auto& list = set.for_task(task);
  if (list.empty()) throw Error(ErrorCode::kEmptySet, fmt::format("no templates for task {}", to_string(task)));
  return list[template_hash(record_id, seed) % list.size()];
}

DialogSample render_alignment_dialog(const AlignmentPair& pair, const PromptTemplate& tmpl) {
  if (tmpl.task != Task::kCaption) {
    throw Error(ErrorCode::kTaskMismatch, fmt::format("template {} is not a caption template", tmpl.template_id));
  }
  return two_turn(pair.id, pair.image_ref, tmpl.body, pair.text_zh, Task::kCaption, tmpl.template_id);
}

DialogSample render_instruction_dialog(const InstructionPair& pair, const PromptTemplate& tmpl) {
  if (tmpl.task != Task::kVqa) {
    throw Error(ErrorCode::kTaskMismatch, fmt::format("template {} is not a vqa template", tmpl.template_id));
  }
  // Single pass: slot text inside the question is never expanded again.
  std::string human = tmpl.body;
  const auto pos = human.find(kQuestionSlot);
  if (pos != std::string::npos) human.replace(pos, kQuestionSlot.size(), pair.question_zh);
  return two_turn(pair.id, pair.image_ref, std::move(human), pair.answer_zh, Task::kVqa, tmpl.template_id);
}

}  // namespace medcorpus
