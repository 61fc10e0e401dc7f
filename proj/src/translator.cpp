// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/translator.hpp"

#include <algorithm>
#include <thread>

#include <fmt/format.h>

#include "medcorpus/hashing.hpp"
#include "medcorpus/unicode.hpp"

namespace medcorpus {

std::string_view to_string(DiscardReason r) {
  switch (r) {
    case DiscardReason::kTooBrief: return "TooBrief";
    case DiscardReason::kTooShort: return "TooShort";
    case DiscardReason::kNotTranslated: return "NotTranslated";
    case DiscardReason::kRefusal: return "Refusal";
  }
  return "?";
}

std::vector<std::string> QcPolicy::default_refusal_markers() {
  return {"I'm sorry", "I am sorry", "I cannot", "I can't", "As an AI", "as an AI language model",
          "抱歉，我", "我无法", "无法翻译", "作为一个AI", "作为AI"};
}

void QcPolicy::validate() const {
  if (!(max_latin_ratio >= 0.0 && max_latin_ratio <= 1.0)) {
    throw Error(ErrorCode::kConfigError, "max_latin_ratio must be in [0,1]");
  }
  for (const auto& m : refusal_markers) {
    if (m.empty()) throw Error(ErrorCode::kConfigError, "refusal markers must be non-empty");
  }
}

QcVerdict qc_source(std::string_view text, const QcPolicy& policy, const TokenizerSpec& tokenizer) {
  if (count_tokens(text, tokenizer) < policy.min_source_tokens) return DiscardReason::kTooBrief;
  return std::nullopt;
}

double latin_ratio(std::string_view text) {
  std::size_t latin = 0;
  std::size_t letters = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t cp = unicode::next_codepoint(text, pos);
    if (unicode::is_latin_letter(cp)) {
      ++latin;
      ++letters;
    } else if (unicode::is_cjk(cp)) {
      ++letters;
    }
  }
  return letters == 0 ? 0.0 : static_cast<double>(latin) / static_cast<double>(letters);
}

bool contains_refusal(std::string_view text, const QcPolicy& policy) {
  return std::any_of(policy.refusal_markers.begin(), policy.refusal_markers.end(),
                     [&](const std::string& m) { return text.find(m) != std::string_view::npos; });
}

QcVerdict qc_translation(std::string_view text_zh, const QcPolicy& policy) {
  if (contains_refusal(text_zh, policy)) return DiscardReason::kRefusal;
  if (unicode::codepoint_count(text_zh) < policy.min_translated_chars) return DiscardReason::kTooShort;
  if (latin_ratio(text_zh) > policy.max_latin_ratio) return DiscardReason::kNotTranslated;
  return std::nullopt;
}

void BackendConfig::validate() const {
  if (max_retries < 0) throw Error(ErrorCode::kConfigError, "max_retries must be >= 0");
  if (!(requests_per_second > 0.0)) throw Error(ErrorCode::kConfigError, "requests_per_second must be > 0");
  if (!(timeout_seconds > 0.0)) throw Error(ErrorCode::kConfigError, "timeout must be > 0");
  if (retry_backoff_ms < 0) throw Error(ErrorCode::kConfigError, "retry_backoff_ms must be >= 0");
  if (model.empty()) throw Error(ErrorCode::kConfigError, "model identifier must be non-empty");
  system_prompt(prompt_version);
}

std::string_view system_prompt(std::string_view prompt_version) {
  if (prompt_version == "v1") {
    return "You are a professional medical translator. Translate the user's text from English into "
           "Simplified Chinese. Keep medical terminology accurate, keep numbers, units and standard "
           "abbreviations such as CT or MRI unchanged, and do not add explanations. Output only the "
           "translation.";
  }
  throw Error(ErrorCode::kConfigError, fmt::format("unknown prompt_version '{}'", prompt_version));
}

RateLimiter::RateLimiter(double requests_per_second)
    : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(1.0 / requests_per_second))) {}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

std::string translation_cache_key(std::string_view text, std::string_view prompt_version,
                                  std::string_view model) {
  Sha256 h;
  for (auto part : {text, prompt_version, model}) {
    h.update(fmt::format("{}:", part.size()));
    h.update(part);
  }
  return h.hex_digest();
}

TranslationCache::TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty()) return;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (!j.is_object()) continue;
      const auto key = j.find("key");
      const auto value = j.find("value");
      if (key == j.end() || value == j.end() || !key->is_string() || !value->is_string()) continue;
      if (value->get_ref<const std::string&>().empty()) continue;
      entries_.emplace(key->get<std::string>(), value->get<std::string>());
    }
  }
  // A torn final line would otherwise glue onto the next append.
  if (std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0) {
    std::ifstream tail(path_, std::ios::binary);
    tail.seekg(-1, std::ios::end);
    char last = '\n';
    tail.get(last);
    if (last != '\n') std::ofstream(path_, std::ios::app) << '\n';
  }
  out_.open(path_, std::ios::app);
  if (!out_) throw Error(ErrorCode::kIoError, fmt::format("cannot open cache {}", path_.string()));
}

std::optional<std::string> TranslationCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::insert(const std::string& key, const std::string& value) {
  if (value.empty()) throw Error(ErrorCode::kInvalidInput, "cache values must be non-empty");
  std::unique_lock lock(mu_);
  if (!entries_.emplace(key, value).second) return;
  if (!out_.is_open()) return;
  const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  out_ << to_jsonl_line({{"key", key}, {"value", value}, {"timestamp", now}}) << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIoError, fmt::format("cannot append to cache {}", path_.string()));
}

std::size_t TranslationCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

Translator::Translator(BackendConfig config, TranslationBackend& backend, TranslationCache& cache,
                       QcPolicy policy, TokenizerSpec tokenizer)
    : config_(std::move(config)),
      backend_(backend),
      cache_(cache),
      policy_(std::move(policy)),
      tokenizer_(std::move(tokenizer)),
      limiter_(config_.requests_per_second) {
  config_.validate();
  policy_.validate();
}

std::string Translator::request_with_retries(std::string_view text) {
  const auto prompt = system_prompt(config_.prompt_version);
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0 && config_.retry_backoff_ms > 0) {
      const auto delay = std::min<long long>(static_cast<long long>(config_.retry_backoff_ms) << (attempt - 1), 30'000);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    limiter_.acquire();
    try {
      return backend_.complete(prompt, text);
    } catch (const BackendFailure& e) {
      if (!e.transient()) throw;
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::kBackendExhausted,
              fmt::format("{} attempts failed, last: {}", config_.max_retries + 1, last_error));
}

TranslationResult Translator::translate_text(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::kInvalidInput, "cannot translate empty text");
  const auto key = translation_cache_key(text, config_.prompt_version, config_.model);

  TranslationResult result;
  if (auto hit = cache_.lookup(key)) {
    result = {std::move(*hit), CacheOutcome::kHit};
  } else {
    std::promise<std::string> promise;
    std::shared_future<std::string> future;
    bool owner = false;
    {
      std::lock_guard lock(inflight_mu_);
      if (auto it = inflight_.find(key); it != inflight_.end()) {
        future = it->second;
      } else if (auto late_hit = cache_.lookup(key)) {
        // Another caller finished between the lookup above and taking the lock.
        future = std::async(std::launch::deferred, [v = std::move(*late_hit)] { return v; }).share();
      } else {
        future = promise.get_future().share();
        inflight_.emplace(key, future);
        owner = true;
      }
    }
    if (owner) {
      try {
        auto translated = request_with_retries(text);
        if (translated.empty()) throw BackendFailure(false, "backend returned an empty translation");
        cache_.insert(key, translated);
        promise.set_value(std::move(translated));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
      std::lock_guard lock(inflight_mu_);
      inflight_.erase(key);
      result = {future.get(), CacheOutcome::kMiss};
    } else {
      result = {future.get(), CacheOutcome::kHit};
    }
  }
  if (contains_refusal(result.text, policy_)) {
    throw Error(ErrorCode::kBackendRefusal, fmt::format("refusal in response: {}", result.text));
  }
  return result;
}

RecordTranslation Translator::translate_record(const SourceRecord& record, const std::string& image_ref) {
  std::vector<std::string_view> parts;
  if (record.text_role == TextRole::kQuestionAnswer) {
    if (!record.qa) throw Error(ErrorCode::kInvalidInput, fmt::format("record {} has no qa", record.id));
    parts = {record.qa->question, record.qa->answer};
  } else {
    parts = {record.text};
  }

  for (auto part : parts) {
    if (auto verdict = qc_source(part, policy_, tokenizer_)) {
      return Discard{*verdict, fmt::format("{} tokens < {}", count_tokens(part, tokenizer_), policy_.min_source_tokens)};
    }
  }

  std::vector<std::optional<std::string>> translated;
  for (auto part : parts) {
    try {
      translated.emplace_back(translate_text(part).text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBackendRefusal) throw;
      translated.emplace_back(std::nullopt);
    }
  }
  for (const auto& t : translated) {
    if (!t) return Discard{DiscardReason::kRefusal, "backend refused"};
    if (auto verdict = qc_translation(*t, policy_)) return Discard{*verdict, *t};
  }

  if (record.text_role == TextRole::kQuestionAnswer) {
    return InstructionPair{record.id, image_ref, std::move(*translated[0]), std::move(*translated[1])};
  }
  return AlignmentPair{record.id, image_ref, std::move(*translated[0]), category_for(record.text_role)};
}

}  // namespace medcorpus
