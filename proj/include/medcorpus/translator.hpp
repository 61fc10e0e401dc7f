// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "medcorpus/corpus_model.hpp"
#include "medcorpus/error.hpp"
#include "medcorpus/stats.hpp"

namespace medcorpus {

// ---------------------------------------------------------------------------
// Quality control

enum class DiscardReason { kTooBrief, kTooShort, kNotTranslated, kRefusal };

std::string_view to_string(DiscardReason r);

struct QcPolicy {
  std::size_t min_source_tokens = 10;
  std::size_t min_translated_chars = 8;
  double max_latin_ratio = 0.7;
  std::vector<std::string> refusal_markers = default_refusal_markers();

  static std::vector<std::string> default_refusal_markers();
  void validate() const;
};

// nullopt means keep.
using QcVerdict = std::optional<DiscardReason>;

QcVerdict qc_source(std::string_view text, const QcPolicy& policy, const TokenizerSpec& tokenizer = {});

// Checks in order: refusal marker substring, codepoint length below
// min_translated_chars, Latin share of letters above max_latin_ratio.
QcVerdict qc_translation(std::string_view text_zh, const QcPolicy& policy);

// Latin letters / (Latin letters + CJK codepoints); 0 when there are none.
double latin_ratio(std::string_view text);

bool contains_refusal(std::string_view text, const QcPolicy& policy);

// ---------------------------------------------------------------------------
// Backends

enum class BackendKind { kMock, kHttp };

inline constexpr std::string_view kDefaultPromptVersion = "v1";

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo";
  int max_retries = 3;
  double requests_per_second = 5.0;
  double timeout_seconds = 60.0;
  std::string prompt_version{kDefaultPromptVersion};
  std::string api_key_env = "MEDCORPUS_API_KEY";
  int retry_backoff_ms = 500;
  std::filesystem::path mock_fixture;  // empty: pure pseudo-translation

  void validate() const;
};

// System prompt for a prompt version. Throws Error(kConfigError) for an
// unknown version.
std::string_view system_prompt(std::string_view prompt_version);

// A failed request. Transient failures (rate limiting, 5xx, timeouts) are
// retried; others abort immediately.
class BackendFailure : public Error {
 public:
  BackendFailure(bool transient, const std::string& message)
      : Error(ErrorCode::kBackendError, message), transient_(transient) {}

  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;

  // One request. Throws BackendFailure.
  virtual std::string complete(std::string_view system_prompt, std::string_view text) = 0;
};

// Deterministic in-process backend for tests and offline builds.
//
// Fixture file: JSONL, one object per input text:
//   {"input": "...", "output": "..."}            scripted translation
//   {"input": "...", "fail_times": 2}            2 transient failures first
//   {"input": "...", "fail": "permanent"}        always a permanent failure
// "output" and "fail_times" may be combined. Inputs without a fixture entry
// get pseudo_translate(input).
class MockBackend : public TranslationBackend {
 public:
  MockBackend() = default;
  explicit MockBackend(const std::filesystem::path& fixture);

  void set_output(std::string input, std::string output);
  void set_transient_failures(std::string input, int count);
  void set_permanent_failure(std::string input);

  std::string complete(std::string_view system_prompt, std::string_view text) override;

  // Every request, including failed ones.
  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t successes() const noexcept { return successes_.load(); }
  std::size_t calls_for(std::string_view input) const;

 private:
  struct Script {
    std::optional<std::string> output;
    int transient_failures = 0;
    bool permanent_failure = false;
  };

  mutable std::mutex mu_;
  std::unordered_map<std::string, Script> scripts_;
  std::unordered_map<std::string, std::size_t> per_input_calls_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> successes_{0};
};

// Deterministic stand-in for a translation: each Latin word becomes two CJK
// ideographs chosen by hashing the lower-cased word, digit runs and CJK text
// are kept, punctuation maps to its fullwidth form, spaces are dropped.
std::string pseudo_translate(std::string_view text);

// Chat-completion style HTTP POST:
//   {"model", "temperature": 0, "messages": [{"role": "system", ...},
//                                            {"role": "user", ...}]}
// and reads choices[0].message.content. The bearer token comes from the
// environment variable named in BackendConfig::api_key_env, when set.
class HttpBackend : public TranslationBackend {
 public:
  explicit HttpBackend(BackendConfig config);

  std::string complete(std::string_view system_prompt, std::string_view text) override;

  static nlohmann::json request_body(std::string_view model, std::string_view system_prompt,
                                     std::string_view text);
  // Throws BackendFailure(permanent) on an unexpected response shape.
  static std::string parse_response(std::string_view body);
  static bool is_transient_status(int status);

 private:
  BackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
};

std::unique_ptr<TranslationBackend> make_backend(const BackendConfig& config);

// Enforces a global minimum interval of 1 / requests_per_second between
// request starts.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second);

  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_{};
};

// ---------------------------------------------------------------------------
// Cache

struct TranslationCacheEntry {
  std::string key;
  std::string value;
  std::int64_t timestamp = 0;  // unix seconds
};

// SHA-256 over text, prompt_version and model, each length-prefixed.
std::string translation_cache_key(std::string_view text, std::string_view prompt_version,
                                   std::string_view model);

// Content-addressed store persisted as append-only JSONL. An empty path keeps
// the cache in memory only. Unparseable lines (a torn final write) are
// ignored on load. Concurrent lookups; inserts are serialised.
class TranslationCache {
 public:
  TranslationCache() = default;
  explicit TranslationCache(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& key) const;
  // Later inserts of the same key are ignored.
  void insert(const std::string& key, const std::string& value);

  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Translation

enum class CacheOutcome { kHit, kMiss };

struct TranslationResult {
  std::string text;
  CacheOutcome cache = CacheOutcome::kMiss;
};

struct Discard {
  DiscardReason reason;
  std::string detail;
};

using RecordTranslation = std::variant<AlignmentPair, InstructionPair, Discard>;

class Translator {
 public:
  Translator(BackendConfig config, TranslationBackend& backend, TranslationCache& cache, QcPolicy policy,
             TokenizerSpec tokenizer = {});

  // Cache hit: no backend request. Miss: one successful request after up to
  // max_retries retries of transient failures, then cached. Concurrent
  // misses on the same key share one request.
  // Throws Error with kInvalidInput (empty text), kBackendExhausted,
  // kBackendRefusal (response contains a refusal marker) or kBackendError.
  TranslationResult translate_text(std::string_view text);

  // Source QC on every part first (no request if any part fails), then every
  // part is translated, then translation QC. Question and answer are
  // translated and cached independently. The first discard, in part order,
  // discards the whole record.
  RecordTranslation translate_record(const SourceRecord& record, const std::string& image_ref);

  const BackendConfig& config() const noexcept { return config_; }

 private:
  std::string request_with_retries(std::string_view text);

  BackendConfig config_;
  TranslationBackend& backend_;
  TranslationCache& cache_;
  QcPolicy policy_;
  TokenizerSpec tokenizer_;
  RateLimiter limiter_;
  std::mutex inflight_mu_;
  std::map<std::string, std::shared_future<std::string>> inflight_;
};

}  // namespace medcorpus
