// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "medcorpus/error.hpp"
#include "medcorpus/fixture.hpp"
#include "medcorpus/translator.hpp"
#include "test_util.hpp"

using namespace medcorpus;
using medcorpus::testing::TempDir;

namespace {

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidInput;
}

BackendConfig fast_config() {
  BackendConfig c;
  c.requests_per_second = 1e6;
  c.retry_backoff_ms = 0;
  return c;
}

SourceRecord caption_record(std::string text) {
  SourceRecord r;
  r.id = "cap-1";
  r.source = Source::kPmcOa;
  r.image_paths = {"images/a.png"};
  r.text_role = TextRole::kInlineDescription;
  r.text = std::move(text);
  return r;
}

SourceRecord qa_record(std::string q, std::string a) {
  SourceRecord r;
  r.id = "qa-1";
  r.source = Source::kPmcVqa;
  r.image_paths = {"images/q.png"};
  r.text_role = TextRole::kQuestionAnswer;
  r.qa = QaPair{std::move(q), std::move(a)};
  return r;
}

const std::string kLongText = "Axial contrast enhanced CT image shows a large heterogeneous mass in the right kidney.";
const std::string kLongQuestion = "What abnormality is shown in the right kidney on this axial CT image today?";

}  // namespace

TEST_CASE("qc_source") {
  const QcPolicy policy;
  CHECK(qc_source("one two three four five", policy) == DiscardReason::kTooBrief);
  CHECK(qc_source("", policy) == DiscardReason::kTooBrief);
  CHECK_FALSE(qc_source(fixture_sentence(3, 50), policy).has_value());
  CHECK_FALSE(qc_source("one two three four five six seven eight nine ten", policy).has_value());
}

TEST_CASE("qc_translation") {
  const QcPolicy policy;
  CHECK(qc_translation("好", policy) == DiscardReason::kTooShort);
  CHECK(qc_translation("The CT scan shows a large mass in the liver.", policy) == DiscardReason::kNotTranslated);
  CHECK_FALSE(qc_translation("CT扫描显示右肾区域肿瘤", policy).has_value());
  CHECK(qc_translation("抱歉，我无法翻译这段医学文本。", policy) == DiscardReason::kRefusal);
  CHECK(qc_translation("I'm sorry, I cannot help.", policy) == DiscardReason::kRefusal);
  // Digits and punctuation only: no letters, so the latin rule does not fire.
  CHECK_FALSE(qc_translation("12345678。", policy).has_value());
}

TEST_CASE("latin ratio") {
  CHECK(latin_ratio("") == 0.0);
  CHECK(latin_ratio("123") == 0.0);
  CHECK(latin_ratio("CT扫描") == 0.5);
  CHECK(latin_ratio("abc") == 1.0);
}

TEST_CASE("translate_text caches and counts calls") {
  MockBackend mock;
  mock.set_output("chest X-ray", "胸部X光片");
  TranslationCache cache;
  Translator t(fast_config(), mock, cache, QcPolicy{});

  auto first = t.translate_text("chest X-ray");
  CHECK(first.text == "胸部X光片");
  CHECK(first.cache == CacheOutcome::kMiss);
  CHECK(mock.calls() == 1);

  auto second = t.translate_text("chest X-ray");
  CHECK(second.text == "胸部X光片");
  CHECK(second.cache == CacheOutcome::kHit);
  CHECK(mock.calls() == 1);

  CHECK(error_of([&] { t.translate_text(""); }) == ErrorCode::kInvalidInput);
  CHECK(mock.calls() == 1);
}

TEST_CASE("transient failures are retried up to max_retries") {
  MockBackend mock;
  mock.set_output("flaky", "不稳定的输入文本");
  mock.set_transient_failures("flaky", 3);
  TranslationCache cache;
  auto config = fast_config();
  config.max_retries = 3;
  Translator t(config, mock, cache, QcPolicy{});
  CHECK(t.translate_text("flaky").text == "不稳定的输入文本");
  CHECK(mock.calls_for("flaky") == 4);

  mock.set_transient_failures("down", 4);
  CHECK(error_of([&] { t.translate_text("down"); }) == ErrorCode::kBackendExhausted);
  CHECK(mock.calls_for("down") == 4);

  mock.set_permanent_failure("bad");
  CHECK(error_of([&] { t.translate_text("bad"); }) == ErrorCode::kBackendError);
  CHECK(mock.calls_for("bad") == 1);
}

TEST_CASE("refusals raise and are cached") {
  MockBackend mock;
  mock.set_output("please", "I'm sorry, but I cannot do that.");
  TranslationCache cache;
  Translator t(fast_config(), mock, cache, QcPolicy{});
  CHECK(error_of([&] { t.translate_text("please"); }) == ErrorCode::kBackendRefusal);
  CHECK(error_of([&] { t.translate_text("please"); }) == ErrorCode::kBackendRefusal);
  CHECK(mock.calls() == 1);
}

TEST_CASE("cache key covers text, prompt version and model") {
  const auto k = translation_cache_key("text", "v1", "m");
  CHECK(k.size() == 64);
  CHECK(k == translation_cache_key("text", "v1", "m"));
  CHECK(k != translation_cache_key("text", "v2", "m"));
  CHECK(k != translation_cache_key("text", "v1", "m2"));
  CHECK(translation_cache_key("ab", "c", "m") != translation_cache_key("a", "bc", "m"));
}

TEST_CASE("file-backed cache survives restarts and torn lines") {
  TempDir dir;
  const auto path = dir / "cache.jsonl";
  {
    MockBackend mock;
    TranslationCache cache(path);
    Translator t(fast_config(), mock, cache, QcPolicy{});
    t.translate_text(kLongText);
    t.translate_text(kLongQuestion);
    CHECK(mock.calls() == 2);
  }
  {
    std::ofstream out(path, std::ios::app);
    out << "{\"key\":\"abc\",\"val";
  }
  MockBackend mock;
  TranslationCache cache(path);
  CHECK(cache.size() == 2);
  Translator t(fast_config(), mock, cache, QcPolicy{});
  CHECK(t.translate_text(kLongText).cache == CacheOutcome::kHit);
  CHECK(t.translate_text(kLongQuestion).cache == CacheOutcome::kHit);
  CHECK(mock.calls() == 0);
}

TEST_CASE("translate_record") {
  MockBackend mock;
  TranslationCache cache;
  Translator t(fast_config(), mock, cache, QcPolicy{});

  SUBCASE("caption record") {
    const auto out = t.translate_record(caption_record(kLongText), "images/cap-1.png");
    REQUIRE(std::holds_alternative<AlignmentPair>(out));
    const auto& pair = std::get<AlignmentPair>(out);
    CHECK(pair.id == "cap-1");
    CHECK(pair.image_ref == "images/cap-1.png");
    CHECK(pair.category == Category::kDescription);
    CHECK(pair.text_zh == pseudo_translate(kLongText));
    CHECK(validate_alignment_pair(pair).ok());
  }
  SUBCASE("brief context record makes no calls") {
    auto r = caption_record("small renal mass noted");
    r.text_role = TextRole::kContext;
    const auto out = t.translate_record(r, "images/x.png");
    REQUIRE(std::holds_alternative<Discard>(out));
    CHECK(std::get<Discard>(out).reason == DiscardReason::kTooBrief);
    CHECK(mock.calls() == 0);
  }
  SUBCASE("question and answer are translated independently") {
    const auto out = t.translate_record(qa_record(kLongQuestion, kLongText), "images/q.png");
    REQUIRE(std::holds_alternative<InstructionPair>(out));
    CHECK(mock.calls() == 2);
    CHECK(t.translate_text(kLongText).cache == CacheOutcome::kHit);
  }
  SUBCASE("answer refusal discards the record") {
    mock.set_output(kLongText, "I'm sorry, I can't translate that.");
    const auto out = t.translate_record(qa_record(kLongQuestion, kLongText), "images/q.png");
    REQUIRE(std::holds_alternative<Discard>(out));
    CHECK(std::get<Discard>(out).reason == DiscardReason::kRefusal);
  }
  SUBCASE("untranslated and too short outputs") {
    mock.set_output(kLongText, kLongText);
    auto out = t.translate_record(caption_record(kLongText), "i.png");
    REQUIRE(std::holds_alternative<Discard>(out));
    CHECK(std::get<Discard>(out).reason == DiscardReason::kNotTranslated);

    mock.set_output(kLongQuestion, "好");
    out = t.translate_record(caption_record(kLongQuestion), "i.png");
    REQUIRE(std::holds_alternative<Discard>(out));
    CHECK(std::get<Discard>(out).reason == DiscardReason::kTooShort);
  }
}

TEST_CASE("backend calls equal distinct texts that pass source QC, under concurrency") {
  MockBackend mock;
  TranslationCache cache;
  Translator t(fast_config(), mock, cache, QcPolicy{});
  std::vector<std::string> texts;
  for (int i = 0; i < 40; ++i) texts.push_back(fixture_sentence(static_cast<std::uint64_t>(i), 15));
  std::vector<std::thread> workers;
  for (int w = 0; w < 8; ++w) {
    workers.emplace_back([&, w] {
      for (int k = 0; k < 200; ++k) {
        const auto& text = texts[static_cast<std::size_t>((k * 7 + w) % 40)];
        t.translate_record(caption_record(text), "i.png");
      }
    });
  }
  for (auto& th : workers) th.join();
  CHECK(mock.calls() == 40);
}

TEST_CASE("rate limiter spaces requests") {
  RateLimiter limiter(50.0);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 6; ++i) limiter.acquire();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(elapsed >= std::chrono::milliseconds(95));
}

TEST_CASE("pseudo translation is deterministic and passes QC") {
  const auto a = pseudo_translate(kLongText);
  CHECK(a == pseudo_translate(kLongText));
  CHECK(latin_ratio(a) == 0.0);
  CHECK_FALSE(qc_translation(a, QcPolicy{}).has_value());
  CHECK(pseudo_translate("12, 34.") == "12，34。");
}

TEST_CASE("mock fixture file") {
  TempDir dir;
  medcorpus::testing::write_text(dir / "mock.jsonl",
                                 "{\"input\":\"a\",\"output\":\"甲\"}\n"
                                 "{\"input\":\"b\",\"fail_times\":1,\"output\":\"乙\"}\n"
                                 "{\"input\":\"c\",\"fail\":\"permanent\"}\n");
  MockBackend mock(dir / "mock.jsonl");
  CHECK(mock.complete("", "a") == "甲");
  CHECK_THROWS_AS(mock.complete("", "b"), BackendFailure);
  CHECK(mock.complete("", "b") == "乙");
  try {
    mock.complete("", "c");
    FAIL("expected failure");
  } catch (const BackendFailure& e) {
    CHECK_FALSE(e.transient());
  }
}

TEST_CASE("backend config validation") {
  BackendConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_retries = -1;
  CHECK(error_of([&] { c.validate(); }) == ErrorCode::kConfigError);
  c = {};
  c.requests_per_second = 0;
  CHECK(error_of([&] { c.validate(); }) == ErrorCode::kConfigError);
  c = {};
  c.prompt_version = "v9";
  CHECK(error_of([&] { c.validate(); }) == ErrorCode::kConfigError);
}

TEST_CASE("HTTP backend wire contract against a local server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  nlohmann::json seen_body;
  std::mutex mu;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = ++hits;
    {
      std::lock_guard lock(mu);
      seen_auth = req.get_header_value("Authorization");
      seen_body = nlohmann::json::parse(req.body);
    }
    const auto text = nlohmann::json::parse(req.body)["messages"][1]["content"].get<std::string>();
    if (text == "busy" && n == 1) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
      return;
    }
    if (text == "forbidden") {
      res.status = 400;
      res.set_content("bad request", "text/plain");
      return;
    }
    const nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "\n译文：" + text + "\n"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("MEDCORPUS_TEST_KEY", "sk-test", 1);
  BackendConfig config = fast_config();
  config.kind = BackendKind::kHttp;
  config.endpoint = fmt::format("http://127.0.0.1:{}/v1/chat/completions", port);
  config.api_key_env = "MEDCORPUS_TEST_KEY";
  config.timeout_seconds = 5;
  auto backend = make_backend(config);

  CHECK(backend->complete(system_prompt("v1"), "hello") == "译文：hello");
  {
    std::lock_guard lock(mu);
    CHECK(seen_auth == "Bearer sk-test");
    CHECK(seen_body["model"] == "gpt-3.5-turbo");
    CHECK(seen_body["messages"][0]["role"] == "system");
    CHECK(seen_body["messages"][0]["content"] == std::string(system_prompt("v1")));
    CHECK(seen_body["messages"][1]["role"] == "user");
  }

  TranslationCache cache;
  Translator t(config, *backend, cache, QcPolicy{});
  hits = 0;
  CHECK(t.translate_text("busy").text == "译文：busy");
  CHECK(hits == 2);
  CHECK(error_of([&] { t.translate_text("forbidden"); }) == ErrorCode::kBackendError);

  server.stop();
  thread.join();
  CHECK(error_of([&] { backend->complete("", "after stop"); }) == ErrorCode::kBackendError);
}

TEST_CASE("HTTP response parsing and status classes") {
  CHECK(HttpBackend::parse_response(R"({"choices":[{"message":{"content":"  好的  "}}]})") == "好的");
  CHECK_THROWS_AS(HttpBackend::parse_response("not json"), BackendFailure);
  CHECK_THROWS_AS(HttpBackend::parse_response(R"({"choices":[]})"), BackendFailure);
  for (int s : {408, 429, 500, 503}) CHECK(HttpBackend::is_transient_status(s));
  for (int s : {400, 401, 403, 404}) CHECK_FALSE(HttpBackend::is_transient_status(s));
}
