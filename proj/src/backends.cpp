// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "medcorpus/hashing.hpp"
#include "medcorpus/translator.hpp"
#include "medcorpus/unicode.hpp"

namespace medcorpus {

MockBackend::MockBackend(const std::filesystem::path& fixture) {
  std::ifstream in(fixture);
  if (!in) throw Error(ErrorCode::kFileNotFound, fixture.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto input = j.at("input").get<std::string>();
      if (j.contains("output")) set_output(input, j.at("output").get<std::string>());
      if (j.contains("fail_times")) set_transient_failures(input, j.at("fail_times").get<int>());
      if (j.contains("fail")) {
        if (j.at("fail").get<std::string>() != "permanent") {
          throw Error(ErrorCode::kConfigError, "\"fail\" must be \"permanent\"");
        }
        set_permanent_failure(input);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfigError, fmt::format("{}:{}: {}", fixture.string(), line_no, e.what()));
    }
  }
}

void MockBackend::set_output(std::string input, std::string output) {
  std::lock_guard lock(mu_);
  scripts_[std::move(input)].output = std::move(output);
}

void MockBackend::set_transient_failures(std::string input, int count) {
  std::lock_guard lock(mu_);
  scripts_[std::move(input)].transient_failures = count;
}

void MockBackend::set_permanent_failure(std::string input) {
  std::lock_guard lock(mu_);
  scripts_[std::move(input)].permanent_failure = true;
}

std::size_t MockBackend::calls_for(std::string_view input) const {
  std::lock_guard lock(mu_);
  auto it = per_input_calls_.find(std::string(input));
  return it == per_input_calls_.end() ? 0 : it->second;
}

std::string MockBackend::complete(std::string_view /*system_prompt*/, std::string_view text) {
  ++calls_;
  std::string key(text);
  std::optional<std::string> output;
  {
    std::lock_guard lock(mu_);
    ++per_input_calls_[key];
    if (auto it = scripts_.find(key); it != scripts_.end()) {
      auto& script = it->second;
      if (script.permanent_failure) throw BackendFailure(false, "mock: scripted permanent failure");
      if (script.transient_failures > 0) {
        --script.transient_failures;
        throw BackendFailure(true, "mock: scripted transient failure");
      }
      output = script.output;
    }
  }
  ++successes_;
  return output ? *output : pseudo_translate(text);
}

std::string pseudo_translate(std::string_view text) {
  std::string out;
  std::string word;
  bool word_has_letter = false;
  auto flush = [&] {
    if (word.empty()) return;
    if (!word_has_letter) {
      out += word;
    } else {
      std::string lower;
      for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      const auto h = stable_hash64(lower);
      // Two ideographs from the common block U+4E00..U+9FA5.
      unicode::append_utf8(out, static_cast<char32_t>(0x4E00 + (h % 0x51A6)));
      unicode::append_utf8(out, static_cast<char32_t>(0x4E00 + ((h >> 32) % 0x51A6)));
    }
    word.clear();
    word_has_letter = false;
  };
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t start = pos;
    const char32_t cp = unicode::next_codepoint(text, pos);
    if (unicode::is_latin_letter(cp) || unicode::is_digit(cp)) {
      word.append(text.substr(start, pos - start));
      word_has_letter = word_has_letter || unicode::is_latin_letter(cp);
      continue;
    }
    flush();
    switch (cp) {
      case '.': out += "。"; break;
      case ',': out += "，"; break;
      case ';': out += "；"; break;
      case ':': out += "："; break;
      case '?': out += "？"; break;
      case '!': out += "！"; break;
      case '(': out += "（"; break;
      case ')': out += "）"; break;
      case ' ': case '\t': case '\n': case '\r': break;
      default: out.append(text.substr(start, pos - start));
    }
  }
  flush();
  return out;
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfigError, fmt::format("endpoint '{}' lacks a scheme", config_.endpoint));
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr) api_key_ = key;
}

nlohmann::json HttpBackend::request_body(std::string_view model, std::string_view system_prompt,
                                         std::string_view text) {
  return {{"model", model},
          {"temperature", 0},
          {"messages",
           {{{"role", "system"}, {"content", system_prompt}}, {{"role", "user"}, {"content", text}}}}};
}

std::string HttpBackend::parse_response(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw BackendFailure(false, "response is not JSON");
  try {
    auto content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    // Trim surrounding whitespace; models often append a newline.
    const auto first = content.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = content.find_last_not_of(" \t\r\n");
    return content.substr(first, last - first + 1);
  } catch (const nlohmann::json::exception& e) {
    throw BackendFailure(false, fmt::format("unexpected response shape: {}", e.what()));
  }
}

bool HttpBackend::is_transient_status(int status) {
  return status == 408 || status == 409 || status == 425 || status == 429 || (status >= 500 && status <= 599);
}

std::string HttpBackend::complete(std::string_view system_prompt, std::string_view text) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto body = request_body(config_.model, system_prompt, text).dump();
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) throw BackendFailure(true, fmt::format("request failed: {}", httplib::to_string(res.error())));
  if (res->status != 200) {
    throw BackendFailure(is_transient_status(res->status), fmt::format("HTTP {}: {}", res->status, res->body));
  }
  return parse_response(res->body);
}

std::unique_ptr<TranslationBackend> make_backend(const BackendConfig& config) {
  if (config.kind == BackendKind::kHttp) return std::make_unique<HttpBackend>(config);
  if (config.mock_fixture.empty()) return std::make_unique<MockBackend>();
  return std::make_unique<MockBackend>(config.mock_fixture);
}

}  // namespace medcorpus
