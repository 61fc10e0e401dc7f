// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "medcorpus/error.hpp"
#include "medcorpus/hashing.hpp"
#include "medcorpus/pipeline.hpp"

namespace medcorpus {

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::string_view where, std::set<std::string_view> allowed) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, fmt::format("{} must be an object", where));
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw Error(ErrorCode::kConfigError, fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfigError, fmt::format("key '{}': {}", key, e.what()));
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

void read_path(const nlohmann::json& j, const char* key, const std::filesystem::path& base,
               std::filesystem::path& out) {
  if (j.contains(key)) {
    std::string s;
    read(j, key, s);
    out = resolve(base, s);
  }
}

ResizeFilter parse_filter(std::string_view s) {
  if (s == "bilinear") return ResizeFilter::kBilinear;
  if (s == "nearest") return ResizeFilter::kNearest;
  throw Error(ErrorCode::kConfigError, fmt::format("unknown resize_filter '{}'", s));
}

std::string_view filter_name(ResizeFilter f) { return f == ResizeFilter::kBilinear ? "bilinear" : "nearest"; }

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  reject_unknown_keys(j, "config",
                      {"dataset_root", "manifests", "seed", "shard_size", "error_budget", "workers",
                       "review_every", "templates", "cache_path", "output_dir", "composition", "qc",
                       "backend", "tokenizer"});
  PipelineConfig c;
  read_path(j, "dataset_root", base_dir, c.dataset_root);
  if (c.dataset_root.empty()) c.dataset_root = base_dir;
  if (auto it = j.find("manifests"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::kConfigError, "manifests must be an array");
    for (const auto& m : *it) {
      reject_unknown_keys(m, "manifest entry", {"source", "path"});
      std::string source;
      std::string path;
      read(m, "source", source);
      read(m, "path", path);
      try {
        c.manifests.push_back({parse_source(source), resolve(c.dataset_root, path)});
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfigError, e.what());
      }
    }
  }
  read(j, "seed", c.seed);
  read(j, "shard_size", c.shard_size);
  read(j, "error_budget", c.error_budget);
  read(j, "workers", c.workers);
  read(j, "review_every", c.review_every);
  read_path(j, "templates", base_dir, c.templates);
  read_path(j, "cache_path", base_dir, c.cache_path);
  read_path(j, "output_dir", base_dir, c.output_dir);

  if (auto it = j.find("composition"); it != j.end()) {
    reject_unknown_keys(*it, "composition", {"max_images", "max_extremeness", "min_edge_px", "resize_filter"});
    read(*it, "max_images", c.composition.max_images);
    read(*it, "max_extremeness", c.composition.max_extremeness);
    read(*it, "min_edge_px", c.composition.min_edge_px);
    std::string filter{filter_name(c.composition.resize_filter)};
    read(*it, "resize_filter", filter);
    c.composition.resize_filter = parse_filter(filter);
  }
  if (auto it = j.find("qc"); it != j.end()) {
    reject_unknown_keys(*it, "qc", {"min_source_tokens", "min_translated_chars", "max_latin_ratio", "refusal_markers"});
    read(*it, "min_source_tokens", c.qc.min_source_tokens);
    read(*it, "min_translated_chars", c.qc.min_translated_chars);
    read(*it, "max_latin_ratio", c.qc.max_latin_ratio);
    read(*it, "refusal_markers", c.qc.refusal_markers);
  }
  if (auto it = j.find("backend"); it != j.end()) {
    reject_unknown_keys(*it, "backend",
                        {"kind", "endpoint", "model", "max_retries", "requests_per_second", "timeout_seconds",
                         "prompt_version", "api_key_env", "retry_backoff_ms", "mock_fixture"});
    std::string kind = c.backend.kind == BackendKind::kMock ? "mock" : "http";
    read(*it, "kind", kind);
    if (kind == "mock") {
      c.backend.kind = BackendKind::kMock;
    } else if (kind == "http") {
      c.backend.kind = BackendKind::kHttp;
    } else {
      throw Error(ErrorCode::kConfigError, fmt::format("unknown backend kind '{}'", kind));
    }
    read(*it, "endpoint", c.backend.endpoint);
    read(*it, "model", c.backend.model);
    read(*it, "max_retries", c.backend.max_retries);
    read(*it, "requests_per_second", c.backend.requests_per_second);
    read(*it, "timeout_seconds", c.backend.timeout_seconds);
    read(*it, "prompt_version", c.backend.prompt_version);
    read(*it, "api_key_env", c.backend.api_key_env);
    read(*it, "retry_backoff_ms", c.backend.retry_backoff_ms);
    read_path(*it, "mock_fixture", base_dir, c.backend.mock_fixture);
  }
  if (auto it = j.find("tokenizer"); it != j.end()) {
    reject_unknown_keys(*it, "tokenizer", {"id", "rule"});
    read(*it, "id", c.tokenizer.id);
    std::string rule = c.tokenizer.rule == TokenizerRule::kCjkLatinDefault ? "cjk_latin_default" : "external";
    read(*it, "rule", rule);
    if (rule == "cjk_latin_default") {
      c.tokenizer.rule = TokenizerRule::kCjkLatinDefault;
    } else if (rule == "external") {
      c.tokenizer.rule = TokenizerRule::kExternal;
    } else {
      throw Error(ErrorCode::kConfigError, fmt::format("unknown tokenizer rule '{}'", rule));
    }
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, fmt::format("cannot read config {}", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, fmt::format("{}: {}", path.string(), e.what()));
  }
  return from_json(j, std::filesystem::absolute(path).parent_path());
}

nlohmann::json PipelineConfig::to_json() const {
  auto manifests_json = nlohmann::json::array();
  for (const auto& m : manifests) {
    manifests_json.push_back({{"source", to_string(m.source)}, {"path", m.path.string()}});
  }
  return {
      {"dataset_root", dataset_root.string()},
      {"manifests", std::move(manifests_json)},
      {"seed", seed},
      {"shard_size", shard_size},
      {"error_budget", error_budget},
      {"workers", workers},
      {"review_every", review_every},
      {"templates", templates.string()},
      {"cache_path", cache_path.string()},
      {"output_dir", output_dir.string()},
      {"composition",
       {{"max_images", composition.max_images},
        {"max_extremeness", composition.max_extremeness},
        {"min_edge_px", composition.min_edge_px},
        {"resize_filter", filter_name(composition.resize_filter)}}},
      {"qc",
       {{"min_source_tokens", qc.min_source_tokens},
        {"min_translated_chars", qc.min_translated_chars},
        {"max_latin_ratio", qc.max_latin_ratio},
        {"refusal_markers", qc.refusal_markers}}},
      {"backend",
       {{"kind", backend.kind == BackendKind::kMock ? "mock" : "http"},
        {"endpoint", backend.endpoint},
        {"model", backend.model},
        {"max_retries", backend.max_retries},
        {"requests_per_second", backend.requests_per_second},
        {"timeout_seconds", backend.timeout_seconds},
        {"prompt_version", backend.prompt_version},
        {"api_key_env", backend.api_key_env},
        {"retry_backoff_ms", backend.retry_backoff_ms},
        {"mock_fixture", backend.mock_fixture.string()}}},
      {"tokenizer",
       {{"id", tokenizer.id},
        {"rule", tokenizer.rule == TokenizerRule::kCjkLatinDefault ? "cjk_latin_default" : "external"}}},
  };
}

std::string PipelineConfig::digest() const {
  auto j = to_json();
  j.erase("output_dir");
  j.erase("cache_path");
  j.erase("workers");
  return sha256_hex(to_jsonl_line(j));
}

void PipelineConfig::validate() const {
  if (shard_size < 1) throw Error(ErrorCode::kConfigError, "shard_size must be >= 1");
  if (!(error_budget >= 0.0 && error_budget <= 1.0)) throw Error(ErrorCode::kConfigError, "error_budget must be in [0,1]");
  if (workers < 0) throw Error(ErrorCode::kConfigError, "workers must be >= 0");
  if (output_dir.empty()) throw Error(ErrorCode::kConfigError, "output_dir must be set");
  if (tokenizer.id.empty()) throw Error(ErrorCode::kConfigError, "tokenizer id must be non-empty");
  for (const auto& m : manifests) {
    if (m.path.empty()) throw Error(ErrorCode::kConfigError, "manifest path must be set");
  }
  composition.validate();
  qc.validate();
  backend.validate();
}

std::filesystem::path PipelineConfig::effective_cache_path() const {
  return cache_path.empty() ? output_dir / "cache" / "translations.jsonl" : cache_path;
}

}  // namespace medcorpus
