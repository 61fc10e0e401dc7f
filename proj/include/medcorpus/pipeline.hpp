// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medcorpus/compositor.hpp"
#include "medcorpus/corpus_model.hpp"
#include "medcorpus/stats.hpp"
#include "medcorpus/translator.hpp"

namespace medcorpus {

struct ManifestSpec {
  Source source = Source::kPmcOa;
  std::filesystem::path path;
};

struct PipelineConfig {
  std::filesystem::path dataset_root;
  std::vector<ManifestSpec> manifests;
  CompositionPolicy composition;
  QcPolicy qc;
  BackendConfig backend;
  TokenizerSpec tokenizer;
  std::uint64_t seed = 0;
  std::size_t shard_size = 10'000;
  double error_budget = 0.01;
  std::filesystem::path templates;   // empty: built-in set
  std::filesystem::path cache_path;  // empty: <output_dir>/cache/translations.jsonl
  std::size_t review_every = 50;     // 0 disables the review sample
  int workers = 0;                   // 0: OpenMP default
  std::filesystem::path output_dir = "out";

  // Relative paths resolve against base_dir. Unknown keys are rejected.
  // Throws Error(kConfigError).
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // SHA-256 of everything that affects outputs; output_dir, cache_path and
  // workers are excluded.
  std::string digest() const;
  void validate() const;
  std::filesystem::path effective_cache_path() const;
};

enum class Stage { kIngest, kCompose, kTranslate, kTemplate, kStats };

inline constexpr std::array<Stage, 5> kAllStages{Stage::kIngest, Stage::kCompose, Stage::kTranslate,
                                                 Stage::kTemplate, Stage::kStats};

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);

struct StageReport {
  Stage stage = Stage::kIngest;
  std::size_t input = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> rejected;
  // Records processed by this invocation; 0 when a completed stage was reused.
  std::size_t processed = 0;
  bool reused = false;

  std::size_t rejected_total() const;
  // Omits processed/reused so reruns serialise identically.
  nlohmann::json to_json() const;
  static StageReport from_json(const nlohmann::json& j);
};

struct ShardInfo {
  std::string file;  // relative to the output directory
  std::size_t records = 0;
  std::string sha256;

  bool operator==(const ShardInfo&) const = default;
};

struct BuildManifest {
  std::vector<StageReport> stages;
  std::vector<ShardInfo> shards;
  std::string config_digest;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

// Writes samples sorted by id into shard-%05d.jsonl files of at most
// shard_size records under out_dir. `prefix` is prepended to the returned
// file names. Throws Error(kIoError).
std::vector<ShardInfo> write_shards(std::vector<DialogSample> samples, std::size_t shard_size,
                                    const std::filesystem::path& out_dir, std::string_view prefix = "");

// File name for a record's composite, percent-encoding anything outside
// [A-Za-z0-9._-] (and a leading dot).
std::string image_file_name(std::string_view record_id);

// Digest over the deliverable tree (images/, alignment/, instruction/,
// stats/, review/, manifest.json, rejections.jsonl). Work and cache
// directories are excluded.
std::string output_tree_digest(const std::filesystem::path& out_dir);

// Stage-by-stage dataset build with on-disk checkpoints under
// <output_dir>/work. A completed stage whose config and input digests are
// unchanged is not recomputed.
class Pipeline {
 public:
  // Without a backend the one described by config.backend is created on
  // first use.
  explicit Pipeline(PipelineConfig config, TranslationBackend* backend = nullptr);
  ~Pipeline();

  // Throws Error with kMissingUpstream, kConfigMismatch, kBudgetExceeded
  // (ingest) or whatever the stage propagates.
  StageReport run_stage(Stage stage);
  BuildManifest build_all();

  // Manifest assembled from completed stages on disk.
  BuildManifest manifest() const;

  const PipelineConfig& config() const noexcept { return config_; }

 private:
  struct Impl;
  PipelineConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace medcorpus
