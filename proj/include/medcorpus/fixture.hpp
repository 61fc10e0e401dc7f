// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "medcorpus/corpus_model.hpp"

namespace medcorpus {

// Synthetic corpus for tests, benchmarks and the CLI demo. Everything is a
// pure function of the options, so two generations into different
// directories are byte-identical.
struct FixtureOptions {
  std::size_t records = 100;
  std::uint64_t seed = 1;
  bool all_caption = false;  // no question_answer records
  // Fraction of records that trigger each discard/rejection path.
  double brief_fraction = 0.05;
  double refusal_fraction = 0.02;
  double untranslated_fraction = 0.02;
  double too_short_fraction = 0.02;
  double too_many_images_fraction = 0.02;
  double missing_image_fraction = 0.01;
  // Lines that fail to parse, added to the pmc_oa manifest.
  std::size_t malformed_lines = 0;
  std::size_t image_pool = 48;
  std::size_t shard_size = 10'000;
};

struct FixtureCorpus {
  std::filesystem::path root;
  std::filesystem::path config_path;
  std::filesystem::path mock_fixture;
  std::vector<SourceRecord> records;  // as written, before any filtering
  std::size_t manifest_lines = 0;     // non-blank lines across manifests
};

// Writes images/, manifests/{pmc_oa,pmc_casereport,pmc_vqa}.jsonl,
// mock_translations.jsonl and config.json (output_dir "out") under root.
FixtureCorpus make_fixture_corpus(const std::filesystem::path& root, const FixtureOptions& options);

// English sentence of exactly `words` whitespace-separated words.
std::string fixture_sentence(std::uint64_t seed, std::size_t words);

}  // namespace medcorpus
