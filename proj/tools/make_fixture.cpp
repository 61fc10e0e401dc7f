// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <fmt/format.h>

#include "medcorpus/fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic corpus (images, manifests, mock translations, config)"};
  std::string root;
  medcorpus::FixtureOptions options;
  app.add_option("dir", root, "Output directory")->required();
  app.add_option("--records", options.records, "Number of records");
  app.add_option("--seed", options.seed, "Generator seed");
  app.add_option("--malformed", options.malformed_lines, "Unparseable lines in the pmc_oa manifest");
  app.add_option("--shard-size", options.shard_size, "shard_size written to config.json");
  app.add_flag("--all-caption", options.all_caption, "Only alignment (non-QA) records");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = medcorpus::make_fixture_corpus(root, options);
    fmt::print("{} records, {} manifest lines\nconfig {}\n", corpus.records.size(), corpus.manifest_lines,
               corpus.config_path.string());
  } catch (const std::exception& e) {
    fmt::print(stderr, "make_fixture: {}\n", e.what());
    return 1;
  }
  return 0;
}
