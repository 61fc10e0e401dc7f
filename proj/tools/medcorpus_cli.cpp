// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include <fmt/format.h>

#include "medcorpus/error.hpp"
#include "medcorpus/pipeline.hpp"

namespace {

using medcorpus::ErrorCode;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBudgetExceeded:
    case ErrorCode::kConfigError:
    case ErrorCode::kConfigMismatch:
    case ErrorCode::kMissingUpstream:
    case ErrorCode::kUnknownTokenizer:
      return 2;
    default:
      return 1;
  }
}

void print_report(const medcorpus::StageReport& r) {
  std::string rejected;
  for (const auto& [reason, n] : r.rejected) rejected += fmt::format(" {}={}", reason, n);
  fmt::print("{:<9} input={} kept={} rejected={}{}{}\n", medcorpus::to_string(r.stage), r.input, r.kept,
             r.rejected_total(), rejected, r.reused ? " (reused)" : "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build bilingual medical image-text corpora"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string templates;
  app.add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out_dir, "Override the output directory");
  app.add_option("--templates", templates, "Prompt template file (JSONL)");

  std::vector<std::pair<CLI::App*, std::optional<medcorpus::Stage>>> commands;
  for (auto stage : medcorpus::kAllStages) {
    const auto name = std::string(medcorpus::to_string(stage));
    commands.emplace_back(app.add_subcommand(name, fmt::format("Run the {} stage", name)), stage);
  }
  commands.emplace_back(app.add_subcommand("build", "Run every stage and print the output digest"), std::nullopt);
  for (auto& [cmd, stage] : commands) cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto config = medcorpus::PipelineConfig::load(config_path);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.output_dir = std::filesystem::absolute(out_dir);
    if (!templates.empty()) config.templates = std::filesystem::absolute(templates);
    config.validate();
    medcorpus::Pipeline pipeline(config);

    for (const auto& [cmd, stage] : commands) {
      if (!cmd->parsed()) continue;
      if (stage) {
        print_report(pipeline.run_stage(*stage));
      } else {
        for (auto s : medcorpus::kAllStages) print_report(pipeline.run_stage(s));
        const auto manifest = pipeline.manifest();
        fmt::print("shards {}\n", manifest.shards.size());
        fmt::print("digest {}\n", medcorpus::output_tree_digest(config.output_dir));
      }
    }
    return 0;
  } catch (const medcorpus::Error& e) {
    fmt::print(stderr, "medcorpus: {}\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    fmt::print(stderr, "medcorpus: {}\n", e.what());
    return 1;
  }
}
