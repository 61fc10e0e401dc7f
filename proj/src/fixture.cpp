// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/fixture.hpp"

#include <array>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "medcorpus/error.hpp"
#include "medcorpus/image.hpp"

namespace medcorpus {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 64> kWords{
    "the",       "scan",      "shows",     "a",          "lesion",     "in",        "left",      "right",
    "lobe",      "of",        "liver",     "with",       "contrast",   "enhancement", "axial",    "CT",
    "MRI",       "image",     "patient",   "presented",  "mass",       "kidney",    "tumor",     "margin",
    "measuring", "mm",        "arrow",     "indicates",  "fracture",   "femur",     "biopsy",    "confirmed",
    "carcinoma", "chest",     "radiograph", "opacity",   "pleural",    "effusion",  "cardiac",   "silhouette",
    "normal",    "findings",  "after",     "treatment",  "follow-up",  "weeks",     "showed",    "regression",
    "nodule",    "calcified", "hepatic",   "portal",     "vein",       "thrombosis", "ultrasound", "hypoechoic",
    "region",    "brain",     "white",     "matter",     "signal",     "increased", "T2",        "weighted"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }

 private:
  std::mt19937_64 engine_;
};

std::string sentence(Rng& rng, std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i > 0) out += ' ';
    out += kWords[rng.below(kWords.size())];
  }
  if (words > 0) out += '.';
  return out;
}

ImageBuffer pattern(std::size_t w, std::size_t h, std::uint64_t salt) {
  ImageBuffer img;
  img.width = w;
  img.height = h;
  img.pixels.resize(w * h * 3);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      auto* p = &img.pixels[(y * w + x) * 3];
      p[0] = static_cast<std::uint8_t>((x * 255) / std::max<std::size_t>(1, w - 1));
      p[1] = static_cast<std::uint8_t>((y * 255) / std::max<std::size_t>(1, h - 1));
      p[2] = static_cast<std::uint8_t>((x * 7 + y * 13 + salt * 31) & 0xFF);
    }
  }
  return img;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write {}", path.string()));
}

}  // namespace

std::string fixture_sentence(std::uint64_t seed, std::size_t words) {
  Rng rng(seed);
  return sentence(rng, words);
}

FixtureCorpus make_fixture_corpus(const fs::path& root, const FixtureOptions& options) {
  Rng rng(options.seed);
  FixtureCorpus corpus;
  corpus.root = root;
  fs::create_directories(root / "images");
  fs::create_directories(root / "manifests");

  std::vector<std::string> pool;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, options.image_pool); ++i) {
    std::size_t w = rng.between(64, 160);
    std::size_t h = rng.between(64, 160);
    if (i % 12 == 11) {
      // Wide strip: extreme on its own and hard to combine.
      w = rng.between(200, 260);
      h = rng.between(40, 50);
    }
    const auto img = pattern(w, h, i);
    if (i % 4 == 3) {
      const auto name = fmt::format("images/img_{:03d}.jpg", i);
      const auto bytes = encode_jpeg(img, 85);
      write_bytes(root / name, std::string(bytes.begin(), bytes.end()));
      pool.push_back(name);
    } else {
      const auto name = fmt::format("images/img_{:03d}.png", i);
      write_png(root / name, img);
      pool.push_back(name);
    }
  }
  write_bytes(root / "images/corrupt.png", "\x89PNG\r\n\x1a\nthis is not really a png");

  std::string mock;
  auto map_output = [&](const std::string& input, const std::string& output) {
    mock += to_jsonl_line({{"input", input}, {"output", output}});
    mock += '\n';
  };

  std::array<std::string, 3> manifests;
  for (std::size_t i = 0; i < options.records; ++i) {
    SourceRecord r;
    const auto pick = rng.below(10);
    if (options.all_caption) {
      r.source = pick < 6 ? Source::kPmcOa : Source::kPmcCaseReport;
      r.text_role = rng.chance(0.7) ? TextRole::kInlineDescription : TextRole::kContext;
    } else if (pick < 4) {
      r.source = Source::kPmcOa;
      r.text_role = rng.chance(0.8) ? TextRole::kInlineDescription : TextRole::kContext;
    } else if (pick < 7) {
      r.source = Source::kPmcCaseReport;
      const auto role = rng.below(3);
      r.text_role = role == 0 ? TextRole::kContext
                    : role == 1 ? TextRole::kInlineDescription
                                : TextRole::kQuestionAnswer;
    } else {
      r.source = Source::kPmcVqa;
      r.text_role = TextRole::kQuestionAnswer;
    }
    const std::string_view prefix = r.source == Source::kPmcOa           ? "oa"
                                    : r.source == Source::kPmcCaseReport ? "cr"
                                                                         : "vqa";
    r.id = fmt::format("{}-{:06d}", prefix, i);

    std::size_t images = rng.chance(0.6) ? 1 : rng.between(2, 4);
    if (rng.chance(options.too_many_images_fraction)) images = rng.between(5, 7);
    for (std::size_t k = 0; k < images; ++k) r.image_paths.push_back(pool[rng.below(pool.size())]);
    if (rng.chance(options.missing_image_fraction)) {
      r.image_paths.back() = rng.chance(0.5) ? "images/corrupt.png" : fmt::format("images/missing_{}.png", i);
    }

    const bool brief = rng.chance(options.brief_fraction);
    auto body = [&](std::size_t lo, std::size_t hi) { return sentence(rng, brief ? rng.between(2, 6) : rng.between(lo, hi)); };
    std::string translated_text;
    if (r.text_role == TextRole::kQuestionAnswer) {
      r.qa = QaPair{body(10, 20), sentence(rng, rng.between(10, 25))};
      translated_text = r.qa->answer;
    } else {
      r.text = body(12, 40);
      translated_text = r.text;
    }
    if (!brief) {
      if (rng.chance(options.refusal_fraction)) {
        map_output(translated_text, "I'm sorry, but I cannot translate this text.");
      } else if (rng.chance(options.untranslated_fraction)) {
        map_output(translated_text, translated_text);
      } else if (rng.chance(options.too_short_fraction)) {
        map_output(translated_text, "好");
      }
    }

    manifests[static_cast<std::size_t>(r.source)] += to_jsonl_line(to_json(r)) + "\n";
    ++corpus.manifest_lines;
    corpus.records.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < options.malformed_lines; ++i) {
    manifests[static_cast<std::size_t>(Source::kPmcOa)] += fmt::format("{{\"id\": \"broken-{}\", \"source\":\n", i);
    ++corpus.manifest_lines;
  }

  const std::array<std::string_view, 3> names{"pmc_oa", "pmc_casereport", "pmc_vqa"};
  nlohmann::json manifest_list = nlohmann::json::array();
  for (std::size_t s = 0; s < names.size(); ++s) {
    const auto rel = fmt::format("manifests/{}.jsonl", names[s]);
    write_bytes(root / rel, manifests[s]);
    manifest_list.push_back({{"source", names[s]}, {"path", rel}});
  }
  corpus.mock_fixture = root / "mock_translations.jsonl";
  write_bytes(corpus.mock_fixture, mock);

  const nlohmann::json config{
      {"dataset_root", "."},
      {"manifests", manifest_list},
      {"seed", options.seed},
      {"shard_size", options.shard_size},
      {"error_budget", 0.01},
      {"output_dir", "out"},
      {"backend",
       {{"kind", "mock"},
        {"mock_fixture", "mock_translations.jsonl"},
        {"requests_per_second", 1e6},
        {"retry_backoff_ms", 1}}},
  };
  corpus.config_path = root / "config.json";
  write_bytes(corpus.config_path, config.dump(2) + "\n");
  return corpus;
}

}  // namespace medcorpus
