// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>

#include <fmt/format.h>

#include "medcorpus/error.hpp"
#include "medcorpus/hashing.hpp"
#include "medcorpus/pipeline.hpp"

namespace medcorpus {

std::vector<ShardInfo> write_shards(std::vector<DialogSample> samples, std::size_t shard_size,
                                    const std::filesystem::path& out_dir, std::string_view prefix) {
  if (shard_size < 1) throw Error(ErrorCode::kInvalidInput, "shard_size must be >= 1");
  std::sort(samples.begin(), samples.end(),
            [](const DialogSample& a, const DialogSample& b) { return a.id < b.id; });
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));

  std::vector<ShardInfo> shards;
  for (std::size_t begin = 0; begin < samples.size(); begin += shard_size) {
    const std::size_t end = std::min(samples.size(), begin + shard_size);
    std::string bytes;
    for (std::size_t i = begin; i < end; ++i) {
      bytes += to_jsonl_line(to_json(samples[i]));
      bytes += '\n';
    }
    const auto name = fmt::format("shard-{:05d}.jsonl", shards.size());
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write {}", (out_dir / name).string()));
    shards.push_back({std::string(prefix) + name, end - begin, sha256_hex(bytes)});
  }
  return shards;
}

std::string image_file_name(std::string_view record_id) {
  std::string out;
  for (std::size_t i = 0; i < record_id.size(); ++i) {
    const auto c = static_cast<unsigned char>(record_id[i]);
    const bool safe = std::isalnum(c) || c == '_' || c == '-' || (c == '.' && i > 0);
    if (safe) {
      out.push_back(static_cast<char>(c));
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  return out + ".png";
}

std::string output_tree_digest(const std::filesystem::path& out_dir) {
  static constexpr std::array<std::string_view, 5> kDirs{"images", "alignment", "instruction", "stats", "review"};
  static constexpr std::array<std::string_view, 2> kFiles{"manifest.json", "rejections.jsonl"};
  std::vector<std::filesystem::path> files;
  for (auto dir : kDirs) {
    const auto root = out_dir / dir;
    if (!std::filesystem::exists(root)) continue;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
  }
  for (auto f : kFiles) {
    if (std::filesystem::exists(out_dir / f)) files.push_back(out_dir / f);
  }
  std::vector<std::string> rel;
  rel.reserve(files.size());
  for (const auto& f : files) rel.push_back(std::filesystem::relative(f, out_dir).generic_string());
  std::sort(rel.begin(), rel.end());
  Sha256 h;
  for (const auto& r : rel) {
    h.update(r);
    h.update(std::string_view("\0", 1));
    h.update(sha256_file(out_dir / r));
    h.update("\n");
  }
  return h.hex_digest();
}

}  // namespace medcorpus
