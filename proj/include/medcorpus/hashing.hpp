// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace medcorpus {

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Incremental SHA-256 for digests over several pieces.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  std::string hex_digest();

 private:
  void* ctx_;
};

// FNV-1a followed by the splitmix64 finalizer. Stable across platforms and
// runs; used wherever an order-independent pseudo-random choice is keyed on
// content.
std::uint64_t stable_hash64(std::string_view bytes) noexcept;

}  // namespace medcorpus
