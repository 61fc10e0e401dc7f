// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent reimplementation of token counting and field statistics,
// written without the library's unicode helpers or quantile code.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "medcorpus/stats.hpp"

namespace medcorpus::testing {

inline std::vector<std::uint32_t> oracle_decode(std::string_view s) {
  std::vector<std::uint32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
    std::uint32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    bool ok = len > 0 && i + static_cast<std::size_t>(len) <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (ok) {
      const std::uint32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
      if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) ok = false;
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
    } else {
      out.push_back(cp);
      i += static_cast<std::size_t>(len);
    }
  }
  return out;
}

inline bool oracle_in(std::uint32_t cp, std::uint32_t lo, std::uint32_t hi) { return cp >= lo && cp <= hi; }

inline bool oracle_cjk(std::uint32_t cp) {
  return oracle_in(cp, 0x4E00, 0x9FFF) || oracle_in(cp, 0x3400, 0x4DBF) || oracle_in(cp, 0x20000, 0x3134F) ||
         oracle_in(cp, 0xF900, 0xFAFF) || oracle_in(cp, 0x3040, 0x30FF) || oracle_in(cp, 0xAC00, 0xD7A3);
}

inline bool oracle_word(std::uint32_t cp) {
  if (oracle_in(cp, 'a', 'z') || oracle_in(cp, 'A', 'Z') || oracle_in(cp, '0', '9')) return true;
  if (oracle_in(cp, 0xC0, 0x24F) && cp != 0xD7 && cp != 0xF7) return true;
  return oracle_in(cp, 0xFF21, 0xFF3A) || oracle_in(cp, 0xFF41, 0xFF5A) || oracle_in(cp, 0xFF10, 0xFF19);
}

inline std::size_t oracle_count_tokens(std::string_view text) {
  std::size_t tokens = 0;
  bool in_run = false;
  for (auto cp : oracle_decode(text)) {
    if (oracle_cjk(cp)) {
      ++tokens;
      in_run = false;
    } else if (oracle_word(cp)) {
      if (!in_run) ++tokens;
      in_run = true;
    } else {
      in_run = false;
    }
  }
  return tokens;
}

// Type-7 quantile for q in {0, 1/4, 1/2, 3/4, 1} evaluated exactly in integers.
inline double oracle_quartile(std::vector<std::uint64_t> v, int quarter) {
  std::sort(v.begin(), v.end());
  const std::uint64_t pos4 = static_cast<std::uint64_t>(quarter) * (v.size() - 1);  // 4·h
  const std::uint64_t lo = pos4 / 4;
  const std::uint64_t frac4 = pos4 % 4;
  if (frac4 == 0) return static_cast<double>(v[lo]);
  const std::uint64_t num4 = 4 * v[lo] + frac4 * (v[lo + 1] - v[lo]);
  return static_cast<double>(num4) / 4.0;
}

inline CorpusStats oracle_summarize(std::string label, const std::vector<std::string>& texts) {
  std::vector<std::uint64_t> counts;
  for (const auto& t : texts) counts.push_back(oracle_count_tokens(t));
  CorpusStats s;
  s.label = std::move(label);
  s.pair_count = counts.size();
  s.total_tokens = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  s.max_tokens = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  s.q1 = oracle_quartile(counts, 1);
  s.median = oracle_quartile(counts, 2);
  s.q3 = oracle_quartile(counts, 3);
  return s;
}

}  // namespace medcorpus::testing
