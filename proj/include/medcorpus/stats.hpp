// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace medcorpus {

inline constexpr std::string_view kDefaultTokenizerId = "cjk_latin_default";

enum class TokenizerRule { kCjkLatinDefault, kExternal };

struct TokenizerSpec {
  std::string id{kDefaultTokenizerId};
  TokenizerRule rule = TokenizerRule::kCjkLatinDefault;
};

// Default rule: every CJK codepoint is one token, every maximal run of Latin
// letters and digits is one token, everything else separates.
std::size_t count_tokens_default(std::string_view text) noexcept;

// Throws Error(kUnknownTokenizer) for an external id that was never
// registered.
std::size_t count_tokens(std::string_view text, const TokenizerSpec& tokenizer);

using TokenCountFn = std::function<std::size_t(std::string_view)>;

// Registers an external tokenizer. Re-registering an id replaces it.
void register_tokenizer(const std::string& id, TokenCountFn fn);
bool has_tokenizer(std::string_view id);

// Linear-interpolation quantile over the sorted values.
// Throws Error(kEmptyInput) for an empty list or kInvalidInput for q outside [0, 1].
double quantile(std::span<const double> values, double q);
double quantile_sorted(std::span<const double> sorted, double q);

struct CorpusStats {
  std::string label;
  std::size_t pair_count = 0;
  std::uint64_t total_tokens = 0;
  std::uint64_t max_tokens = 0;
  double median = 0;
  double q1 = 0;
  double q3 = 0;

  bool operator==(const CorpusStats&) const = default;
};

nlohmann::json to_json(const CorpusStats& s);

// Statistics of precomputed per-record token counts. Order-independent.
CorpusStats summarize_counts(std::string label, std::span<const std::size_t> counts);

// Statistics over the texts; counting runs in parallel.
CorpusStats summarize_texts(std::string label, std::span<const std::string> texts,
                            const TokenizerSpec& tokenizer);

// Records for which the selector yields nullopt do not count towards
// pair_count. Throws Error(kEmptyInput) when no record has the field.
template <typename Record, typename Selector>
CorpusStats summarize_field(std::string label, std::span<const Record> records, Selector select,
                            const TokenizerSpec& tokenizer) {
  std::vector<std::string> texts;
  for (const auto& r : records) {
    std::optional<std::string> t = select(r);
    if (t) texts.push_back(std::move(*t));
  }
  return summarize_texts(std::move(label), texts, tokenizer);
}

// One column of a statistics table: a source, or the total.
struct StatsColumn {
  std::string name;
  std::size_t pairs = 0;
  // Parallel to StatsTable::fields; nullopt renders as "-".
  std::vector<std::optional<CorpusStats>> fields;
};

struct StatsTable {
  std::string pair_row_label;       // e.g. "Image-Text pairs #"
  std::vector<std::string> fields;  // short field names, e.g. {"C", "I"}
  std::vector<StatsColumn> columns;
};

// Cell conventions.
std::string format_count(std::uint64_t v);        // 316838 -> "316,838"
std::string format_token_total(std::uint64_t v);  // >= 10^6 floors to "167M"
std::string format_number(double v);              // integral values without decimals
std::string format_quartiles(const CorpusStats& s);  // "435 (211, 757)"

std::string render_stats_table(const StatsTable& table);
nlohmann::json stats_table_to_json(const StatsTable& table);

}  // namespace medcorpus
