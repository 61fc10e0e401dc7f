// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#include "medcorpus/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include <fmt/format.h>

#include "medcorpus/error.hpp"
#include "medcorpus/kernels.hpp"
#include "medcorpus/unicode.hpp"

namespace medcorpus {

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, TokenCountFn, std::less<>>& registry() {
  static std::map<std::string, TokenCountFn, std::less<>> r;
  return r;
}

TokenCountFn find_tokenizer(std::string_view id) {
  std::lock_guard lock(registry_mutex());
  auto it = registry().find(id);
  if (it == registry().end()) {
    throw Error(ErrorCode::kUnknownTokenizer, fmt::format("no tokenizer registered as '{}'", id));
  }
  return it->second;
}

}  // namespace

std::size_t count_tokens_default(std::string_view text) noexcept {
  std::size_t tokens = 0;
  bool in_word = false;
  for (std::size_t pos = 0; pos < text.size();) {
    const char32_t cp = unicode::next_codepoint(text, pos);
    if (unicode::is_latin_letter(cp) || unicode::is_digit(cp)) {
      if (!in_word) ++tokens;
      in_word = true;
      continue;
    }
    in_word = false;
    if (unicode::is_cjk(cp)) ++tokens;
  }
  return tokens;
}

std::size_t count_tokens(std::string_view text, const TokenizerSpec& tokenizer) {
  if (tokenizer.rule == TokenizerRule::kCjkLatinDefault) {
    if (tokenizer.id != kDefaultTokenizerId) {
      throw Error(ErrorCode::kUnknownTokenizer,
                  fmt::format("built-in rule is registered as '{}', not '{}'", kDefaultTokenizerId, tokenizer.id));
    }
    return count_tokens_default(text);
  }
  return find_tokenizer(tokenizer.id)(text);
}

void register_tokenizer(const std::string& id, TokenCountFn fn) {
  if (id.empty()) throw Error(ErrorCode::kInvalidInput, "tokenizer id must be non-empty");
  std::lock_guard lock(registry_mutex());
  registry()[id] = std::move(fn);
}

bool has_tokenizer(std::string_view id) {
  if (id == kDefaultTokenizerId) return true;
  std::lock_guard lock(registry_mutex());
  return registry().find(id) != registry().end();
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::kEmptyInput, "quantile of an empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::kInvalidInput, fmt::format("quantile q={} outside [0,1]", q));
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, q);
}

nlohmann::json to_json(const CorpusStats& s) {
  return {{"label", s.label},         {"pair_count", s.pair_count}, {"total_tokens", s.total_tokens},
          {"max_tokens", s.max_tokens}, {"median", s.median},         {"q1", s.q1},
          {"q3", s.q3}};
}

CorpusStats summarize_counts(std::string label, std::span<const std::size_t> counts) {
  if (counts.empty()) throw Error(ErrorCode::kEmptyInput, fmt::format("no values for field '{}'", label));
  CorpusStats s;
  s.label = std::move(label);
  s.pair_count = counts.size();
  std::vector<double> sorted;
  sorted.reserve(counts.size());
  for (auto c : counts) {
    s.total_tokens += c;
    s.max_tokens = std::max<std::uint64_t>(s.max_tokens, c);
    sorted.push_back(static_cast<double>(c));
  }
  std::sort(sorted.begin(), sorted.end());
  s.median = quantile_sorted(sorted, 0.5);
  s.q1 = quantile_sorted(sorted, 0.25);
  s.q3 = quantile_sorted(sorted, 0.75);
  return s;
}

CorpusStats summarize_texts(std::string label, std::span<const std::string> texts,
                            const TokenizerSpec& tokenizer) {
  std::vector<std::size_t> counts;
  if (tokenizer.rule == TokenizerRule::kCjkLatinDefault) {
    count_tokens(std::string_view{}, tokenizer);  // validates the id
    counts = kernels::count_batch_parallel(texts, &count_tokens_default);
  } else {
    const auto fn = find_tokenizer(tokenizer.id);
    counts.reserve(texts.size());
    for (const auto& t : texts) counts.push_back(fn(t));
  }
  return summarize_counts(std::move(label), counts);
}

std::string format_count(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  const std::size_t lead = digits.size() % 3 == 0 ? 3 : digits.size() % 3;
  out.append(digits, 0, lead);
  for (std::size_t i = lead; i < digits.size(); i += 3) {
    out.push_back(',');
    out.append(digits, i, 3);
  }
  return out;
}

std::string format_token_total(std::uint64_t v) {
  if (v >= 1'000'000) return fmt::format("{}M", v / 1'000'000);
  return format_count(v);
}

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
    return fmt::format("{}", static_cast<std::int64_t>(v));
  }
  return fmt::format("{}", v);
}

std::string format_quartiles(const CorpusStats& s) {
  return fmt::format("{} ({}, {})", format_number(s.median), format_number(s.q1), format_number(s.q3));
}

namespace {

std::vector<std::vector<std::string>> table_rows(const StatsTable& t) {
  std::vector<std::vector<std::string>> rows;
  auto header = std::vector<std::string>{""};
  for (const auto& c : t.columns) header.push_back(c.name);
  rows.push_back(std::move(header));

  std::vector<std::string> pairs{t.pair_row_label};
  for (const auto& c : t.columns) pairs.push_back(format_count(c.pairs));
  rows.push_back(std::move(pairs));

  auto field_row = [&](std::string label, auto&& cell) {
    for (std::size_t f = 0; f < t.fields.size(); ++f) {
      std::vector<std::string> row{fmt::format(fmt::runtime(label), t.fields[f])};
      for (const auto& c : t.columns) {
        const auto& s = f < c.fields.size() ? c.fields[f] : std::nullopt;
        row.push_back(s ? cell(*s) : "-");
      }
      rows.push_back(std::move(row));
    }
  };
  field_row("{} Tokens #", [](const CorpusStats& s) { return format_token_total(s.total_tokens); });
  field_row("Max {} tokens", [](const CorpusStats& s) { return format_count(s.max_tokens); });
  field_row("Median (Q1, Q3) {} tokens", [](const CorpusStats& s) { return format_quartiles(s); });
  return rows;
}

}  // namespace

std::string render_stats_table(const StatsTable& table) {
  const auto rows = table_rows(table);
  std::vector<std::size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line = fmt::format("{:<{}}", row[0], widths[0]);
    for (std::size_t i = 1; i < row.size(); ++i) line += fmt::format("  {:>{}}", row[i], widths[i]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  }
  return out;
}

nlohmann::json stats_table_to_json(const StatsTable& table) {
  auto columns = nlohmann::json::array();
  for (const auto& c : table.columns) {
    nlohmann::json fields = nlohmann::json::object();
    for (std::size_t f = 0; f < table.fields.size(); ++f) {
      const auto& s = f < c.fields.size() ? c.fields[f] : std::nullopt;
      fields[table.fields[f]] = s ? to_json(*s) : nlohmann::json(nullptr);
    }
    columns.push_back({{"name", c.name}, {"pairs", c.pairs}, {"fields", std::move(fields)}});
  }
  return {{"pair_row_label", table.pair_row_label}, {"fields", table.fields}, {"columns", std::move(columns)}};
}

}  // namespace medcorpus
