// Copyright 2026 The medcorpus Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace medcorpus::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at text[pos] and advances pos. Malformed
// sequences yield kReplacement and consume one byte.
char32_t next_codepoint(std::string_view text, std::size_t& pos) noexcept;

void append_utf8(std::string& out, char32_t cp);

std::size_t codepoint_count(std::string_view text) noexcept;

// CJK ideographs (unified, extensions, compatibility), kana and hangul
// syllables.
bool is_cjk(char32_t cp) noexcept;

// ASCII, Latin-1 supplement, Latin Extended-A/B and fullwidth Latin letters.
bool is_latin_letter(char32_t cp) noexcept;

// ASCII and fullwidth digits.
bool is_digit(char32_t cp) noexcept;

}  // namespace medcorpus::unicode
