#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace udt::unicode {

inline constexpr uint32_t kReplacementChar = 0xFFFD;

/// Decodes one UTF-8 code point at `pos`; advances `pos` past it.
/// Invalid sequences decode to U+FFFD and advance by one byte.
uint32_t decode(std::string_view s, size_t& pos);

/// Appends `cp` to `out` as UTF-8.
void append(std::string& out, uint32_t cp);

bool is_valid_utf8(std::string_view s);

/// Number of code points (invalid bytes count as one each).
size_t count_codepoints(std::string_view s);

/// Unicode whitespace (ASCII ws, NBSP, ogham, en/em spaces, line/para sep,
/// narrow NBSP, math space, ideographic space).
bool is_space(uint32_t cp);

/// C0/C1 control codes (excluding nothing; callers exempt \n, \t themselves).
bool is_control(uint32_t cp);

/// Zero-width code points: ZWSP, ZWNJ, ZWJ, word joiner, BOM/ZWNBSP.
bool is_zero_width(uint32_t cp);

/// ASCII-only lowercasing; non-ASCII bytes pass through untouched.
std::string ascii_lower(std::string_view s);

/// Trims Unicode whitespace from both ends.
std::string_view trim(std::string_view s);

/// Splits on runs of Unicode whitespace; no empty tokens.
std::vector<std::string_view> split_ws(std::string_view s);

}  // namespace udt::unicode
