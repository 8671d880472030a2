#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace augbench {

// Category L* membership and simple one-to-one lowercase mapping, backed by
// generated tables in unicode_tables.cpp.
bool is_letter(char32_t cp);
char32_t to_lower(char32_t cp);

// Whitespace set used by normalization: ASCII whitespace plus the Unicode
// space separators.
bool is_space_cp(char32_t cp);

// Decodes one UTF-8 sequence starting at s[i]; advances i. Invalid bytes
// decode as U+FFFD and advance by one.
char32_t decode_utf8(std::string_view s, std::size_t& i);
void append_utf8(std::string& out, char32_t cp);

}  // namespace augbench
