#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace advtext::utf8 {

/// One decoded code point and the byte offset where it starts.
struct CodePoint {
  char32_t value;
  std::size_t offset;
  std::size_t length;
};

/// Decodes `text`; invalid bytes decode as U+FFFD, one byte each.
std::vector<CodePoint> decode(std::string_view text);
std::string encode(char32_t cp);
std::string encode(const std::u32string& cps);
std::size_t length(std::string_view text);

char32_t to_lower_ascii(char32_t cp);
std::string to_lower_ascii(std::string_view text);

bool is_space(char c);

}  // namespace advtext::utf8
