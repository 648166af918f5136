#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace citescan::utf8 {

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes one scalar value at byte offset `pos`, advancing `pos`.
// Invalid sequences yield U+FFFD and advance by one byte.
char32_t decode_at(std::string_view text, std::size_t& pos);

// Number of Unicode scalar values in `text` (invalid bytes count as one each).
std::size_t scalar_length(std::string_view text);

// Re-encodes, replacing invalid sequences with U+FFFD. Identity on valid input.
std::string sanitize(std::string_view text);

std::string encode(char32_t cp);

// Byte offset of the scalar at index `scalar_index` (text.size() if past end).
std::size_t byte_offset(std::string_view text, std::size_t scalar_index);

// Substring by scalar offsets, end exclusive.
std::string slice(std::string_view text, std::size_t begin, std::size_t end);

}  // namespace citescan::utf8
