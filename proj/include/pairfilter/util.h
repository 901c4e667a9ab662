#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace pairfilter {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Strips ASCII whitespace from both ends.
std::string Trim(std::string_view s);

std::vector<std::string> Split(std::string_view s, char sep);

// Hex-encoded SHA-256 of the bytes.
std::string Sha256Hex(std::string_view bytes);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Calls `fn(line_number, record)` for each non-blank line. Line numbers are
// 1-based. A line that is not valid JSON raises a kParse error naming it.
void ForEachJsonLine(const std::filesystem::path& path,
                     const std::function<void(std::size_t, const Json&)>& fn);

// Decodes one UTF-8 code point starting at `pos`; advances `pos`. Invalid
// bytes decode to U+FFFD and consume a single byte.
char32_t DecodeUtf8(std::string_view s, std::size_t& pos);
void AppendUtf8(std::string& out, char32_t cp);

// Maps fullwidth ASCII variants (U+FF01..U+FF5E) and the ideographic space
// onto their ASCII forms. Used for optional lenient string comparison on
// Chinese corpora.
std::string FoldWidth(std::string_view s);

}  // namespace pairfilter
