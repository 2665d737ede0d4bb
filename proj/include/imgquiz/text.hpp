#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace imgquiz::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// Trims and collapses internal whitespace runs to a single space.
std::string collapse_whitespace(std::string_view s);

// Lowercase, every non-alphanumeric byte becomes a separator, runs collapsed.
// UTF-8 continuation bytes are kept so non-ASCII words survive as tokens.
std::string fold(std::string_view s);

std::vector<std::string> tokens(std::string_view s);

// True when `phrase` occurs in `haystack` on token boundaries after folding.
bool contains_phrase(std::string_view haystack, std::string_view phrase);

std::vector<std::string> split_lines(std::string_view s);
std::string join(std::span<const std::string> parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);
bool iequals(std::string_view a, std::string_view b);

// Lowercase ASCII slug: runs of non-alphanumerics become a single '-'.
std::string slugify(std::string_view s);

// Replaces U+2018/U+2019 with an ASCII apostrophe.
std::string straighten_quotes(std::string_view s);

}  // namespace imgquiz::text
