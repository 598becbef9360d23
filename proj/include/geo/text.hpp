#pragma once

// Small string helpers shared by the parsing, engine and feature code.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace geo::text {

std::string_view trim(std::string_view s);

/// Whitespace tokenization; the word-count rule used throughout.
std::vector<std::string_view> split_words(std::string_view s);
std::size_t count_words(std::string_view s);

/// Collapses whitespace runs to a single space and trims the ends.
std::string normalize_space(std::string_view s);

std::string to_lower(std::string_view s);

/// Lowercased alphanumeric core of a token ("Cats," -> "cats").
std::string term(std::string_view token);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// splitmix64 finalizer, used to derive independent seeds.
std::uint64_t mix(std::uint64_t x);

}  // namespace geo::text
