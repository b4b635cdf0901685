// text.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// String helpers shared by every module.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wozsynth {

std::string to_lower(std::string_view s);

// Trims both ends and collapses internal whitespace runs to one space.
std::string collapse_whitespace(std::string_view s);

// Lowercase + collapse_whitespace. The comparison form used for KB matching
// and metric computation.
std::string normalize_value(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

// Number of whitespace-delimited tokens. This is the "symbol" unit used for
// every length cap and for corpus token statistics.
std::size_t count_tokens(std::string_view s);

// Keeps the trailing `max_tokens` whitespace tokens of s.
std::string keep_last_tokens(std::string_view s, std::size_t max_tokens);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool is_word_char(char c);

// Capitalizes the first character ("hotel" -> "Hotel").
std::string capitalize(std::string_view s);

// Suffix of a "domain-slot" name after the first '-'.
std::string slot_suffix(std::string_view slot_name);
// Prefix of a "domain-slot" name before the first '-'.
std::string slot_domain(std::string_view slot_name);

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace wozsynth
