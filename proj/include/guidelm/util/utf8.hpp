#pragma once

#include <cstddef>
#include <string_view>

namespace guidelm::utf8 {

/// Strict UTF-8 validation: rejects overlongs, surrogates and code points past U+10FFFF.
bool is_valid(std::string_view text);

/// Number of Unicode scalar values. Input must be valid UTF-8.
std::size_t scalar_count(std::string_view text);

bool contains_nul(std::string_view text);

}  // namespace guidelm::utf8
