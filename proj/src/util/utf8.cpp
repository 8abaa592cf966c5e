#include "guidelm/util/utf8.hpp"

#include <cstdint>

namespace guidelm::utf8 {

bool is_valid(std::string_view text) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const auto c = static_cast<std::uint8_t>(text[i]);
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len = 0;
        std::uint32_t cp = 0;
        std::uint32_t min = 0;
        if ((c & 0xE0) == 0xC0) {
            len = 2, cp = c & 0x1F, min = 0x80;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3, cp = c & 0x0F, min = 0x800;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4, cp = c & 0x07, min = 0x10000;
        } else {
            return false;
        }
        if (i + len > n) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto cc = static_cast<std::uint8_t>(text[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

std::size_t scalar_count(std::string_view text) {
    std::size_t count = 0;
    for (char ch : text) {
        // count every byte that is not a continuation byte
        if ((static_cast<std::uint8_t>(ch) & 0xC0) != 0x80) ++count;
    }
    return count;
}

bool contains_nul(std::string_view text) {
    return text.find('\0') != std::string_view::npos;
}

}  // namespace guidelm::utf8
