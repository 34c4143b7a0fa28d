#include "repoforge/token_count.hpp"

#include <cctype>

namespace repoforge {

namespace {
bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           static_cast<unsigned char>(c) >= 0x80;
}
}  // namespace

std::uint64_t approx_token_count(const std::string& text) {
    std::uint64_t count = 0;
    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        ++count;
        if (is_word_char(c)) {
            while (i < n && is_word_char(text[i])) ++i;
        } else {
            while (i < n && !is_word_char(text[i]) &&
                   !std::isspace(static_cast<unsigned char>(text[i]))) {
                ++i;
            }
        }
    }
    return count;
}

}  // namespace repoforge
