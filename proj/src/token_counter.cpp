#include "afie/token_counter.hpp"

#include <cctype>

namespace afie {

namespace {

bool is_space_byte(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

// Largest prefix length (in bytes) whose token count fits the limit.
// Counters are monotone in length, so binary search is valid.
std::size_t fitting_prefix(std::string_view text, std::size_t limit,
                           const TokenCounter& counter) {
    std::size_t lo = 0;
    std::size_t hi = text.size();
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo + 1) / 2;
        if (counter.count(text.substr(0, mid)) <= limit) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return lo;
}

}  // namespace

std::string truncate_to_tokens(std::string_view text, std::size_t limit,
                               const TokenCounter& counter) {
    if (counter.count(text) <= limit) {
        return std::string(text);
    }
    std::size_t cut = fitting_prefix(text, limit, counter);
    // Prefer the last whitespace boundary inside the fitting prefix.
    std::size_t ws = text.substr(0, cut).find_last_of(" \t\n\r");
    if (ws != std::string_view::npos && ws > 0) {
        cut = ws;
    } else {
        // Keep multi-byte sequences intact when cutting mid-word.
        while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
            --cut;
        }
    }
    std::string_view head = text.substr(0, cut);
    while (!head.empty() && is_space_byte(head.back())) {
        head.remove_suffix(1);
    }
    return std::string(head);
}

}  // namespace afie
