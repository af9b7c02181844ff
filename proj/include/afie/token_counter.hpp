#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace afie {

// Pluggable token counting. Implementations must be deterministic and
// monotone under concatenation: count(a+b) >= max(count(a), count(b)).
class TokenCounter {
public:
    virtual ~TokenCounter() = default;
    virtual std::size_t count(std::string_view text) const = 0;
};

// Default model-agnostic counter: ceil(character count / 4), whitespace
// included. Real tokenizers plug in through the TokenCounter interface;
// every budget in the pipeline is enforced against the configured counter.
class HeuristicTokenCounter final : public TokenCounter {
public:
    std::size_t count(std::string_view text) const override {
        return (text.size() + 3) / 4;
    }
};

inline std::size_t count_tokens(const TokenCounter& counter, std::string_view text) {
    return counter.count(text);
}

// Longest prefix of `text` that fits `limit` tokens, cut on a whitespace
// boundary where possible (character granularity otherwise).
std::string truncate_to_tokens(std::string_view text, std::size_t limit,
                               const TokenCounter& counter);

}  // namespace afie
