#pragma once

#include <cstddef>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "afie/token_counter.hpp"
#include "afie/trace.hpp"

namespace afie {

// Text-completion backend. complete() must reject prompts where
// prompt_tokens + max_output_tokens exceed the window (BudgetError) and
// must be safe to call from multiple threads.
class LlmClient {
public:
    virtual ~LlmClient() = default;

    virtual std::string complete(const std::string& prompt,
                                 std::size_t max_output_tokens) const = 0;
    virtual std::size_t window() const = 0;
};

// Rough shape of a rendered prompt, inferred from its tail markers. Used
// by the mock backend and by call-sequence assertions in tests.
enum class PromptKind {
    Summarize,  // Question / Map / precision-variant prompts ("Summary:")
    Refine,     // "New summary:"
    Reduce,     // "Result:" with a "Keywords:" question block
    Extract,    // "Result:" with "Key words:", or the JSON batch form
    Unknown,
};

PromptKind classify_prompt(std::string_view prompt);

// Decimal places a prompt's rounding instruction asks for (2 unless the
// prompt asks for three).
int requested_precision(std::string_view prompt);

// Deterministic offline stand-in for the real model, built so end-to-end
// runs have a known correct answer:
//  - summarize/refine/reduce prompts: copies the lines of the bound
//    segment (or map summaries) that contain any keyword token, merged
//    with the old summary for Refine;
//  - extraction prompts: picks the summary line matching the most keyword
//    tokens, pulls the first money expression out of it and renders it at
//    the precision the prompt asks for, else answers "None".
class MockLlm final : public LlmClient {
public:
    MockLlm(std::size_t window, const TokenCounter& counter, Tracer* tracer = nullptr);

    std::string complete(const std::string& prompt,
                         std::size_t max_output_tokens) const override;
    std::size_t window() const override { return window_; }

    std::vector<PromptKind> calls() const;
    void reset_calls();

private:
    std::size_t window_;
    const TokenCounter& counter_;
    Tracer* tracer_;
    mutable std::mutex mutex_;
    mutable std::vector<PromptKind> calls_;
};

// Remote completion endpoint:
//   POST {"prompt": str, "max_tokens": int, "temperature": 0,
//         "model": str} -> {"text": str}
// Transient failures (5xx, transport) retry with exponential backoff up to
// max_attempts; 4xx responses fail immediately.
class HttpLlmClient final : public LlmClient {
public:
    struct Options {
        std::string base_url;
        std::string path = "/v1/completions";
        std::string model;
        std::string api_key;  // resolved from the environment by the CLI
        std::size_t window = 4096;
        int timeout_seconds = 60;
        int max_attempts = 3;
        int backoff_initial_ms = 250;
    };

    HttpLlmClient(Options options, const TokenCounter& counter, Tracer* tracer = nullptr);

    std::string complete(const std::string& prompt,
                         std::size_t max_output_tokens) const override;
    std::size_t window() const override { return options_.window; }

private:
    Options options_;
    const TokenCounter& counter_;
    Tracer* tracer_;
};

}  // namespace afie
