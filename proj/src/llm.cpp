#include "afie/llm.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

#include "afie/errors.hpp"
#include "afie/money.hpp"
#include "internal/http_post.hpp"

namespace afie {

namespace {

bool ends_with(std::string_view text, std::string_view tail) {
    return text.size() >= tail.size() &&
           text.compare(text.size() - tail.size(), tail.size(), tail) == 0;
}

}  // namespace

PromptKind classify_prompt(std::string_view prompt) {
    if (ends_with(prompt, "New summary:")) return PromptKind::Refine;
    if (ends_with(prompt, "Summary:") || ends_with(prompt, "Summary: ")) {
        return PromptKind::Summarize;
    }
    if (ends_with(prompt, "Result:")) {
        std::size_t key_words = prompt.rfind("\nKey words: ");
        std::size_t keywords = prompt.rfind("\nKeywords: ");
        if (key_words == std::string_view::npos && keywords == std::string_view::npos) {
            return PromptKind::Unknown;
        }
        if (key_words != std::string_view::npos &&
            (keywords == std::string_view::npos || key_words > keywords)) {
            return PromptKind::Extract;
        }
        // The batch extraction prompt labels its question "Keywords:" just
        // like reduce does; its JSON instruction tells them apart.
        if (prompt.find("Output results in JSON format.") != std::string_view::npos) {
            return PromptKind::Extract;
        }
        return PromptKind::Reduce;
    }
    return PromptKind::Unknown;
}

int requested_precision(std::string_view prompt) {
    if (prompt.find("round to three decimal places") != std::string_view::npos) return 3;
    return 2;
}

namespace {

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

// Distinct lowercased alphanumeric runs, minus connective words that would
// match every line.
std::set<std::string> keyword_tokens(std::string_view keyword) {
    static const std::set<std::string> kStop = {"of", "the", "at", "in", "for", "and", "a", "an"};
    std::set<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty() && kStop.find(current) == kStop.end()) tokens.insert(current);
        current.clear();
    };
    for (char c : keyword) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string_view line =
            text.substr(start, (nl == std::string_view::npos ? text.size() : nl) - start);
        if (!line.empty()) lines.emplace_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

std::size_t matching_token_count(const std::string& line_lower,
                                 const std::set<std::string>& tokens) {
    std::size_t hits = 0;
    for (const auto& token : tokens) {
        if (line_lower.find(token) != std::string::npos) ++hits;
    }
    return hits;
}

// The question blocks repeat their section labels, so take the last
// occurrence of `label` and read until the next "-----" divider (or a
// terminating label).
std::string last_block(std::string_view prompt, std::string_view label,
                       std::string_view stop = "\n-----") {
    std::size_t at = prompt.rfind(label);
    if (at == std::string_view::npos) return {};
    std::size_t begin = at + label.size();
    std::size_t end = prompt.find(stop, begin);
    if (end == std::string_view::npos) end = prompt.size();
    return std::string(prompt.substr(begin, end - begin));
}

const char* kNoInformation = "No relevant information.";

std::string summarize_lines(std::string_view content, const std::set<std::string>& tokens,
                            std::vector<std::string> seed) {
    std::vector<std::string> kept = std::move(seed);
    for (const auto& line : split_lines(content)) {
        if (line == kNoInformation) continue;
        if (matching_token_count(to_lower(line), tokens) == 0) continue;
        if (std::find(kept.begin(), kept.end(), line) != kept.end()) continue;
        kept.push_back(line);
    }
    if (kept.empty()) return kNoInformation;
    std::string out;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += kept[i];
    }
    return out;
}

std::vector<std::string> relevant_lines(std::string_view content,
                                        const std::set<std::string>& tokens) {
    std::vector<std::string> kept;
    for (const auto& line : split_lines(content)) {
        if (line == kNoInformation) continue;
        if (matching_token_count(to_lower(line), tokens) > 0) kept.push_back(line);
    }
    return kept;
}

}  // namespace

MockLlm::MockLlm(std::size_t window, const TokenCounter& counter, Tracer* tracer)
    : window_(window), counter_(counter), tracer_(tracer) {}

std::vector<PromptKind> MockLlm::calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return calls_;
}

void MockLlm::reset_calls() {
    std::lock_guard<std::mutex> lock(mutex_);
    calls_.clear();
}

std::string MockLlm::complete(const std::string& prompt, std::size_t max_output_tokens) const {
    std::size_t prompt_tokens = counter_.count(prompt);
    if (prompt_tokens + max_output_tokens > window_) {
        throw BudgetError("prompt of " + std::to_string(prompt_tokens) + " tokens plus " +
                          std::to_string(max_output_tokens) + " output tokens exceeds window " +
                          std::to_string(window_));
    }
    PromptKind kind = classify_prompt(prompt);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        calls_.push_back(kind);
    }

    std::string output;
    switch (kind) {
        case PromptKind::Summarize: {
            std::string segment = last_block(prompt, "\nFinancial report's segment: ");
            auto tokens = keyword_tokens(last_block(prompt, "\nKeywords: "));
            output = summarize_lines(segment, tokens, {});
            break;
        }
        case PromptKind::Refine: {
            std::string segment = last_block(prompt, "\nFinancial report's segment: ");
            std::string old_summary = last_block(prompt, "\nOld summary: ");
            auto tokens = keyword_tokens(last_block(prompt, "\nKeywords: "));
            output = summarize_lines(segment, tokens, relevant_lines(old_summary, tokens));
            break;
        }
        case PromptKind::Reduce: {
            std::string content = last_block(prompt, "\nContent: ");
            auto tokens = keyword_tokens(last_block(prompt, "\nKeywords: ", "\n-----"));
            output = summarize_lines(content, tokens, {});
            break;
        }
        case PromptKind::Extract: {
            // The single-extraction question block has no dividers: the
            // content runs from "Content: " to "Key words: ", the keyword
            // to the trailing "Result:".
            std::string keyword = last_block(prompt, "\nKey words: ", "\nResult:");
            std::string content = last_block(prompt, "\nContent: ", "\nKey words: ");
            auto tokens = keyword_tokens(keyword);
            std::size_t best_hits = 0;
            std::string best_line;
            for (const auto& line : split_lines(content)) {
                std::size_t hits = matching_token_count(to_lower(line), tokens);
                if (hits > best_hits) {
                    best_hits = hits;
                    best_line = line;
                }
            }
            output = "None";
            if (best_hits > 0) {
                if (auto match = find_money(best_line)) {
                    output = render_money(match->amount_millions, requested_precision(prompt));
                }
            }
            break;
        }
        case PromptKind::Unknown:
            break;
    }
    output = truncate_to_tokens(output, max_output_tokens, counter_);
    if (tracer_) tracer_->record("llm", prompt, output);
    return output;
}

HttpLlmClient::HttpLlmClient(Options options, const TokenCounter& counter, Tracer* tracer)
    : options_(std::move(options)), counter_(counter), tracer_(tracer) {}

std::string HttpLlmClient::complete(const std::string& prompt,
                                    std::size_t max_output_tokens) const {
    std::size_t prompt_tokens = counter_.count(prompt);
    if (prompt_tokens + max_output_tokens > options_.window) {
        throw BudgetError("prompt of " + std::to_string(prompt_tokens) + " tokens plus " +
                          std::to_string(max_output_tokens) + " output tokens exceeds window " +
                          std::to_string(options_.window));
    }
    nlohmann::json body = {
        {"prompt", prompt},
        {"max_tokens", max_output_tokens},
        {"temperature", 0},
    };
    if (!options_.model.empty()) body["model"] = options_.model;

    internal::HttpPostOptions post;
    post.base_url = options_.base_url;
    post.path = options_.path;
    post.timeout_seconds = options_.timeout_seconds;
    post.max_attempts = options_.max_attempts;
    post.backoff_initial_ms = options_.backoff_initial_ms;
    if (!options_.api_key.empty()) {
        post.headers.emplace("Authorization", "Bearer " + options_.api_key);
    }

    std::string response = internal::post_json_with_retry(
        post, body.dump(), [](const std::string& reason) {
            throw PipelineError("llm", reason);
        });

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(response);
    } catch (const nlohmann::json::parse_error& e) {
        throw PipelineError("llm", std::string("completion service returned invalid JSON: ") +
                                       e.what());
    }
    if (!parsed.is_object() || !parsed.contains("text") || !parsed["text"].is_string()) {
        throw PipelineError("llm", "completion response missing \"text\" field");
    }
    std::string text = parsed["text"].get<std::string>();
    if (tracer_) tracer_->record("llm", prompt, text);
    return text;
}

}  // namespace afie
