#include "afie/pipeline.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "afie/errors.hpp"
#include "afie/retrieval.hpp"

namespace afie {

namespace {

// Output tokens reserved for an extraction answer (a money literal).
constexpr std::size_t kAnswerTokens = 64;

std::size_t clamp_output(std::size_t window, std::size_t prompt_tokens, std::size_t want) {
    if (prompt_tokens >= window) {
        throw BudgetError("prompt of " + std::to_string(prompt_tokens) +
                          " tokens fills the whole window of " + std::to_string(window));
    }
    return std::min(want, window - prompt_tokens);
}

void check_keyword_budget(const std::string& keyword_text, const TokenBudget& budget,
                          const TokenCounter& counter) {
    std::size_t tokens = counter.count(keyword_text);
    if (tokens > budget.keyword_limit) {
        throw BudgetError("keyword of " + std::to_string(tokens) +
                          " tokens exceeds the keyword limit of " +
                          std::to_string(budget.keyword_limit));
    }
}

std::string complete_clamped(const LlmClient& client, const std::string& prompt,
                             std::size_t want_tokens, const TokenCounter& counter) {
    std::size_t max_output = clamp_output(client.window(), counter.count(prompt), want_tokens);
    return client.complete(prompt, max_output);
}

}  // namespace

const char* strategy_name(SummarizationStrategy strategy) {
    switch (strategy) {
        case SummarizationStrategy::Refine: return "refine";
        case SummarizationStrategy::MapReduce: return "map_reduce";
        case SummarizationStrategy::Naive: return "naive";
    }
    return "refine";
}

SummarizationStrategy parse_strategy(std::string_view name) {
    if (name == "refine") return SummarizationStrategy::Refine;
    if (name == "map_reduce") return SummarizationStrategy::MapReduce;
    if (name == "naive") return SummarizationStrategy::Naive;
    throw ConfigError("unknown summarization strategy \"" + std::string(name) + "\"");
}

std::string summarize_refine(std::span<const Segment> segments,
                             const std::string& keyword_text,
                             const LlmClient& client,
                             const TokenBudget& budget,
                             const TemplateRegistry& templates,
                             const TokenCounter& counter) {
    if (segments.empty()) {
        throw PipelineError("summarize", "refine called with no segments");
    }
    check_keyword_budget(keyword_text, budget, counter);

    std::string prompt = render_template(templates.get(TemplateName::Question),
                                         {{"document_segment", segments[0].text},
                                          {"keywords", keyword_text}});
    std::string summary = truncate_to_tokens(
        complete_clamped(client, prompt, budget.summary_limit, counter),
        budget.summary_limit, counter);

    for (std::size_t i = 1; i < segments.size(); ++i) {
        prompt = render_template(templates.get(TemplateName::Refine),
                                 {{"document_segment", segments[i].text},
                                  {"old_summary", summary},
                                  {"keywords", keyword_text}});
        summary = truncate_to_tokens(
            complete_clamped(client, prompt, budget.summary_limit, counter),
            budget.summary_limit, counter);
    }
    return summary;
}

std::string summarize_map_reduce(std::span<const Segment> segments,
                                 const std::string& keyword_text,
                                 const LlmClient& client,
                                 const TokenBudget& budget,
                                 const TemplateRegistry& templates,
                                 const TokenCounter& counter,
                                 int jobs) {
    if (segments.empty()) {
        throw PipelineError("summarize", "map-reduce called with no segments");
    }
    check_keyword_budget(keyword_text, budget, counter);
    const PromptTemplate& map_template = templates.get(TemplateName::Map);
    const PromptTemplate& reduce_template = templates.get(TemplateName::Reduce);

    std::vector<std::string> summaries(segments.size());
    std::exception_ptr failure;
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (jobs != 1)
#endif
    for (long long i = 0; i < static_cast<long long>(segments.size()); ++i) {
        try {
            std::string prompt =
                render_template(map_template,
                                {{"document_segment", segments[static_cast<std::size_t>(i)].text},
                                 {"keywords", keyword_text}});
            summaries[static_cast<std::size_t>(i)] = truncate_to_tokens(
                complete_clamped(client, prompt, budget.summary_limit, counter),
                budget.summary_limit, counter);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(afie_map_reduce_failure)
#endif
            {
                if (!failure) failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);

    // Reduce rounds: join as many summaries as fit next to the prompt and
    // the reserved answer, reduce each group, repeat until one remains.
    // Runs at least once so even a single map output passes through Reduce.
    do {
        auto render_group = [&](std::size_t begin, std::size_t end) {
            std::string joined;
            for (std::size_t i = begin; i < end; ++i) {
                if (i > begin) joined.push_back('\n');
                joined += summaries[i];
            }
            return render_template(reduce_template,
                                   {{"text", joined}, {"keywords", keyword_text}});
        };
        auto fits = [&](std::size_t begin, std::size_t end) {
            return counter.count(render_group(begin, end)) + budget.summary_limit <=
                   client.window();
        };
        auto groups = detail::greedy_pack(summaries.size(), fits);
        if (groups.size() >= summaries.size() && summaries.size() > 1) {
            throw PipelineError("summarize",
                                "reduce cannot shrink " + std::to_string(summaries.size()) +
                                    " summaries under the configured window");
        }
        std::vector<std::string> next;
        next.reserve(groups.size());
        for (auto [begin, end] : groups) {
            std::string prompt = render_group(begin, end);
            next.push_back(truncate_to_tokens(
                complete_clamped(client, prompt, budget.summary_limit, counter),
                budget.summary_limit, counter));
        }
        summaries = std::move(next);
    } while (summaries.size() > 1);
    return summaries.front();
}

ExtractionResult extract_value(const std::string& summary,
                               const std::string& keyword_text,
                               const LlmClient& client,
                               const TokenBudget& budget,
                               const TemplateRegistry& templates,
                               const TokenCounter& counter,
                               TemplateName variant) {
    check_keyword_budget(keyword_text, budget, counter);
    // The precision variants are summarization-shaped, so a summary binds
    // to {document_segment} exactly as it binds to {text} for the plain
    // extraction prompt; keywords likewise under both spellings.
    std::string prompt = render_template(templates.get(variant),
                                         {{"text", summary},
                                          {"document_segment", summary},
                                          {"key_words", keyword_text},
                                          {"keywords", keyword_text}});
    std::string raw = complete_clamped(client, prompt, kAnswerTokens, counter);

    ExtractionResult result;
    result.keyword_text = keyword_text;
    result.raw_model_output = raw;
    result.summary = summary;

    // First nonempty answer line, with trailing sentence punctuation and
    // whitespace stripped.
    std::string_view view = raw;
    while (!view.empty() && (view.front() == '\n' || view.front() == '\r' ||
                             view.front() == ' ' || view.front() == '\t')) {
        view.remove_prefix(1);
    }
    std::size_t nl = view.find('\n');
    if (nl != std::string_view::npos) view = view.substr(0, nl);
    while (!view.empty() && (view.back() == ' ' || view.back() == '\t' ||
                             view.back() == '\r' || view.back() == '.')) {
        view.remove_suffix(1);
    }

    if (view == "None" || view.empty()) {
        return result;  // absent value, raw output retained
    }
    if (auto match = find_money(view)) {
        result.value = MoneyValue{match->amount_millions, requested_precision(prompt)};
    }
    return result;
}

nlohmann::json extraction_result_to_json(const ExtractionResult& result) {
    nlohmann::json keyword = {
        {"attribute", result.keyword.attribute},
        {"completion_level", std::string(completion_level_name(result.keyword.completion_level))},
    };
    keyword["company"] =
        result.keyword.company ? nlohmann::json(*result.keyword.company) : nlohmann::json();
    keyword["time"] = result.keyword.time ? nlohmann::json(*result.keyword.time) : nlohmann::json();
    return nlohmann::json{
        {"keyword", std::move(keyword)},
        {"keyword_text", result.keyword_text},
        {"value", result.value ? nlohmann::json(result.value->render()) : nlohmann::json()},
        {"raw_model_output", result.raw_model_output},
        {"summary", result.summary},
        {"retrieved_segment_indices", result.retrieved_segment_indices},
    };
}

ExtractionResult run_extraction(const Document& doc,
                                const Keyword& keyword,
                                const PipelineConfig& config,
                                const PipelineContext& ctx) {
    if (ctx.llm == nullptr || ctx.counter == nullptr || ctx.templates == nullptr) {
        throw ConfigError("pipeline context requires llm, counter and templates");
    }
    if (config.use_retrieval && config.strategy != SummarizationStrategy::Naive &&
        ctx.embedder == nullptr) {
        throw ConfigError("pipeline context requires an embedder when retrieval is enabled");
    }
    const std::string keyword_text = complete_keyword(keyword);
    check_keyword_budget(keyword_text, config.budget, *ctx.counter);

    auto stage = [](const char* name, auto&& fn) -> decltype(fn()) {
        try {
            return fn();
        } catch (const PipelineError&) {
            throw;
        } catch (const BudgetError&) {
            throw;
        } catch (const std::exception& e) {
            throw PipelineError(name, e.what());
        }
    };

    if (config.strategy == SummarizationStrategy::Naive) {
        // Baseline: no segmentation, retrieval or summarization. The whole
        // serialized document is truncated to what fits next to the
        // extraction prompt and answered in one call.
        std::string serialized = stage("serialize", [&] {
            std::string joined;
            for (const Element& element : doc.elements) {
                if (!joined.empty()) joined.push_back('\n');
                joined += serialize_element(element, config.table_format);
            }
            return joined;
        });
        ExtractionResult result = stage("extract", [&] {
            std::string empty_prompt =
                render_template(ctx.templates->get(config.extract_template),
                                {{"text", ""},
                                 {"document_segment", ""},
                                 {"key_words", keyword_text},
                                 {"keywords", keyword_text}});
            std::size_t overhead = ctx.counter->count(empty_prompt) + kAnswerTokens;
            if (overhead >= config.budget.window) {
                throw BudgetError("extraction prompt alone exceeds the window");
            }
            std::string text = truncate_to_tokens(serialized,
                                                  config.budget.window - overhead, *ctx.counter);
            return extract_value(text, keyword_text, *ctx.llm, config.budget, *ctx.templates,
                                 *ctx.counter, config.extract_template);
        });
        result.keyword = keyword;
        return result;
    }

    std::vector<Segment> segments = stage("segmentation", [&] {
        SegmentationConfig seg_config;
        seg_config.element_limit = config.budget.element_limit;
        seg_config.segment_limit = config.budget.segment_limit;
        seg_config.format = config.table_format;
        seg_config.counter = ctx.counter;
        return segment_document(doc, seg_config);
    });

    std::vector<Segment> selected = stage("retrieval", [&] {
        if (!config.use_retrieval || segments.size() <= config.retrieval_k) {
            return segments;  // few segments or retrieval disabled: keep all
        }
        return retrieve_top_k(segments, keyword_text, config.retrieval_k, *ctx.embedder,
                              *ctx.counter, config.jobs);
    });

    std::string summary = stage("summarize", [&] {
        if (config.strategy == SummarizationStrategy::MapReduce) {
            return summarize_map_reduce(selected, keyword_text, *ctx.llm, config.budget,
                                        *ctx.templates, *ctx.counter, config.jobs);
        }
        return summarize_refine(selected, keyword_text, *ctx.llm, config.budget,
                                *ctx.templates, *ctx.counter);
    });

    ExtractionResult result = stage("extract", [&] {
        return extract_value(summary, keyword_text, *ctx.llm, config.budget, *ctx.templates,
                             *ctx.counter, config.extract_template);
    });
    result.keyword = keyword;
    for (const Segment& segment : selected) {
        result.retrieved_segment_indices.push_back(segment.segment_index);
    }
    return result;
}

}  // namespace afie
