#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "afie/document.hpp"
#include "afie/embedding.hpp"
#include "afie/llm.hpp"
#include "afie/money.hpp"
#include "afie/prompting.hpp"
#include "afie/segmentation.hpp"
#include "afie/serialization.hpp"
#include "afie/token_counter.hpp"

namespace afie {

enum class SummarizationStrategy {
    Refine,
    MapReduce,
    // Baseline without segmentation or retrieval: the serialized document is
    // truncated to what fits next to the extraction prompt and a single
    // extraction call is made.
    Naive,
};

const char* strategy_name(SummarizationStrategy strategy);
SummarizationStrategy parse_strategy(std::string_view name);

// Per-model token limits. All values are counts under the run's TokenCounter.
struct TokenBudget {
    std::size_t window = 4096;
    std::size_t element_limit = 2000;
    std::size_t segment_limit = 2500;
    std::size_t keyword_limit = 50;
    std::size_t summary_limit = 500;

    bool operator==(const TokenBudget&) const = default;
};

struct PipelineConfig {
    TokenBudget budget;
    SerializationFormat table_format = SerializationFormat::Plain;
    SummarizationStrategy strategy = SummarizationStrategy::Refine;
    // When false every segment flows into summarization (the larger-window
    // configuration), otherwise only the top k by keyword similarity.
    bool use_retrieval = true;
    std::size_t retrieval_k = 3;
    std::size_t slice_limit = 384;
    TemplateName extract_template = TemplateName::ExtractSingle;
    int jobs = 1;
};

struct PipelineContext {
    const LlmClient* llm = nullptr;
    const EmbeddingProvider* embedder = nullptr;
    const TokenCounter* counter = nullptr;
    const TemplateRegistry* templates = nullptr;
};

struct ExtractionResult {
    Keyword keyword;
    std::string keyword_text;
    // Absent exactly when the normalized model answer is the literal "None"
    // or the answer failed to parse (raw output is always retained).
    std::optional<MoneyValue> value;
    std::string raw_model_output;
    std::string summary;
    std::vector<int> retrieved_segment_indices;

    bool operator==(const ExtractionResult&) const = default;
};

nlohmann::json extraction_result_to_json(const ExtractionResult& result);

// Folds the segments into one evolving summary: the first segment through
// the Question template, every later one through Refine with {old_summary}
// bound to the running summary. Result is truncated to summary_limit.
std::string summarize_refine(std::span<const Segment> segments,
                             const std::string& keyword_text,
                             const LlmClient& client,
                             const TokenBudget& budget,
                             const TemplateRegistry& templates,
                             const TokenCounter& counter);

// Summarizes every segment independently with the Map template, then joins
// the per-segment summaries and reduces them to one with the Reduce
// template. Oversized joins are reduced in fitting groups until a single
// summary remains. Map calls may run on up to `jobs` threads.
std::string summarize_map_reduce(std::span<const Segment> segments,
                                 const std::string& keyword_text,
                                 const LlmClient& client,
                                 const TokenBudget& budget,
                                 const TemplateRegistry& templates,
                                 const TokenCounter& counter,
                                 int jobs = 1);

// Runs one extraction prompt over the summary and parses the answer line.
// "None" and unparseable answers yield an absent value; keyword and
// retrieval provenance are left for the caller to fill in.
ExtractionResult extract_value(const std::string& summary,
                               const std::string& keyword_text,
                               const LlmClient& client,
                               const TokenBudget& budget,
                               const TemplateRegistry& templates,
                               const TokenCounter& counter,
                               TemplateName variant = TemplateName::ExtractSingle);

// Full run for one (document, keyword) pair: segment, retrieve, summarize,
// extract. Stage failures surface as PipelineError tagged with the stage.
ExtractionResult run_extraction(const Document& doc,
                                const Keyword& keyword,
                                const PipelineConfig& config,
                                const PipelineContext& ctx);

}  // namespace afie
