#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "afie/pipeline.hpp"
#include "afie/prompting.hpp"
#include "afie/serialization.hpp"

namespace afie {

// One named model profile: token budgets plus whether retrieval is applied
// before summarization (the large-window profile processes every segment).
struct ModelProfile {
    TokenBudget budget;
    bool use_retrieval = true;

    bool operator==(const ModelProfile&) const = default;
};

ModelProfile gpt35_profile();
ModelProfile gpt4_profile();

struct RunConfig {
    std::map<std::string, ModelProfile> profiles;  // seeded with both defaults
    std::string profile = "gpt35-profile";

    SerializationFormat table_format = SerializationFormat::Plain;
    SummarizationStrategy strategy = SummarizationStrategy::Refine;
    std::size_t retrieval_k = 3;
    std::size_t slice_limit = 384;
    TemplateName extract_template = TemplateName::ExtractSingle;
    CompletionLevel completion = CompletionLevel::A_T_C;

    std::string backend = "mock";  // "mock" or "http"
    std::string llm_base_url;
    std::string llm_model;
    std::string api_key_env = "AFIE_API_KEY";
    std::string embed_base_url;    // empty selects the hashing embedder
    std::size_t embed_dim = 256;

    std::vector<std::string> levels;  // RETA labels, e.g. "0%", "3%"
    std::string templates_dir;        // empty selects the installed assets
    std::string trace_path;
    int jobs = 1;

    bool operator==(const RunConfig&) const = default;
};

RunConfig default_run_config();

const ModelProfile& active_profile(const RunConfig& config);

nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& value);

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

PipelineConfig to_pipeline_config(const RunConfig& config);

}  // namespace afie
