#include "afie/config.hpp"

#include <fstream>

#include "afie/errors.hpp"
#include "afie/evaluation.hpp"

namespace afie {

namespace {

nlohmann::json budget_to_json(const TokenBudget& budget) {
    return nlohmann::json{
        {"window", budget.window},
        {"element_limit", budget.element_limit},
        {"segment_limit", budget.segment_limit},
        {"keyword_limit", budget.keyword_limit},
        {"summary_limit", budget.summary_limit},
    };
}

std::size_t require_size(const nlohmann::json& value, const char* key) {
    auto it = value.find(key);
    if (it == value.end() || !it->is_number_unsigned()) {
        throw ConfigError(std::string("config field \"") + key +
                          "\" must be a non-negative integer");
    }
    return it->get<std::size_t>();
}

std::string require_str(const nlohmann::json& value, const char* key) {
    auto it = value.find(key);
    if (it == value.end() || !it->is_string()) {
        throw ConfigError(std::string("config field \"") + key + "\" must be a string");
    }
    return it->get<std::string>();
}

TokenBudget budget_from_json(const nlohmann::json& value) {
    TokenBudget budget;
    budget.window = require_size(value, "window");
    budget.element_limit = require_size(value, "element_limit");
    budget.segment_limit = require_size(value, "segment_limit");
    budget.keyword_limit = require_size(value, "keyword_limit");
    budget.summary_limit = require_size(value, "summary_limit");
    if (budget.window == 0 || budget.element_limit == 0 || budget.segment_limit == 0 ||
        budget.keyword_limit == 0 || budget.summary_limit == 0) {
        throw ConfigError("token budget limits must be positive");
    }
    if (budget.keyword_limit > 50) {
        throw ConfigError("keyword_limit must not exceed 50");
    }
    if (budget.element_limit > budget.segment_limit) {
        throw ConfigError("element_limit must not exceed segment_limit");
    }
    if (budget.segment_limit > budget.window) {
        throw ConfigError("segment_limit must not exceed the window");
    }
    return budget;
}

}  // namespace

ModelProfile gpt35_profile() {
    ModelProfile profile;
    profile.budget = TokenBudget{4096, 2000, 2500, 50, 500};
    profile.use_retrieval = true;
    return profile;
}

ModelProfile gpt4_profile() {
    ModelProfile profile;
    profile.budget = TokenBudget{32768, 25000, 25000, 50, 5000};
    profile.use_retrieval = false;
    return profile;
}

RunConfig default_run_config() {
    RunConfig config;
    config.profiles["gpt35-profile"] = gpt35_profile();
    config.profiles["gpt4-profile"] = gpt4_profile();
    for (const RetaLevel& level : default_levels()) {
        config.levels.push_back(level.label);
    }
    return config;
}

const ModelProfile& active_profile(const RunConfig& config) {
    auto it = config.profiles.find(config.profile);
    if (it == config.profiles.end()) {
        throw ConfigError("unknown profile \"" + config.profile + "\"");
    }
    return it->second;
}

nlohmann::json run_config_to_json(const RunConfig& config) {
    nlohmann::json profiles = nlohmann::json::object();
    for (const auto& [name, profile] : config.profiles) {
        profiles[name] = {
            {"budget", budget_to_json(profile.budget)},
            {"use_retrieval", profile.use_retrieval},
        };
    }
    return nlohmann::json{
        {"profiles", std::move(profiles)},
        {"profile", config.profile},
        {"table_format", format_name(config.table_format)},
        {"strategy", strategy_name(config.strategy)},
        {"retrieval_k", config.retrieval_k},
        {"slice_limit", config.slice_limit},
        {"extract_template", std::string(template_display_name(config.extract_template))},
        {"completion", std::string(completion_level_name(config.completion))},
        {"backend", config.backend},
        {"llm_base_url", config.llm_base_url},
        {"llm_model", config.llm_model},
        {"api_key_env", config.api_key_env},
        {"embed_base_url", config.embed_base_url},
        {"embed_dim", config.embed_dim},
        {"levels", config.levels},
        {"templates_dir", config.templates_dir},
        {"trace_path", config.trace_path},
        {"jobs", config.jobs},
    };
}

RunConfig run_config_from_json(const nlohmann::json& value) {
    if (!value.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig config;

    auto profiles_it = value.find("profiles");
    if (profiles_it == value.end() || !profiles_it->is_object()) {
        throw ConfigError("config field \"profiles\" must be an object");
    }
    for (const auto& [name, body] : profiles_it->items()) {
        if (!body.is_object() || !body.contains("budget")) {
            throw ConfigError("profile \"" + name + "\" must contain a budget");
        }
        ModelProfile profile;
        profile.budget = budget_from_json(body.at("budget"));
        auto retrieval_it = body.find("use_retrieval");
        if (retrieval_it != body.end()) {
            if (!retrieval_it->is_boolean()) {
                throw ConfigError("profile \"" + name + "\" use_retrieval must be a boolean");
            }
            profile.use_retrieval = retrieval_it->get<bool>();
        }
        config.profiles[name] = profile;
    }
    if (config.profiles.empty()) throw ConfigError("config defines no profiles");

    config.profile = require_str(value, "profile");
    if (!config.profiles.contains(config.profile)) {
        throw ConfigError("unknown profile \"" + config.profile + "\"");
    }
    config.table_format = parse_format(require_str(value, "table_format"));
    config.strategy = parse_strategy(require_str(value, "strategy"));
    config.retrieval_k = require_size(value, "retrieval_k");
    if (config.retrieval_k == 0) throw ConfigError("retrieval_k must be positive");
    config.slice_limit = require_size(value, "slice_limit");
    if (config.slice_limit == 0) throw ConfigError("slice_limit must be positive");

    std::string extract = require_str(value, "extract_template");
    auto extract_template = template_from_string(extract);
    if (!extract_template) {
        throw ConfigError("unknown extract_template \"" + extract + "\"");
    }
    config.extract_template = *extract_template;

    std::string completion = require_str(value, "completion");
    auto level = completion_level_from_string(completion);
    if (!level) throw ConfigError("unknown completion level \"" + completion + "\"");
    config.completion = *level;

    config.backend = require_str(value, "backend");
    if (config.backend != "mock" && config.backend != "http") {
        throw ConfigError("backend must be \"mock\" or \"http\"");
    }
    config.llm_base_url = require_str(value, "llm_base_url");
    config.llm_model = require_str(value, "llm_model");
    config.api_key_env = require_str(value, "api_key_env");
    config.embed_base_url = require_str(value, "embed_base_url");
    config.embed_dim = require_size(value, "embed_dim");
    if (config.embed_dim == 0) throw ConfigError("embed_dim must be positive");

    auto levels_it = value.find("levels");
    if (levels_it == value.end() || !levels_it->is_array()) {
        throw ConfigError("config field \"levels\" must be an array");
    }
    config.levels.clear();
    for (const auto& label : *levels_it) {
        if (!label.is_string()) throw ConfigError("levels must contain strings");
        std::string text = label.get<std::string>();
        try {
            RetaLevel::parse(text);
        } catch (const EvalError& e) {
            throw ConfigError(std::string("invalid RETA level: ") + e.what());
        }
        config.levels.push_back(std::move(text));
    }
    if (config.levels.empty()) throw ConfigError("config defines no RETA levels");

    config.templates_dir = require_str(value, "templates_dir");
    config.trace_path = require_str(value, "trace_path");
    auto jobs_it = value.find("jobs");
    if (jobs_it == value.end() || !jobs_it->is_number_integer()) {
        throw ConfigError("config field \"jobs\" must be an integer");
    }
    config.jobs = jobs_it->get<int>();
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return run_config_from_json(value);
}

void save_run_config(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write config file " + path.string());
    out << run_config_to_json(config).dump(2) << '\n';
}

PipelineConfig to_pipeline_config(const RunConfig& config) {
    const ModelProfile& profile = active_profile(config);
    PipelineConfig pipeline;
    pipeline.budget = profile.budget;
    pipeline.table_format = config.table_format;
    pipeline.strategy = config.strategy;
    pipeline.use_retrieval = profile.use_retrieval;
    pipeline.retrieval_k = config.retrieval_k;
    pipeline.slice_limit = config.slice_limit;
    pipeline.extract_template = config.extract_template;
    pipeline.jobs = config.jobs;
    return pipeline;
}

}  // namespace afie
