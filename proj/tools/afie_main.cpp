#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "afie/config.hpp"
#include "afie/document.hpp"
#include "afie/embedding.hpp"
#include "afie/errors.hpp"
#include "afie/evaluation.hpp"
#include "afie/llm.hpp"
#include "afie/paths.hpp"
#include "afie/pipeline.hpp"
#include "afie/prompting.hpp"
#include "afie/segmentation.hpp"
#include "afie/serialization.hpp"
#include "afie/token_counter.hpp"
#include "afie/trace.hpp"

namespace {

// Flag values shared by every subcommand. Empty string / -1 means "not
// given": the value from the config file stays in effect.
struct CommonFlags {
    std::string config_path = AFIE_DEFAULT_CONFIG;
    std::string profile;
    std::string format;
    std::string strategy;
    std::string completion;
    std::string extract_template;
    std::string backend;
    std::string llm_url;
    std::string llm_model;
    std::string embed_url;
    std::string templates_dir;
    std::string trace_path;
    std::string levels;
    long long k = -1;
    int jobs = 0;
    bool jobs_given = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Run configuration file")
        ->capture_default_str();
    cmd->add_option("--profile", flags.profile, "Model profile name from the config");
    cmd->add_option("--format", flags.format, "Table serialization format (plain|csv|xml|html)");
    cmd->add_option("--strategy", flags.strategy,
                    "Summarization strategy (refine|map_reduce|naive)");
    cmd->add_option("--completion", flags.completion,
                    "Keyword completion level (A|A_C|A_T|A_T_C)");
    cmd->add_option("--extract-template", flags.extract_template,
                    "Extraction prompt (extract_single|extract_batch|precision variants)");
    cmd->add_option("--backend", flags.backend, "LLM backend (mock|http)");
    cmd->add_option("--llm-url", flags.llm_url, "Completion service base URL");
    cmd->add_option("--llm-model", flags.llm_model, "Completion service model name");
    cmd->add_option("--embed-url", flags.embed_url,
                    "Embedding service base URL (default: built-in hashing embedder)");
    cmd->add_option("--templates-dir", flags.templates_dir, "Prompt template asset directory");
    cmd->add_option("--trace", flags.trace_path, "Write a JSONL trace of all model calls");
    cmd->add_option("--levels", flags.levels, "Comma-separated RETA levels, e.g. 0%,1%,5%");
    cmd->add_option("--k", flags.k, "Number of segments retrieval keeps");
    cmd->add_option("--jobs", flags.jobs, "Worker threads (0 = all cores)");
}

afie::RunConfig resolve_config(const CommonFlags& flags, const CLI::App* cmd) {
    afie::RunConfig config = afie::load_run_config(flags.config_path);
    if (cmd->count("--profile") > 0) config.profile = flags.profile;
    if (cmd->count("--format") > 0) config.table_format = afie::parse_format(flags.format);
    if (cmd->count("--strategy") > 0) config.strategy = afie::parse_strategy(flags.strategy);
    if (cmd->count("--completion") > 0) {
        auto level = afie::completion_level_from_string(flags.completion);
        if (!level) throw afie::ConfigError("unknown completion level \"" + flags.completion + "\"");
        config.completion = *level;
    }
    if (cmd->count("--extract-template") > 0) {
        auto name = afie::template_from_string(flags.extract_template);
        if (!name) {
            throw afie::ConfigError("unknown extract template \"" + flags.extract_template + "\"");
        }
        config.extract_template = *name;
    }
    if (cmd->count("--backend") > 0) {
        if (flags.backend != "mock" && flags.backend != "http") {
            throw afie::ConfigError("backend must be \"mock\" or \"http\"");
        }
        config.backend = flags.backend;
    }
    if (cmd->count("--llm-url") > 0) config.llm_base_url = flags.llm_url;
    if (cmd->count("--llm-model") > 0) config.llm_model = flags.llm_model;
    if (cmd->count("--embed-url") > 0) config.embed_base_url = flags.embed_url;
    if (cmd->count("--templates-dir") > 0) config.templates_dir = flags.templates_dir;
    if (cmd->count("--trace") > 0) config.trace_path = flags.trace_path;
    if (cmd->count("--levels") > 0) {
        config.levels.clear();
        for (const afie::RetaLevel& level : afie::parse_levels(flags.levels)) {
            config.levels.push_back(level.label);
        }
    }
    if (cmd->count("--k") > 0) {
        if (flags.k < 1) throw afie::ConfigError("--k must be at least 1");
        config.retrieval_k = static_cast<std::size_t>(flags.k);
    }
    if (cmd->count("--jobs") > 0) config.jobs = flags.jobs;
    afie::active_profile(config);  // validates the profile reference
    return config;
}

struct Runtime {
    afie::HeuristicTokenCounter counter;
    std::unique_ptr<afie::Tracer> tracer;
    afie::TemplateRegistry templates;
    std::unique_ptr<afie::EmbeddingProvider> embedder;
    std::unique_ptr<afie::LlmClient> llm;
};

Runtime build_runtime(const afie::RunConfig& config) {
    Runtime runtime;
    if (!config.trace_path.empty()) {
        runtime.tracer = std::make_unique<afie::Tracer>(config.trace_path);
    }
    std::string templates_dir =
        config.templates_dir.empty() ? std::string(AFIE_TEMPLATE_DIR) : config.templates_dir;
    runtime.templates = afie::TemplateRegistry::load(templates_dir);

    std::string api_key;
    if (const char* env = std::getenv(config.api_key_env.c_str())) api_key = env;

    if (config.embed_base_url.empty()) {
        runtime.embedder =
            std::make_unique<afie::HashingEmbedder>(config.embed_dim, config.slice_limit);
    } else {
        afie::HttpEmbeddingProvider::Options options;
        options.base_url = config.embed_base_url;
        options.auth_token = api_key;
        options.max_tokens = config.slice_limit;
        runtime.embedder = std::make_unique<afie::HttpEmbeddingProvider>(options);
    }

    const afie::ModelProfile& profile = afie::active_profile(config);
    if (config.backend == "mock") {
        runtime.llm = std::make_unique<afie::MockLlm>(profile.budget.window, runtime.counter,
                                                      runtime.tracer.get());
    } else {
        if (config.llm_base_url.empty()) {
            throw afie::ConfigError("http backend needs --llm-url (or llm_base_url in the config)");
        }
        afie::HttpLlmClient::Options options;
        options.base_url = config.llm_base_url;
        options.model = config.llm_model;
        options.api_key = api_key;
        options.window = profile.budget.window;
        runtime.llm = std::make_unique<afie::HttpLlmClient>(options, runtime.counter,
                                                            runtime.tracer.get());
    }
    return runtime;
}

afie::PipelineContext make_context(const Runtime& runtime) {
    afie::PipelineContext ctx;
    ctx.llm = runtime.llm.get();
    ctx.embedder = runtime.embedder.get();
    ctx.counter = &runtime.counter;
    ctx.templates = &runtime.templates;
    return ctx;
}

std::vector<afie::RetaLevel> config_levels(const afie::RunConfig& config) {
    std::vector<afie::RetaLevel> levels;
    for (const std::string& label : config.levels) {
        levels.push_back(afie::RetaLevel::parse(label));
    }
    return levels;
}

int cmd_extract(const CommonFlags& flags, const CLI::App* cmd, const std::string& doc_path,
                const std::string& attribute, const std::string& company,
                const std::string& time) {
    afie::RunConfig config = resolve_config(flags, cmd);
    Runtime runtime = build_runtime(config);

    afie::Document doc = afie::load_document(doc_path);
    afie::Keyword keyword;
    keyword.attribute = attribute;
    if (!company.empty()) keyword.company = company;
    if (!time.empty()) keyword.time = time;
    keyword.completion_level = config.completion;

    afie::ExtractionResult result =
        afie::run_extraction(doc, keyword, afie::to_pipeline_config(config), make_context(runtime));
    std::cout << afie::extraction_result_to_json(result).dump(2) << "\n";
    return 0;
}

int cmd_eval(const CommonFlags& flags, const CLI::App* cmd, const std::string& dataset_path,
             const std::string& docs_dir, const std::string& predictions_path, bool macro) {
    afie::RunConfig config = resolve_config(flags, cmd);
    Runtime runtime = build_runtime(config);
    afie::PipelineContext ctx = make_context(runtime);
    afie::PipelineConfig pipeline = afie::to_pipeline_config(config);
    std::vector<afie::RetaLevel> levels = config_levels(config);

    std::vector<afie::GroundTruthRecord> records = afie::load_dataset(dataset_path);

    std::vector<std::filesystem::path> doc_files;
    for (const auto& entry : std::filesystem::directory_iterator(docs_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            doc_files.push_back(entry.path());
        }
    }
    std::sort(doc_files.begin(), doc_files.end());
    std::vector<afie::Document> docs;
    std::map<std::pair<std::string, std::string>, std::size_t> doc_index;
    for (const auto& path : doc_files) {
        afie::Document doc = afie::load_document(path);
        auto key = std::make_pair(doc.company, doc.period);
        if (!doc_index.emplace(key, docs.size()).second) {
            std::cerr << "warning: duplicate document for (" << doc.company << ", " << doc.period
                      << "), keeping the first\n";
            continue;
        }
        docs.push_back(std::move(doc));
    }

    std::vector<std::optional<afie::Decimal>> values(records.size());
    std::exception_ptr failure;
#ifdef _OPENMP
    const int threads = config.jobs > 0 ? config.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (config.jobs != 1)
#endif
    for (long long i = 0; i < static_cast<long long>(records.size()); ++i) {
        const afie::GroundTruthRecord& record = records[static_cast<std::size_t>(i)];
        try {
            auto found = doc_index.find(std::make_pair(record.company, record.time));
            if (found == doc_index.end()) continue;  // no document: prediction stays absent
            afie::Keyword keyword;
            keyword.attribute = record.keyword;
            keyword.company = record.company;
            keyword.time = record.time;
            keyword.completion_level = config.completion;
            afie::ExtractionResult result =
                afie::run_extraction(docs[found->second], keyword, pipeline, ctx);
            if (result.value) {
                values[static_cast<std::size_t>(i)] = result.value->amount_millions;
            }
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(afie_cli_eval_failure)
#endif
            {
                if (!failure) failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);

    afie::PredictionMap predictions;
    for (std::size_t i = 0; i < records.size(); ++i) {
        predictions[{records[i].company, records[i].time, records[i].keyword}] = values[i];
        if (doc_index.find(std::make_pair(records[i].company, records[i].time)) ==
            doc_index.end()) {
            std::cerr << "warning: no document for (" << records[i].company << ", "
                      << records[i].time << ")\n";
        }
    }

    afie::EvalReport report =
        afie::evaluate_run(records, predictions, levels, macro, config.jobs);
    if (!predictions_path.empty()) {
        std::ofstream out(predictions_path, std::ios::binary | std::ios::trunc);
        if (!out) throw afie::ConfigError("cannot write predictions file " + predictions_path);
        out << afie::predictions_to_jsonl(records, predictions);
    }
    std::cout << afie::report_to_json(report).dump(2) << "\n";
    return 0;
}

int cmd_segment(const CommonFlags& flags, const CLI::App* cmd, const std::string& doc_path) {
    afie::RunConfig config = resolve_config(flags, cmd);
    afie::HeuristicTokenCounter counter;
    afie::SegmentationConfig seg;
    const afie::ModelProfile& profile = afie::active_profile(config);
    seg.element_limit = profile.budget.element_limit;
    seg.segment_limit = profile.budget.segment_limit;
    seg.format = config.table_format;
    seg.counter = &counter;

    afie::Document doc = afie::load_document(doc_path);
    std::vector<std::string> warnings;
    std::vector<afie::Segment> segments = afie::segment_document(doc, seg, &warnings);
    for (const std::string& warning : warnings) std::cerr << "warning: " << warning << "\n";

    nlohmann::json out = {{"document", doc.id}, {"segments", nlohmann::json::array()}};
    for (const afie::Segment& segment : segments) {
        out["segments"].push_back({
            {"segment_index", segment.segment_index},
            {"token_count", segment.token_count},
            {"source_element_ids", segment.source_element_ids},
            {"text", segment.text},
        });
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_serialize(const CommonFlags& flags, const CLI::App* cmd, const std::string& doc_path) {
    afie::RunConfig config = resolve_config(flags, cmd);
    afie::Document doc = afie::load_document(doc_path);
    nlohmann::json out = {
        {"document", doc.id},
        {"format", std::string(afie::format_name(config.table_format))},
        {"elements", nlohmann::json::array()},
    };
    for (const afie::Element& element : doc.elements) {
        out["elements"].push_back({
            {"element_id", element.element_id},
            {"text", afie::serialize_element(element, config.table_format)},
        });
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_templates(const CommonFlags& flags, const CLI::App* cmd) {
    afie::RunConfig config = resolve_config(flags, cmd);
    std::string dir =
        config.templates_dir.empty() ? std::string(AFIE_TEMPLATE_DIR) : config.templates_dir;
    afie::TemplateRegistry registry = afie::TemplateRegistry::load(dir);
    std::vector<afie::TemplateCheck> checks = afie::verify_templates(registry);

    bool all_ok = true;
    nlohmann::json out = {{"directory", dir}, {"templates", nlohmann::json::array()}};
    for (const afie::TemplateCheck& check : checks) {
        all_ok = all_ok && check.ok;
        out["templates"].push_back({
            {"name", std::string(afie::template_display_name(check.name))},
            {"file", check.file},
            {"ok", check.ok},
            {"failures", check.failures},
        });
    }
    out["all_ok"] = all_ok;
    std::cout << out.dump(2) << "\n";
    return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Keyword-driven KPI extraction from financial reports"};
    app.require_subcommand(1);

    CommonFlags flags;

    std::string doc_path;
    std::string attribute;
    std::string company;
    std::string time;
    CLI::App* extract = app.add_subcommand("extract", "Extract one KPI value from a document");
    add_common_flags(extract, flags);
    extract->add_option("--doc", doc_path, "Document JSON file")->required();
    extract->add_option("--attribute", attribute, "KPI attribute, e.g. \"Net Income\"")->required();
    extract->add_option("--company", company, "Company name for keyword completion");
    extract->add_option("--time", time, "Time label for keyword completion");

    std::string dataset_path;
    std::string docs_dir;
    std::string predictions_path;
    bool macro = false;
    CLI::App* eval = app.add_subcommand("eval", "Run the pipeline over a dataset and score it");
    add_common_flags(eval, flags);
    eval->add_option("--dataset", dataset_path, "Ground-truth JSONL file")->required();
    eval->add_option("--docs-dir", docs_dir, "Directory of document JSON files")->required();
    eval->add_option("--predictions", predictions_path, "Write predictions JSONL here");
    eval->add_flag("--macro", macro, "Average per company instead of per record");

    std::string segment_doc;
    CLI::App* segment = app.add_subcommand("segment", "Dump a document's segments");
    add_common_flags(segment, flags);
    segment->add_option("--doc", segment_doc, "Document JSON file")->required();

    std::string serialize_doc;
    CLI::App* serialize = app.add_subcommand("serialize", "Dump a document's serialized elements");
    add_common_flags(serialize, flags);
    serialize->add_option("--doc", serialize_doc, "Document JSON file")->required();

    CLI::App* templates = app.add_subcommand("templates", "Verify the prompt template assets");
    add_common_flags(templates, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << std::flush;
        return 1;
    }

    try {
        if (extract->parsed()) {
            return cmd_extract(flags, extract, doc_path, attribute, company, time);
        }
        if (eval->parsed()) {
            return cmd_eval(flags, eval, dataset_path, docs_dir, predictions_path, macro);
        }
        if (segment->parsed()) return cmd_segment(flags, segment, segment_doc);
        if (serialize->parsed()) return cmd_serialize(flags, serialize, serialize_doc);
        if (templates->parsed()) return cmd_templates(flags, templates);
    } catch (const afie::DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const afie::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
