#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "afie/errors.hpp"
#include "afie/pipeline.hpp"
#include "afie/trace.hpp"
#include "test_support.hpp"

using namespace afie;

namespace {

Segment make_segment(std::string text, int index, const TokenCounter& counter) {
    Segment segment;
    segment.text = std::move(text);
    segment.token_count = counter.count(segment.text);
    segment.source_element_ids = {index};
    segment.segment_index = index;
    return segment;
}

struct MockRig {
    HeuristicTokenCounter counter;
    MockLlm llm;
    HashingEmbedder embedder{256, 384};

    explicit MockRig(std::size_t window = 4096) : llm(window, counter) {}

    PipelineContext context() {
        PipelineContext ctx;
        ctx.llm = &llm;
        ctx.embedder = &embedder;
        ctx.counter = &counter;
        ctx.templates = &testsupport::default_registry();
        return ctx;
    }
};

std::size_t count_kind(const std::vector<PromptKind>& calls, PromptKind kind) {
    return static_cast<std::size_t>(std::count(calls.begin(), calls.end(), kind));
}

}  // namespace

TEST_CASE("strategy names round-trip") {
    CHECK(std::string(strategy_name(SummarizationStrategy::Refine)) == "refine");
    CHECK(std::string(strategy_name(SummarizationStrategy::MapReduce)) == "map_reduce");
    CHECK(std::string(strategy_name(SummarizationStrategy::Naive)) == "naive");
    CHECK(parse_strategy("refine") == SummarizationStrategy::Refine);
    CHECK(parse_strategy("map_reduce") == SummarizationStrategy::MapReduce);
    CHECK(parse_strategy("naive") == SummarizationStrategy::Naive);
    CHECK_THROWS_AS(parse_strategy("stuff"), ConfigError);
}

TEST_CASE("refine folds segments through question then refine") {
    MockRig rig;
    TokenBudget budget;
    std::vector<Segment> segments{
        make_segment("Revenue of ACME was $5.000 million.", 0, rig.counter),
        make_segment("Filler without matches.", 1, rig.counter),
        make_segment("Revenue of ACME grew further.", 2, rig.counter),
    };
    std::string summary =
        summarize_refine(segments, "Revenue of ACME", rig.llm, budget,
                         testsupport::default_registry(), rig.counter);
    CHECK(rig.llm.calls() == std::vector<PromptKind>{PromptKind::Summarize,
                                                     PromptKind::Refine,
                                                     PromptKind::Refine});
    CHECK(summary.find("Revenue of ACME was $5.000 million.") != std::string::npos);
    CHECK(summary.find("Revenue of ACME grew further.") != std::string::npos);
    CHECK(summary.find("Filler") == std::string::npos);
}

TEST_CASE("refine rejects an empty segment list") {
    MockRig rig;
    TokenBudget budget;
    CHECK_THROWS_AS(summarize_refine({}, "Revenue", rig.llm, budget,
                                     testsupport::default_registry(), rig.counter),
                    PipelineError);
    CHECK_THROWS_AS(summarize_map_reduce({}, "Revenue", rig.llm, budget,
                                         testsupport::default_registry(), rig.counter),
                    PipelineError);
}

TEST_CASE("map_reduce maps every segment then reduces") {
    MockRig rig;
    TokenBudget budget;
    std::vector<Segment> segments{
        make_segment("Revenue of ACME was $5.000 million.", 0, rig.counter),
        make_segment("Net income of ACME was $1.200 million.", 1, rig.counter),
        make_segment("Revenue of ACME grew further.", 2, rig.counter),
    };
    std::string summary =
        summarize_map_reduce(segments, "Revenue of ACME", rig.llm, budget,
                             testsupport::default_registry(), rig.counter);
    auto calls = rig.llm.calls();
    CHECK(count_kind(calls, PromptKind::Summarize) == 3);
    CHECK(count_kind(calls, PromptKind::Reduce) >= 1);
    CHECK(summary.find("Revenue of ACME was $5.000 million.") != std::string::npos);

    // A single segment still passes through one reduce round.
    rig.llm.reset_calls();
    std::string single =
        summarize_map_reduce(std::span<const Segment>(segments.data(), 1), "Revenue of ACME",
                             rig.llm, budget, testsupport::default_registry(), rig.counter);
    CHECK(rig.llm.calls() == std::vector<PromptKind>{PromptKind::Summarize,
                                                     PromptKind::Reduce});
    CHECK(single.find("Revenue of ACME was $5.000 million.") != std::string::npos);
}

TEST_CASE("map_reduce runs multiple reduce rounds under a tight window") {
    MockRig rig(700);
    TokenBudget budget;
    budget.window = 700;
    budget.summary_limit = 100;

    std::vector<Segment> segments;
    for (int i = 0; i < 6; ++i) {
        std::string line = "Revenue of ACME item" + std::to_string(i) + " was $" +
                           std::to_string(i + 1) + ".000 million";
        while (line.size() < 360) line += " detail" + std::to_string(i);
        segments.push_back(make_segment(line + ".", i, rig.counter));
    }
    std::string summary =
        summarize_map_reduce(segments, "Revenue of ACME", rig.llm, budget,
                             testsupport::default_registry(), rig.counter);
    auto calls = rig.llm.calls();
    CHECK(count_kind(calls, PromptKind::Summarize) == 6);
    CHECK(count_kind(calls, PromptKind::Reduce) >= 2);
    CHECK(rig.counter.count(summary) <= budget.summary_limit);
}

TEST_CASE("map_reduce output does not depend on the job count") {
    TokenBudget budget;
    std::vector<std::string> outputs;
    for (int jobs : {1, 4}) {
        MockRig rig;
        std::vector<Segment> segments;
        for (int i = 0; i < 8; ++i) {
            segments.push_back(make_segment(
                "Revenue of ACME line" + std::to_string(i) + " was $" +
                    std::to_string(i + 1) + ".500 million.",
                i, rig.counter));
        }
        outputs.push_back(summarize_map_reduce(segments, "Revenue of ACME", rig.llm, budget,
                                               testsupport::default_registry(), rig.counter,
                                               jobs));
    }
    CHECK(outputs[0] == outputs[1]);
}

TEST_CASE("extract_value parses money and treats None as absent") {
    MockRig rig;
    TokenBudget budget;
    ExtractionResult hit =
        extract_value("Revenue of ACME was $5.000 million.", "Revenue of ACME", rig.llm,
                      budget, testsupport::default_registry(), rig.counter);
    REQUIRE(hit.value.has_value());
    CHECK(hit.value->amount_millions == Decimal::parse("5"));
    CHECK(hit.value->precision == 2);
    CHECK(hit.value->render() == "5.00");
    CHECK(hit.raw_model_output == "5.00");
    CHECK(hit.summary == "Revenue of ACME was $5.000 million.");

    ExtractionResult miss =
        extract_value("Nothing relevant.", "Revenue of ACME", rig.llm, budget,
                      testsupport::default_registry(), rig.counter);
    CHECK(!miss.value.has_value());
    CHECK(miss.raw_model_output == "None");
}

TEST_CASE("run_extraction end to end on the fixture document") {
    MockRig rig;
    Document doc = testsupport::fixture_document();
    Keyword keyword{"Revenue", "ACME", "2022Q4", CompletionLevel::A_T_C};
    PipelineConfig config;

    ExtractionResult result = run_extraction(doc, keyword, config, rig.context());
    CHECK(result.keyword == keyword);
    CHECK(result.keyword_text == "Revenue of ACME 2022Q4");
    REQUIRE(result.value.has_value());
    CHECK(result.value->render() == "5.00");
    CHECK(result.retrieved_segment_indices == std::vector<int>{0});
    CHECK(result.summary.find("Revenue of ACME for 2022Q4") != std::string::npos);

    nlohmann::json j = extraction_result_to_json(result);
    CHECK(j["keyword"]["attribute"] == "Revenue");
    CHECK(j["keyword"]["company"] == "ACME");
    CHECK(j["keyword"]["time"] == "2022Q4");
    CHECK(j["keyword"]["completion_level"] == "A_T_C");
    CHECK(j["keyword_text"] == "Revenue of ACME 2022Q4");
    CHECK(j["value"] == "5.00");
    CHECK(j["raw_model_output"] == "5.00");
    CHECK(j["retrieved_segment_indices"] == nlohmann::json::array({0}));

    Keyword net{"Net Income", "ACME", "2022Q4", CompletionLevel::A_T_C};
    ExtractionResult net_result = run_extraction(doc, net, config, rig.context());
    REQUIRE(net_result.value.has_value());
    CHECK(net_result.value->render() == "1.20");
}

TEST_CASE("absent keyword answers as a null value in json") {
    MockRig rig;
    Document doc = testsupport::fixture_document();
    Keyword keyword{"Deferred Tax Liability", "ACME", "2022Q4", CompletionLevel::A_T_C};
    PipelineConfig config;
    ExtractionResult result = run_extraction(doc, keyword, config, rig.context());
    CHECK(!result.value.has_value());
    nlohmann::json j = extraction_result_to_json(result);
    CHECK(j["value"].is_null());
}

TEST_CASE("all three strategies agree on the fixture value") {
    Document doc = testsupport::fixture_document();
    Keyword keyword{"Revenue", "ACME", "2022Q4", CompletionLevel::A_T_C};

    for (SummarizationStrategy strategy :
         {SummarizationStrategy::Refine, SummarizationStrategy::MapReduce,
          SummarizationStrategy::Naive}) {
        MockRig rig;
        PipelineConfig config;
        config.strategy = strategy;
        ExtractionResult result = run_extraction(doc, keyword, config, rig.context());
        REQUIRE(result.value.has_value());
        CHECK(result.value->render() == "5.00");
        if (strategy == SummarizationStrategy::Naive) {
            CHECK(rig.llm.calls() == std::vector<PromptKind>{PromptKind::Extract});
            CHECK(result.retrieved_segment_indices.empty());
        } else {
            CHECK(rig.llm.calls().back() == PromptKind::Extract);
        }
    }
}

TEST_CASE("run_extraction validates its context") {
    MockRig rig;
    Document doc = testsupport::fixture_document();
    Keyword keyword{"Revenue", "ACME", "2022Q4", CompletionLevel::A_T_C};
    PipelineConfig config;

    PipelineContext no_llm = rig.context();
    no_llm.llm = nullptr;
    CHECK_THROWS_AS(run_extraction(doc, keyword, config, no_llm), ConfigError);

    PipelineContext no_templates = rig.context();
    no_templates.templates = nullptr;
    CHECK_THROWS_AS(run_extraction(doc, keyword, config, no_templates), ConfigError);

    PipelineContext no_embedder = rig.context();
    no_embedder.embedder = nullptr;
    CHECK_THROWS_AS(run_extraction(doc, keyword, config, no_embedder), ConfigError);

    // The naive baseline never retrieves, so it runs without an embedder.
    PipelineConfig naive = config;
    naive.strategy = SummarizationStrategy::Naive;
    CHECK_NOTHROW(run_extraction(doc, keyword, naive, no_embedder));
}

namespace {

// Enough oversized paragraphs to force several segments under the default
// budget, so retrieval actually runs.
Document wide_document() {
    Document doc;
    doc.id = "wide-2022q4";
    doc.company = "ACME";
    doc.period = "2022Q4";
    doc.report_type = ReportType::TenQ;
    for (int i = 0; i < 10; ++i) {
        Paragraph p;
        p.text = "Revenue of ACME for 2022Q4 was $5.000 million in view " +
                 std::to_string(i) + ".";
        while (p.text.size() < 2800) p.text += " More discussion follows here.";
        doc.elements.push_back(Element{i, p});
    }
    return doc;
}

}  // namespace

TEST_CASE("retrieval failures surface as stage-tagged pipeline errors") {
    MockRig rig;
    testsupport::ThrowingEmbedder bad;
    PipelineContext ctx = rig.context();
    ctx.embedder = &bad;
    Document doc = wide_document();
    Keyword keyword{"Revenue", "ACME", "2022Q4", CompletionLevel::A_T_C};
    PipelineConfig config;
    try {
        run_extraction(doc, keyword, config, ctx);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(std::string(e.what()).find("[retrieval]") != std::string::npos);
    }
}

TEST_CASE("budget violations propagate unwrapped") {
    MockRig rig;
    Document doc = testsupport::fixture_document();
    std::string huge_attribute;
    for (int i = 0; i < 60; ++i) huge_attribute += "verylongword ";
    Keyword keyword{huge_attribute, "ACME", "2022Q4", CompletionLevel::A_T_C};
    PipelineConfig config;
    CHECK_THROWS_AS(run_extraction(doc, keyword, config, rig.context()), BudgetError);
}

TEST_CASE("a large window without retrieval summarizes everything at once") {
    MockRig rig(32768);
    Document doc = wide_document();
    Keyword keyword{"Revenue", "ACME", "2022Q4", CompletionLevel::A_T_C};

    PipelineConfig config;
    config.budget.window = 32768;
    config.budget.element_limit = 25000;
    config.budget.segment_limit = 25000;
    config.budget.summary_limit = 5000;
    config.use_retrieval = false;

    ExtractionResult result = run_extraction(doc, keyword, config, rig.context());
    auto calls = rig.llm.calls();
    CHECK(count_kind(calls, PromptKind::Summarize) == 1);
    CHECK(count_kind(calls, PromptKind::Refine) == 0);
    REQUIRE(result.value.has_value());
    CHECK(result.value->render() == "5.00");
    CHECK(result.retrieved_segment_indices == std::vector<int>{0});
}

TEST_CASE("retrieval keeps only the top k segments") {
    MockRig rig;
    Document doc = wide_document();
    Keyword keyword{"Revenue", "ACME", "2022Q4", CompletionLevel::A_T_C};
    PipelineConfig config;
    ExtractionResult result = run_extraction(doc, keyword, config, rig.context());
    CHECK(result.retrieved_segment_indices.size() == config.retrieval_k);
    CHECK(std::is_sorted(result.retrieved_segment_indices.begin(),
                         result.retrieved_segment_indices.end()));
    REQUIRE(result.value.has_value());
    CHECK(result.value->render() == "5.00");
}

TEST_CASE("run_extraction is deterministic") {
    Document doc = testsupport::fixture_document();
    Keyword keyword{"Revenue", "ACME", "2022Q4", CompletionLevel::A_T_C};
    PipelineConfig config;
    MockRig first;
    MockRig second;
    ExtractionResult a = run_extraction(doc, keyword, config, first.context());
    ExtractionResult b = run_extraction(doc, keyword, config, second.context());
    CHECK(a == b);
}

TEST_CASE("tracer records every model call") {
    namespace fs = std::filesystem;
    fs::path dir = testsupport::fresh_temp_dir("trace");
    fs::path trace_path = dir / "trace.jsonl";
    {
        HeuristicTokenCounter counter;
        Tracer tracer(trace_path);
        REQUIRE(tracer.enabled());
        MockLlm llm(4096, counter, &tracer);
        HashingEmbedder embedder(256, 384);
        PipelineContext ctx;
        ctx.llm = &llm;
        ctx.embedder = &embedder;
        ctx.counter = &counter;
        ctx.templates = &testsupport::default_registry();
        Document doc = testsupport::fixture_document();
        Keyword keyword{"Revenue", "ACME", "2022Q4", CompletionLevel::A_T_C};
        run_extraction(doc, keyword, PipelineConfig{}, ctx);
    }
    std::ifstream in(trace_path);
    REQUIRE(in.is_open());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        CHECK(j["kind"] == "llm");
        CHECK(j["seq"] == lines);
        CHECK(j.contains("request"));
        CHECK(j.contains("response"));
        ++lines;
    }
    CHECK(lines >= 2);  // at least one summarize plus the extract call
    fs::remove_all(dir);
}
