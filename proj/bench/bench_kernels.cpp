// Serial reference kernels vs their OpenMP counterparts, on inputs sized
// like a mid-size filing corpus. Run with --benchmark_min_time=0.5s for
// stabler numbers on loaded machines.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "afie/document.hpp"
#include "afie/embedding.hpp"
#include "afie/evaluation.hpp"
#include "afie/money.hpp"
#include "afie/retrieval.hpp"
#include "afie/segmentation.hpp"
#include "afie/token_counter.hpp"

using namespace afie;

namespace {

std::string make_word(std::mt19937& rng) {
    std::size_t len = 2 + rng() % 9;
    std::string word;
    for (std::size_t i = 0; i < len; ++i) {
        word.push_back(static_cast<char>('a' + rng() % 26));
    }
    return word;
}

std::vector<Document> make_documents(std::size_t count) {
    std::mt19937 rng(7);
    std::vector<Document> docs;
    for (std::size_t i = 0; i < count; ++i) {
        Document doc;
        doc.id = "bench-" + std::to_string(i);
        doc.company = "corp" + std::to_string(i % 20);
        doc.period = "2022Q" + std::to_string(i % 4 + 1);
        std::size_t elements = 4 + rng() % 8;
        for (std::size_t e = 0; e < elements; ++e) {
            Element element;
            element.element_id = static_cast<int>(e);
            if (rng() % 4 == 0) {
                Table table;
                std::size_t rows = 3 + rng() % 20;
                for (std::size_t r = 0; r < rows; ++r) {
                    std::vector<std::string> row;
                    for (std::size_t c = 0; c < 5; ++c) row.push_back(make_word(rng));
                    table.rows.push_back(std::move(row));
                }
                element.content = std::move(table);
            } else {
                std::string text;
                std::size_t words = 200 + rng() % 2000;
                for (std::size_t w = 0; w < words; ++w) {
                    if (!text.empty()) text.push_back(' ');
                    text += make_word(rng);
                }
                element.content = Paragraph{std::move(text)};
            }
            doc.elements.push_back(std::move(element));
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<Segment> make_segments(std::size_t count) {
    std::mt19937 rng(11);
    HeuristicTokenCounter counter;
    std::vector<Segment> segments;
    for (std::size_t i = 0; i < count; ++i) {
        std::string text;
        std::size_t words = 300 + rng() % 1200;
        for (std::size_t w = 0; w < words; ++w) {
            if (!text.empty()) text.push_back(' ');
            text += make_word(rng);
        }
        Segment segment;
        segment.text = std::move(text);
        segment.token_count = counter.count(segment.text);
        segment.source_element_ids = {static_cast<int>(i)};
        segment.segment_index = static_cast<int>(i);
        segments.push_back(std::move(segment));
    }
    return segments;
}

struct EvalFixture {
    std::vector<GroundTruthRecord> records;
    PredictionMap predictions;
    std::vector<RetaLevel> levels = full_level_grid();
};

EvalFixture make_eval_fixture(std::size_t count) {
    std::mt19937 rng(13);
    EvalFixture fixture;
    for (std::size_t i = 0; i < count; ++i) {
        GroundTruthRecord record;
        record.company = "corp" + std::to_string(i % 50);
        record.time = "2022Q" + std::to_string(i % 4 + 1);
        record.keyword = "kpi" + std::to_string(i);
        record.value_millions =
            Decimal(1 + static_cast<std::int64_t>(rng() % 1000000), 2);
        fixture.records.push_back(record);

        std::optional<Decimal> prediction = record.value_millions;
        if (i % 7 == 0) prediction = std::nullopt;
        if (i % 5 == 0 && prediction) prediction = *prediction + Decimal(3, 2);
        fixture.predictions[{record.company, record.time, record.keyword}] = prediction;
    }
    return fixture;
}

void BM_segment_serial(benchmark::State& state) {
    const auto docs = make_documents(64);
    HeuristicTokenCounter counter;
    SegmentationConfig config;
    config.counter = &counter;
    for (auto _ : state) {
        benchmark::DoNotOptimize(segment_documents_serial(docs, config));
    }
}
BENCHMARK(BM_segment_serial);

void BM_segment_parallel(benchmark::State& state) {
    const auto docs = make_documents(64);
    HeuristicTokenCounter counter;
    SegmentationConfig config;
    config.counter = &counter;
    const int jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(segment_documents(docs, config, jobs));
    }
}
BENCHMARK(BM_segment_parallel)->Arg(2)->Arg(4)->Arg(0);

void BM_score_serial(benchmark::State& state) {
    const auto segments = make_segments(256);
    HeuristicTokenCounter counter;
    HashingEmbedder embedder;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            score_segments_serial(segments, "total net revenue", embedder, counter));
    }
}
BENCHMARK(BM_score_serial);

void BM_score_parallel(benchmark::State& state) {
    const auto segments = make_segments(256);
    HeuristicTokenCounter counter;
    HashingEmbedder embedder;
    const int jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            score_segments(segments, "total net revenue", embedder, counter, jobs));
    }
}
BENCHMARK(BM_score_parallel)->Arg(2)->Arg(4)->Arg(0);

void BM_verdicts_serial(benchmark::State& state) {
    const auto fixture = make_eval_fixture(20000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(detail::compute_verdicts_serial(
            fixture.records, fixture.predictions, fixture.levels));
    }
}
BENCHMARK(BM_verdicts_serial);

void BM_verdicts_parallel(benchmark::State& state) {
    const auto fixture = make_eval_fixture(20000);
    const int jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(detail::compute_verdicts(
            fixture.records, fixture.predictions, fixture.levels, jobs));
    }
}
BENCHMARK(BM_verdicts_parallel)->Arg(2)->Arg(4)->Arg(0);

}  // namespace

BENCHMARK_MAIN();
