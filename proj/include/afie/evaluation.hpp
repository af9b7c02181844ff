#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "afie/money.hpp"
#include "afie/rational.hpp"

namespace afie {

enum class FactLocus { TableOnly, TextAndTable };

const char* fact_locus_name(FactLocus locus);
FactLocus parse_fact_locus(std::string_view name);

struct GroundTruthRecord {
    std::string company;
    std::string time;
    std::string keyword;
    Decimal value_millions;
    std::vector<std::string> aliases;          // ambiguous surface forms
    std::optional<FactLocus> locus;

    bool operator==(const GroundTruthRecord&) const = default;
};

// Tolerance level of the relative-error accuracy metric. The label is the
// spelling used in reports ("0%", "0.001%", ...).
struct RetaLevel {
    Rational tolerance;
    std::string label;

    static RetaLevel parse(std::string_view text);
    bool operator==(const RetaLevel&) const = default;
};

// 0%, 0.001%, 0.01%, 0.1%, 1%, 3%, 5%, 10%
std::vector<RetaLevel> full_level_grid();
// 0%, 1%, 3%, 5%, 10% (the grid the eval command uses by default)
std::vector<RetaLevel> default_levels();
std::vector<RetaLevel> parse_levels(std::string_view comma_separated);

struct RecordVerdict {
    std::size_t record_index = 0;
    std::optional<Decimal> prediction;
    std::vector<bool> correct;  // parallel to the level list

    bool operator==(const RecordVerdict&) const = default;
};

struct EvalReport {
    std::vector<RetaLevel> levels;
    std::vector<Rational> accuracies;  // parallel to levels
    Rational average;                  // mean of the per-level accuracies
    std::vector<RecordVerdict> verdicts;
    std::size_t record_count = 0;
    std::size_t absent_predictions = 0;
    bool macro_averaged = false;
};

// Key of a prediction: (company, time, keyword).
using PredictionKey = std::tuple<std::string, std::string, std::string>;
using PredictionMap = std::map<PredictionKey, std::optional<Decimal>>;

// truth = 0 only matches an exact 0 prediction; otherwise the relative
// error must not exceed the tolerance (boundary inclusive, exact rational
// comparison). An absent prediction is always incorrect.
bool reta_correct(const Decimal& truth,
                  const std::optional<Decimal>& prediction,
                  const Rational& tolerance);

Rational accuracy(std::span<const std::pair<Decimal, std::optional<Decimal>>> records,
                  const Rational& tolerance);

// Relative percent difference |x - y| / ((x + y) / 2). Undefined (throws)
// when both inputs are zero.
Rational rpd(const Rational& acc_x, const Rational& acc_y);

std::vector<GroundTruthRecord> load_dataset(const std::filesystem::path& path);
std::vector<GroundTruthRecord> parse_dataset(std::string_view jsonl);

PredictionMap load_predictions(const std::filesystem::path& path);
std::string predictions_to_jsonl(const std::vector<GroundTruthRecord>& records,
                                 const PredictionMap& predictions);

// Scores one prediction per dataset record at every level. Micro averaging
// (per record) is the default; macro averages per-company accuracies first.
EvalReport evaluate_run(std::span<const GroundTruthRecord> records,
                        const PredictionMap& predictions,
                        std::span<const RetaLevel> levels,
                        bool macro_by_company = false,
                        int jobs = 0);

nlohmann::json report_to_json(const EvalReport& report);
// Aligned fixed-width table, one row per level plus the average.
std::string report_to_text(const EvalReport& report);

namespace detail {

// Verdict matrix kernels: one bool per (record, level). The parallel kernel
// shards by record; both produce identical output.
std::vector<RecordVerdict> compute_verdicts(
    std::span<const GroundTruthRecord> records,
    const PredictionMap& predictions,
    std::span<const RetaLevel> levels,
    int jobs);
std::vector<RecordVerdict> compute_verdicts_serial(
    std::span<const GroundTruthRecord> records,
    const PredictionMap& predictions,
    std::span<const RetaLevel> levels);

}  // namespace detail

}  // namespace afie
