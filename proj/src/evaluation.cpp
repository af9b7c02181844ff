#include "afie/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "afie/errors.hpp"

namespace afie {

namespace {

std::string triple_name(const std::string& company, const std::string& time,
                        const std::string& keyword) {
    return "(" + company + ", " + time + ", " + keyword + ")";
}

// Ground-truth values arrive as decimal strings (optionally comma-grouped);
// integers are accepted too. Floating JSON numbers are rejected because the
// binary value may not be the decimal the author wrote.
Decimal parse_truth_value(const nlohmann::json& value, std::size_t line) {
    if (value.is_string()) {
        std::string text = value.get<std::string>();
        std::string plain;
        plain.reserve(text.size());
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == ',' && i > 0 && i + 1 < text.size() &&
                std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                continue;
            }
            plain.push_back(text[i]);
        }
        try {
            return Decimal::parse(plain);
        } catch (const MoneyParseError& e) {
            throw DatasetError(std::string("invalid value_millions: ") + e.what(), line);
        }
    }
    if (value.is_number_integer()) {
        return Decimal(value.get<std::int64_t>(), 0);
    }
    throw DatasetError("value_millions must be a decimal string", line);
}

std::string require_string(const nlohmann::json& record, const char* key, std::size_t line) {
    auto it = record.find(key);
    if (it == record.end() || !it->is_string()) {
        throw DatasetError(std::string("missing string field \"") + key + "\"", line);
    }
    return it->get<std::string>();
}

template <typename RecordFn>
void for_each_jsonl_line(std::string_view text, RecordFn fn) {
    std::size_t line_number = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(begin, end - begin);
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        bool blank = line.find_first_not_of(" \t") == std::string_view::npos;
        if (!blank) fn(line, line_number);
        if (end == text.size()) break;
        begin = end + 1;
    }
}

std::string read_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DatasetError(std::string("cannot open ") + what + " file " + path.string(), 0);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

}  // namespace

const char* fact_locus_name(FactLocus locus) {
    return locus == FactLocus::TableOnly ? "table_only" : "text_and_table";
}

FactLocus parse_fact_locus(std::string_view name) {
    if (name == "table_only") return FactLocus::TableOnly;
    if (name == "text_and_table") return FactLocus::TextAndTable;
    throw DatasetError("unknown locus \"" + std::string(name) + "\"", 0);
}

RetaLevel RetaLevel::parse(std::string_view text) {
    std::size_t begin = text.find_first_not_of(" \t");
    std::size_t end = text.find_last_not_of(" \t");
    if (begin == std::string_view::npos) throw EvalError("empty RETA level");
    std::string label(text.substr(begin, end - begin + 1));
    return RetaLevel{parse_tolerance(label), label};
}

std::vector<RetaLevel> full_level_grid() {
    return parse_levels("0%,0.001%,0.01%,0.1%,1%,3%,5%,10%");
}

std::vector<RetaLevel> default_levels() {
    return parse_levels("0%,1%,3%,5%,10%");
}

std::vector<RetaLevel> parse_levels(std::string_view comma_separated) {
    std::vector<RetaLevel> levels;
    std::size_t begin = 0;
    while (begin <= comma_separated.size()) {
        std::size_t end = comma_separated.find(',', begin);
        if (end == std::string_view::npos) end = comma_separated.size();
        levels.push_back(RetaLevel::parse(comma_separated.substr(begin, end - begin)));
        if (end == comma_separated.size()) break;
        begin = end + 1;
    }
    if (levels.empty()) throw EvalError("no RETA levels given");
    return levels;
}

bool reta_correct(const Decimal& truth,
                  const std::optional<Decimal>& prediction,
                  const Rational& tolerance) {
    if (!prediction.has_value()) return false;
    if (truth.is_zero()) return prediction->is_zero();
    Rational t = Rational::from_decimal(truth);
    Rational p = Rational::from_decimal(*prediction);
    return (p - t).abs() <= tolerance * t.abs();
}

Rational accuracy(std::span<const std::pair<Decimal, std::optional<Decimal>>> records,
                  const Rational& tolerance) {
    if (records.empty()) throw EmptyEvalError("accuracy of an empty record set");
    std::int64_t correct = 0;
    for (const auto& [truth, prediction] : records) {
        if (reta_correct(truth, prediction, tolerance)) ++correct;
    }
    return Rational(correct, static_cast<std::int64_t>(records.size()));
}

Rational rpd(const Rational& acc_x, const Rational& acc_y) {
    Rational sum = acc_x + acc_y;
    if (sum.is_zero()) {
        throw UndefinedRpdError("relative percent difference is undefined when both inputs are zero");
    }
    return (acc_x - acc_y).abs() / (sum / Rational(2));
}

std::vector<GroundTruthRecord> parse_dataset(std::string_view jsonl) {
    std::vector<GroundTruthRecord> records;
    std::map<PredictionKey, std::size_t> seen;
    for_each_jsonl_line(jsonl, [&](std::string_view line, std::size_t line_number) {
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DatasetError(e.what(), line_number);
        }
        if (!parsed.is_object()) throw DatasetError("record is not a JSON object", line_number);

        GroundTruthRecord record;
        record.company = require_string(parsed, "company", line_number);
        record.time = require_string(parsed, "time", line_number);
        record.keyword = require_string(parsed, "keyword", line_number);
        if (record.keyword.empty()) throw DatasetError("keyword is empty", line_number);
        auto value_it = parsed.find("value_millions");
        if (value_it == parsed.end()) {
            throw DatasetError("missing field \"value_millions\"", line_number);
        }
        record.value_millions = parse_truth_value(*value_it, line_number);
        if (auto it = parsed.find("aliases"); it != parsed.end()) {
            if (!it->is_array()) throw DatasetError("aliases must be an array", line_number);
            for (const auto& alias : *it) {
                if (!alias.is_string()) {
                    throw DatasetError("aliases must contain strings", line_number);
                }
                record.aliases.push_back(alias.get<std::string>());
            }
        }
        if (auto it = parsed.find("locus"); it != parsed.end() && !it->is_null()) {
            if (!it->is_string()) throw DatasetError("locus must be a string", line_number);
            try {
                record.locus = parse_fact_locus(it->get<std::string>());
            } catch (const DatasetError& e) {
                throw DatasetError(e.what(), line_number);
            }
        }

        PredictionKey key{record.company, record.time, record.keyword};
        auto [pos, inserted] = seen.emplace(key, line_number);
        if (!inserted) {
            throw DatasetError("duplicate record " +
                                   triple_name(record.company, record.time, record.keyword) +
                                   " first seen on line " + std::to_string(pos->second),
                               line_number);
        }
        records.push_back(std::move(record));
    });
    return records;
}

std::vector<GroundTruthRecord> load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_file(path, "dataset"));
}

PredictionMap load_predictions(const std::filesystem::path& path) {
    PredictionMap predictions;
    for_each_jsonl_line(read_file(path, "predictions"),
                        [&](std::string_view line, std::size_t line_number) {
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DatasetError(e.what(), line_number);
        }
        if (!parsed.is_object()) throw DatasetError("record is not a JSON object", line_number);
        PredictionKey key{require_string(parsed, "company", line_number),
                          require_string(parsed, "time", line_number),
                          require_string(parsed, "keyword", line_number)};
        auto value_it = parsed.find("value");
        if (value_it == parsed.end()) {
            throw DatasetError("missing field \"value\"", line_number);
        }
        std::optional<Decimal> value;
        if (!value_it->is_null()) {
            if (!value_it->is_string()) {
                throw DatasetError("value must be a string or null", line_number);
            }
            try {
                value = parse_money(value_it->get<std::string>());
            } catch (const MoneyParseError& e) {
                throw DatasetError(std::string("invalid value: ") + e.what(), line_number);
            }
        }
        auto [pos, inserted] = predictions.emplace(std::move(key), value);
        if (!inserted) {
            throw DatasetError("duplicate prediction " +
                                   triple_name(std::get<0>(pos->first), std::get<1>(pos->first),
                                               std::get<2>(pos->first)),
                               line_number);
        }
    });
    return predictions;
}

std::string predictions_to_jsonl(const std::vector<GroundTruthRecord>& records,
                                 const PredictionMap& predictions) {
    std::string out;
    for (const GroundTruthRecord& record : records) {
        auto it = predictions.find({record.company, record.time, record.keyword});
        if (it == predictions.end()) {
            throw EvalError("no prediction for " +
                            triple_name(record.company, record.time, record.keyword));
        }
        nlohmann::json line{
            {"company", record.company},
            {"time", record.time},
            {"keyword", record.keyword},
            {"value", it->second ? nlohmann::json(it->second->to_string()) : nlohmann::json()},
        };
        out += line.dump();
        out.push_back('\n');
    }
    return out;
}

namespace detail {

std::vector<RecordVerdict> compute_verdicts_serial(
    std::span<const GroundTruthRecord> records,
    const PredictionMap& predictions,
    std::span<const RetaLevel> levels) {
    std::vector<RecordVerdict> verdicts(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const GroundTruthRecord& record = records[i];
        auto it = predictions.find({record.company, record.time, record.keyword});
        if (it == predictions.end()) {
            throw EvalError("no prediction for " +
                            triple_name(record.company, record.time, record.keyword));
        }
        verdicts[i].record_index = i;
        verdicts[i].prediction = it->second;
        verdicts[i].correct.reserve(levels.size());
        for (const RetaLevel& level : levels) {
            verdicts[i].correct.push_back(
                reta_correct(record.value_millions, it->second, level.tolerance));
        }
    }
    return verdicts;
}

std::vector<RecordVerdict> compute_verdicts(
    std::span<const GroundTruthRecord> records,
    const PredictionMap& predictions,
    std::span<const RetaLevel> levels,
    int jobs) {
    // Resolve every prediction up front: lookups are validated serially so a
    // missing triple reports deterministically, and the parallel loop then
    // only reads through stable pointers.
    std::vector<const std::optional<Decimal>*> resolved(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const GroundTruthRecord& record = records[i];
        auto it = predictions.find({record.company, record.time, record.keyword});
        if (it == predictions.end()) {
            throw EvalError("no prediction for " +
                            triple_name(record.company, record.time, record.keyword));
        }
        resolved[i] = &it->second;
    }

    std::vector<RecordVerdict> verdicts(records.size());
    std::exception_ptr failure;
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads) if (jobs != 1)
#endif
    for (long long i = 0; i < static_cast<long long>(records.size()); ++i) {
        try {
            std::size_t index = static_cast<std::size_t>(i);
            verdicts[index].record_index = index;
            verdicts[index].prediction = *resolved[index];
            verdicts[index].correct.reserve(levels.size());
            for (const RetaLevel& level : levels) {
                verdicts[index].correct.push_back(reta_correct(
                    records[index].value_millions, *resolved[index], level.tolerance));
            }
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(afie_verdict_failure)
#endif
            {
                if (!failure) failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
    return verdicts;
}

}  // namespace detail

EvalReport evaluate_run(std::span<const GroundTruthRecord> records,
                        const PredictionMap& predictions,
                        std::span<const RetaLevel> levels,
                        bool macro_by_company,
                        int jobs) {
    if (records.empty()) throw EmptyEvalError("evaluation of an empty dataset");
    if (levels.empty()) throw EvalError("evaluation needs at least one RETA level");

    EvalReport report;
    report.levels.assign(levels.begin(), levels.end());
    report.verdicts = detail::compute_verdicts(records, predictions, levels, jobs);
    report.record_count = records.size();
    report.macro_averaged = macro_by_company;
    for (const RecordVerdict& verdict : report.verdicts) {
        if (!verdict.prediction.has_value()) ++report.absent_predictions;
    }

    if (macro_by_company) {
        std::map<std::string, std::vector<std::size_t>> by_company;
        for (std::size_t i = 0; i < records.size(); ++i) {
            by_company[records[i].company].push_back(i);
        }
        for (std::size_t level = 0; level < levels.size(); ++level) {
            Rational sum;
            for (const auto& [company, indices] : by_company) {
                std::int64_t correct = 0;
                for (std::size_t i : indices) {
                    if (report.verdicts[i].correct[level]) ++correct;
                }
                sum = sum + Rational(correct, static_cast<std::int64_t>(indices.size()));
            }
            report.accuracies.push_back(sum /
                                        Rational(static_cast<std::int64_t>(by_company.size())));
        }
    } else {
        for (std::size_t level = 0; level < levels.size(); ++level) {
            std::int64_t correct = 0;
            for (const RecordVerdict& verdict : report.verdicts) {
                if (verdict.correct[level]) ++correct;
            }
            report.accuracies.push_back(
                Rational(correct, static_cast<std::int64_t>(records.size())));
        }
    }

    Rational sum;
    for (const Rational& acc : report.accuracies) sum = sum + acc;
    report.average = sum / Rational(static_cast<std::int64_t>(report.accuracies.size()));
    return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json levels = nlohmann::json::array();
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        levels.push_back({{"level", report.levels[i].label},
                          {"accuracy", report.accuracies[i].to_decimal_string(4)}});
    }
    nlohmann::json verdicts = nlohmann::json::array();
    for (const RecordVerdict& verdict : report.verdicts) {
        nlohmann::json correct = nlohmann::json::array();
        for (bool c : verdict.correct) correct.push_back(c);
        verdicts.push_back({
            {"record_index", verdict.record_index},
            {"value",
             verdict.prediction ? nlohmann::json(verdict.prediction->to_string())
                                : nlohmann::json()},
            {"correct", std::move(correct)},
        });
    }
    return nlohmann::json{
        {"levels", std::move(levels)},
        {"average", report.average.to_decimal_string(4)},
        {"record_count", report.record_count},
        {"absent_predictions", report.absent_predictions},
        {"macro_averaged", report.macro_averaged},
        {"verdicts", std::move(verdicts)},
    };
}

std::string report_to_text(const EvalReport& report) {
    std::size_t width = std::string("Average").size();
    for (const RetaLevel& level : report.levels) {
        width = std::max(width, std::string("RETA ").size() + level.label.size());
    }
    std::ostringstream out;
    auto row = [&](const std::string& label, const Rational& value) {
        out << label << std::string(width - label.size() + 2, ' ')
            << value.to_decimal_string(4) << '\n';
    };
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        row("RETA " + report.levels[i].label, report.accuracies[i]);
    }
    row("Average", report.average);
    return out.str();
}

}  // namespace afie
