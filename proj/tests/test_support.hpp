#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "afie/document.hpp"
#include "afie/embedding.hpp"
#include "afie/evaluation.hpp"
#include "afie/money.hpp"
#include "afie/paths.hpp"
#include "afie/prompting.hpp"
#include "afie/token_counter.hpp"

namespace testsupport {

// Counts whitespace-separated words. Token arithmetic in tests is much
// easier to reason about in words than in the byte-based default counter.
class WordCounter final : public afie::TokenCounter {
public:
    std::size_t count(std::string_view text) const override {
        std::size_t words = 0;
        bool in_word = false;
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                in_word = false;
            } else if (!in_word) {
                ++words;
                in_word = true;
            }
        }
        return words;
    }
};

inline std::string words_text(std::size_t n, const std::string& stem = "w") {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) out.push_back(' ');
        out += stem;
        out += std::to_string(i);
    }
    return out;
}

inline std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) words.push_back(std::move(current)), current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

inline const afie::TemplateRegistry& default_registry() {
    static const afie::TemplateRegistry registry = afie::TemplateRegistry::load(AFIE_TEMPLATE_DIR);
    return registry;
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
    std::filesystem::path dir = std::filesystem::temp_directory_path() /
                                ("afie_tests_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Embedder returning vectors with a scripted cosine against one designated
// keyword string: cos(keyword, text) == plan[text] (0 when unlisted).
class PlannedEmbedder final : public afie::EmbeddingProvider {
public:
    PlannedEmbedder(std::string keyword, std::map<std::string, double> plan,
                    std::size_t max_tokens = 384)
        : keyword_(std::move(keyword)), plan_(std::move(plan)), max_tokens_(max_tokens) {}

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) const override {
        std::vector<std::vector<float>> out;
        out.reserve(texts.size());
        for (const std::string& text : texts) {
            if (text == keyword_) {
                out.push_back({1.0f, 0.0f});
                continue;
            }
            double s = 0.0;
            if (auto it = plan_.find(text); it != plan_.end()) s = it->second;
            out.push_back({static_cast<float>(s),
                           static_cast<float>(std::sqrt(std::max(0.0, 1.0 - s * s)))});
        }
        return out;
    }

    std::size_t max_input_tokens() const override { return max_tokens_; }
    bool concurrency_safe() const override { return true; }

private:
    std::string keyword_;
    std::map<std::string, double> plan_;
    std::size_t max_tokens_;
};

class ThrowingEmbedder final : public afie::EmbeddingProvider {
public:
    std::vector<std::vector<float>> embed(const std::vector<std::string>&) const override {
        throw std::runtime_error("embedder deliberately unavailable");
    }
    std::size_t max_input_tokens() const override { return 384; }
    bool concurrency_safe() const override { return true; }
};

// Small mixed document. For the keyword "Revenue of ACME 2022Q4" the mock
// backend resolves the planted fact to the value "5.00"; for
// "Net Income of ACME 2022Q4" it resolves to "1.20".
inline afie::Document fixture_document() {
    afie::Document doc;
    doc.id = "acme-2022q4";
    doc.company = "ACME";
    doc.period = "2022Q4";
    doc.report_type = afie::ReportType::TenQ;

    auto para = [&](std::string text) {
        afie::Element element;
        element.element_id = static_cast<int>(doc.elements.size());
        element.content = afie::Paragraph{std::move(text)};
        doc.elements.push_back(std::move(element));
    };
    para("ACME Corporation published its results for 2022Q4.");
    para("Net Income of ACME for 2022Q4 was $1.200 million, up from $1.100 million in 2022Q3.");
    para("Revenue of ACME for 2022Q4 was $5.000 million.");

    afie::Element table;
    table.element_id = static_cast<int>(doc.elements.size());
    table.content = afie::Table{{{"Metric", "2022Q4", "2022Q3"},
                                 {"Cash", "2,500", "2,400"},
                                 {"Shares outstanding", "1,000", "1,000"}}};
    doc.elements.push_back(std::move(table));
    para("Operating costs were $2.000 million for the quarter.");
    return doc;
}

struct PlantedCorpus {
    std::vector<afie::Document> docs;
    std::vector<afie::GroundTruthRecord> records;  // one per document
};

inline const std::vector<std::string>& planted_attributes() {
    static const std::vector<std::string> kAttributes = {
        "Revenue", "Net Income", "Total Assets", "Gross Profit", "Operating Expenses"};
    return kAttributes;
}

inline std::string letter_suffix(std::size_t n) {
    std::string s;
    do {
        s.push_back(static_cast<char>('a' + n % 26));
        n /= 26;
    } while (n > 0);
    return s;
}

// Filler vocabulary for bulky documents, screened so no filler word hashes
// into a bucket used by any keyword token of the corpus. Filler-only
// slices then score exactly zero against every corpus keyword, so the
// fact-bearing segment always survives retrieval.
inline std::vector<std::string> filler_words(std::size_t need, std::size_t dim) {
    std::set<std::uint64_t> forbidden;
    auto forbid = [&](std::string token) {
        for (char& c : token) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        forbidden.insert(afie::HashingEmbedder::fnv1a(token) % dim);
    };
    forbid("of");
    for (const std::string& attribute : planted_attributes()) {
        for (const std::string& word : split_words(attribute)) forbid(word);
    }
    for (int i = 0; i < 100; ++i) {
        char name[8];
        std::snprintf(name, sizeof name, "corp%02d", i);
        forbid(name);
    }
    for (int q = 1; q <= 4; ++q) forbid("2022q" + std::to_string(q));

    std::vector<std::string> words;
    for (std::size_t n = 0; words.size() < need; ++n) {
        std::string word = "fill" + letter_suffix(n);
        if (forbidden.count(afie::HashingEmbedder::fnv1a(word) % dim) == 0) {
            words.push_back(std::move(word));
        }
    }
    return words;
}

// Deterministic corpus with one planted KPI fact per document. Facts live
// in a paragraph, a table row, or both; each document carries decoy lines
// sharing the company and period but never the attribute. Every fifth
// document (when include_bulky) is padded with filler paragraphs so it
// spans several segments and retrieval has real work to do.
inline PlantedCorpus make_planted_corpus(std::size_t count, bool include_bulky = true) {
    PlantedCorpus corpus;
    const auto& attributes = planted_attributes();
    const std::vector<std::string> fillers = filler_words(16, 256);

    for (std::size_t i = 0; i < count; ++i) {
        char name[8];
        std::snprintf(name, sizeof name, "corp%02zu", i % 100);
        const std::string company = name;
        const std::string time = "2022Q" + std::to_string(i % 4 + 1);
        const std::string& attribute = attributes[i % attributes.size()];
        const std::string& decoy = attributes[(i + 2) % attributes.size()];
        const std::string& decoy2 = attributes[(i + 1) % attributes.size()];

        const afie::Decimal value(10007 + 13 * static_cast<std::int64_t>(i), 1);
        const afie::Decimal decoy_value = value + afie::Decimal(11111, 1);
        const std::string rendered = value.to_string(2);
        const std::string decoy_rendered = decoy_value.to_string(2);

        afie::Document doc;
        doc.id = company + "-" + time;
        doc.company = company;
        doc.period = time;
        doc.report_type = i % 2 == 0 ? afie::ReportType::TenQ : afie::ReportType::TenK;

        auto para = [&](std::string text) {
            afie::Element element;
            element.element_id = static_cast<int>(doc.elements.size());
            element.content = afie::Paragraph{std::move(text)};
            doc.elements.push_back(std::move(element));
        };

        const int locus = static_cast<int>(i % 3);  // 0 table, 1 text, 2 both
        para(company + " filed its report for " + time + ".");
        if (locus != 0) {
            para(attribute + " of " + company + " for " + time + " was $" + rendered +
                 " million.");
        }
        para(decoy + " of " + company + " for " + time + " was $" + decoy_rendered +
             " million.");

        afie::Element table;
        table.element_id = static_cast<int>(doc.elements.size());
        if (locus == 1) {
            table.content = afie::Table{
                {{"Item", "Amount"}, {"Cash", "2,500"}, {"Inventory", "840"}}};
        } else {
            table.content = afie::Table{{{"Item", "Company", "Period", "Amount"},
                                         {attribute, company, time, rendered},
                                         {decoy2, company, time, decoy_rendered}}};
        }
        doc.elements.push_back(std::move(table));
        para("Management discussed liquidity and seasonal trends.");

        if (include_bulky && i % 5 == 4) {
            for (const std::string& word : fillers) {
                std::string text = word;
                while (text.size() < 2200) {
                    text.push_back(' ');
                    text += word;
                }
                para(std::move(text));
            }
        }

        corpus.docs.push_back(std::move(doc));

        afie::GroundTruthRecord record;
        record.company = company;
        record.time = time;
        record.keyword = attribute;
        record.value_millions = value;
        if (locus == 0) record.locus = afie::FactLocus::TableOnly;
        if (locus == 2) record.locus = afie::FactLocus::TextAndTable;
        if (i % 7 == 0) record.aliases = {"Adjusted " + attribute};
        corpus.records.push_back(std::move(record));
    }
    return corpus;
}

inline std::string dataset_jsonl(const std::vector<afie::GroundTruthRecord>& records) {
    std::string out;
    for (const afie::GroundTruthRecord& record : records) {
        nlohmann::json line = {
            {"company", record.company},
            {"time", record.time},
            {"keyword", record.keyword},
            {"value_millions", record.value_millions.to_string(2, false)},
        };
        if (record.locus) line["locus"] = afie::fact_locus_name(*record.locus);
        if (!record.aliases.empty()) line["aliases"] = record.aliases;
        out += line.dump();
        out.push_back('\n');
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline void write_corpus_files(const PlantedCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const afie::Document& doc : corpus.docs) {
        write_file(dir / (doc.id + ".json"), afie::document_to_json(doc));
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testsupport
