#include "afie/prompting.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "afie/errors.hpp"

namespace afie {

namespace {

struct TemplateId {
    TemplateName name;
    std::string_view id;    // CLI spelling
    std::string_view file;  // asset file name
};

constexpr std::array<TemplateId, 12> kTemplateIds{{
    {TemplateName::Question, "question", "question.txt"},
    {TemplateName::Refine, "refine", "refine.txt"},
    {TemplateName::Map, "map", "map.txt"},
    {TemplateName::Reduce, "reduce", "reduce.txt"},
    {TemplateName::ExtractSingle, "extract_single", "extract_single.txt"},
    {TemplateName::ExtractBatch, "extract_batch", "extract_batch.txt"},
    {TemplateName::PrecisionNaive, "naive", "naive.txt"},
    {TemplateName::PrecisionNaiveDirect, "naive_direct", "naive_direct.txt"},
    {TemplateName::PrecisionNaiveShot, "naive_shot", "naive_shot.txt"},
    {TemplateName::PrecisionDirectShot, "direct_shot", "direct_shot.txt"},
    {TemplateName::PrecisionNaiveShotPrecision, "naive_shot_precision",
     "naive_shot_precision.txt"},
    {TemplateName::PrecisionDirectShotPrecision, "direct_shot_precision",
     "direct_shot_precision.txt"},
}};

const TemplateId& template_entry(TemplateName name) {
    for (const auto& entry : kTemplateIds) {
        if (entry.name == name) return entry;
    }
    return kTemplateIds.front();
}

const char* kPrecisionSentence =
    "All values must be in millions and round to three decimal places using rounding rules.";

const char* kVariableExample =
    ">>>>Example:\n"
    "Financial report's segment: For the company A in 2022Q3, the revenue is $x billion; "
    "the net income is $y million.\n"
    "-----\n"
    "Keywords: Net income and revenue of company A at 2022Q3.\n"
    "-----\n"
    "Summary: For company A at 2022Q3, net income is $x million, revenue is $y million.\n";

const char* kNumericExample =
    ">>>>Example:\n"
    "Financial report's segment: For the company A in 2022Q3, the revenue is $1.2345 billion; "
    "the net income is $50.1245 million.\n"
    "-----\n"
    "Keywords: Net income and revenue of company A at 2022Q3.\n"
    "-----\n"
    "Summary: For company A at 2022Q3, net income is $50.125 million, revenue is $1,234.500 million.\n";

}  // namespace

std::string_view template_file_name(TemplateName name) {
    return template_entry(name).file;
}

std::string_view template_display_name(TemplateName name) {
    return template_entry(name).id;
}

std::optional<TemplateName> template_from_string(std::string_view name) {
    for (const auto& entry : kTemplateIds) {
        if (entry.id == name) return entry.name;
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> extract_placeholders(const std::string& body) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < body.size();) {
        if (body[i] == '{') {
            if (i + 1 < body.size() && body[i + 1] == '{') {
                i += 2;
                continue;
            }
            std::size_t close = body.find('}', i + 1);
            if (close == std::string::npos) break;
            std::string name = body.substr(i + 1, close - i - 1);
            if (std::find(names.begin(), names.end(), name) == names.end()) {
                names.push_back(name);
            }
            i = close + 1;
        } else if (body[i] == '}' && i + 1 < body.size() && body[i + 1] == '}') {
            i += 2;
        } else {
            ++i;
        }
    }
    return names;
}

}  // namespace

std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings) {
    const std::string& body = tmpl.body;
    std::string out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size();) {
        char c = body[i];
        if (c == '{') {
            if (i + 1 < body.size() && body[i + 1] == '{') {
                out.push_back('{');
                i += 2;
                continue;
            }
            std::size_t close = body.find('}', i + 1);
            if (close == std::string::npos) {
                out.push_back('{');  // stray brace at end of body, keep literal
                ++i;
                continue;
            }
            std::string name = body.substr(i + 1, close - i - 1);
            auto it = bindings.find(name);
            if (it == bindings.end()) {
                throw TemplateError(name);
            }
            out += it->second;
            i = close + 1;
            continue;
        }
        if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
            out.push_back('}');
            i += 2;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

TemplateRegistry TemplateRegistry::load(const std::filesystem::path& dir) {
    TemplateRegistry registry;
    registry.dir_ = dir;
    for (const auto& entry : kTemplateIds) {
        std::filesystem::path file = dir / entry.file;
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            throw ConfigError("missing template asset " + file.string());
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        PromptTemplate tmpl;
        tmpl.name = entry.name;
        tmpl.body = buffer.str();
        tmpl.placeholders = extract_placeholders(tmpl.body);
        registry.templates_.push_back(std::move(tmpl));
    }
    return registry;
}

const PromptTemplate& TemplateRegistry::get(TemplateName name) const {
    for (const auto& tmpl : templates_) {
        if (tmpl.name == name) return tmpl;
    }
    throw ConfigError("template registry is missing \"" +
                      std::string(template_display_name(name)) + "\"");
}

namespace {

class Checker {
public:
    Checker(const TemplateRegistry& registry, TemplateName name)
        : body_(registry.get(name).body) {
        check_.name = name;
        check_.file = std::string(template_file_name(name));
    }

    void contains(std::string_view needle) {
        if (body_.find(needle) == std::string::npos) {
            check_.failures.push_back("missing anchor: " + preview(needle));
        }
    }
    void lacks(std::string_view needle) {
        if (body_.find(needle) != std::string::npos) {
            check_.failures.push_back("unexpected content: " + preview(needle));
        }
    }
    void ends_with(std::string_view tail) {
        if (body_.size() < tail.size() || body_.compare(body_.size() - tail.size(),
                                                        tail.size(), tail) != 0) {
            check_.failures.push_back("does not end with: " + preview(tail));
        }
    }
    // Removing one occurrence of `block` must yield `expected` exactly;
    // this pins the precision variants to differ by single known edits.
    void equals_without(std::string_view block, const std::string& expected) {
        std::size_t at = body_.find(block);
        if (at == std::string::npos) {
            check_.failures.push_back("missing removable block: " + preview(block));
            return;
        }
        std::string reduced = body_;
        reduced.erase(at, block.size());
        if (reduced != expected) {
            check_.failures.push_back("does not reduce to its base variant when removing " +
                                      preview(block));
        }
    }

    TemplateCheck finish() {
        check_.ok = check_.failures.empty();
        return check_;
    }

private:
    static std::string preview(std::string_view s) {
        std::string out = "\"";
        for (char c : s.substr(0, 40)) out += c == '\n' ? ' ' : c;
        out += s.size() > 40 ? "...\"" : "\"";
        return out;
    }

    const std::string& body_;
    TemplateCheck check_;
};

}  // namespace

std::vector<TemplateCheck> verify_templates(const TemplateRegistry& registry) {
    std::vector<TemplateCheck> checks;
    const std::string sentence_line = std::string(kPrecisionSentence) + "\n";

    {
        Checker c(registry, TemplateName::Question);
        c.contains("Financial report's segment: {document_segment}");
        c.contains("Keywords: {keywords}");
        c.contains(kPrecisionSentence);
        c.contains("$50.125 million");
        c.contains("$1,234.500 million");
        c.ends_with("Summary: ");
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::Refine);
        c.contains("Old summary: {old_summary}");
        c.contains("Financial report's segment: {document_segment}");
        c.contains("Keywords: {keywords}");
        c.contains(kPrecisionSentence);
        c.ends_with("New summary:");
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::Map);
        c.contains("Financial report's segment: {document_segment}");
        c.contains("Keywords: {keywords}");
        c.contains(kPrecisionSentence);
        c.contains("$50.125 million");
        c.contains("$1,234.500 million");
        c.ends_with("Summary:");
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::Reduce);
        c.contains("Content: {text}");
        c.contains("Keywords: {keywords}");
        c.contains("please output \"None\"");
        c.contains("round to two decimal places");
        c.contains("65,135.00");
        c.contains("2.13");
        c.ends_with("Result:");
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::ExtractSingle);
        c.contains("Content: {text}");
        c.contains("Key words: {key_words}");
        c.contains("please output \"None\"");
        c.contains("round to two decimal places");
        c.contains("65,135.00");
        c.contains("2.13");
        c.ends_with("Result:");
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::ExtractBatch);
        c.contains("Content: {text}");
        c.contains("Keywords: {key_words}");
        c.contains("Output results in JSON format.");
        c.contains("{{\"Total net sales\": \"65,135.00\"");
        c.contains("please output \"None\"");
        c.ends_with("Result:");
        checks.push_back(c.finish());
    }

    const std::string naive = registry.get(TemplateName::PrecisionNaive).body;
    const std::string naive_shot = registry.get(TemplateName::PrecisionNaiveShot).body;
    const std::string naive_shot_precision =
        registry.get(TemplateName::PrecisionNaiveShotPrecision).body;

    {
        Checker c(registry, TemplateName::PrecisionNaive);
        c.contains(">>>>Your Task:");
        c.contains("Financial report's segment: {document_segment}");
        c.contains("Keywords: {keywords}");
        c.lacks(kPrecisionSentence);
        c.lacks(">>>>Example:");
        c.ends_with("Summary: ");
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::PrecisionNaiveDirect);
        c.contains(kPrecisionSentence);
        c.lacks(">>>>Example:");
        c.equals_without(sentence_line, naive);
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::PrecisionNaiveShot);
        c.lacks(kPrecisionSentence);
        c.contains("$x billion");
        c.contains("$y million");
        c.lacks("50.125");
        c.equals_without(kVariableExample, naive);
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::PrecisionDirectShot);
        c.contains(kPrecisionSentence);
        c.contains("$x billion");
        c.lacks("50.125");
        c.equals_without(sentence_line, naive_shot);
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::PrecisionNaiveShotPrecision);
        c.lacks(kPrecisionSentence);
        c.contains("$50.125 million");
        c.contains("$1,234.500 million");
        c.equals_without(kNumericExample, naive);
        checks.push_back(c.finish());
    }
    {
        Checker c(registry, TemplateName::PrecisionDirectShotPrecision);
        c.contains(kPrecisionSentence);
        c.contains("$50.125 million");
        c.contains("$1,234.500 million");
        c.equals_without(sentence_line, naive_shot_precision);
        checks.push_back(c.finish());
    }
    return checks;
}

std::string_view completion_level_name(CompletionLevel level) {
    switch (level) {
        case CompletionLevel::A: return "A";
        case CompletionLevel::A_C: return "A_C";
        case CompletionLevel::A_T: return "A_T";
        case CompletionLevel::A_T_C: return "A_T_C";
    }
    return "A";
}

std::optional<CompletionLevel> completion_level_from_string(std::string_view name) {
    if (name == "A") return CompletionLevel::A;
    if (name == "A_C") return CompletionLevel::A_C;
    if (name == "A_T") return CompletionLevel::A_T;
    if (name == "A_T_C") return CompletionLevel::A_T_C;
    return std::nullopt;
}

std::string complete_keyword(const Keyword& keyword) {
    auto require = [&](const std::optional<std::string>& field,
                       const char* what) -> const std::string& {
        if (!field || field->empty()) {
            throw IncompleteKeywordError(
                std::string("completion level ") +
                std::string(completion_level_name(keyword.completion_level)) +
                " requires a " + what);
        }
        return *field;
    };
    switch (keyword.completion_level) {
        case CompletionLevel::A:
            return keyword.attribute;
        case CompletionLevel::A_C:
            return keyword.attribute + " of " + require(keyword.company, "company");
        case CompletionLevel::A_T:
            return keyword.attribute + " of " + require(keyword.time, "time");
        case CompletionLevel::A_T_C:
            return keyword.attribute + " of " + require(keyword.company, "company") + " " +
                   require(keyword.time, "time");
    }
    throw IncompleteKeywordError("unknown completion level");
}

}  // namespace afie
