#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace afie {

// The registry's template set: the summarization pair (Question/Refine),
// the Map-Reduce pair, the two extraction prompts, and the six
// numerical-precision prompt variants.
enum class TemplateName {
    Question,
    Refine,
    Map,
    Reduce,
    ExtractSingle,
    ExtractBatch,
    PrecisionNaive,
    PrecisionNaiveDirect,
    PrecisionNaiveShot,
    PrecisionDirectShot,
    PrecisionNaiveShotPrecision,
    PrecisionDirectShotPrecision,
};

std::string_view template_file_name(TemplateName name);  // e.g. "question.txt"
std::string_view template_display_name(TemplateName name);
std::optional<TemplateName> template_from_string(std::string_view name);

struct PromptTemplate {
    TemplateName name = TemplateName::Question;
    std::string body;                        // verbatim asset bytes
    std::vector<std::string> placeholders;   // names referenced by the body
};

// Substitutes {placeholder} occurrences with their bindings. "{{" and "}}"
// are escapes for literal braces. Supplying extra bindings is fine; a
// referenced placeholder without a binding throws TemplateError.
std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings);

// Templates live as versioned text assets so their bytes can be verified
// independently of the code.
class TemplateRegistry {
public:
    static TemplateRegistry load(const std::filesystem::path& dir);

    const PromptTemplate& get(TemplateName name) const;
    const std::vector<PromptTemplate>& all() const { return templates_; }
    const std::filesystem::path& directory() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<PromptTemplate> templates_;
};

struct TemplateCheck {
    TemplateName name;
    std::string file;
    bool ok = false;
    std::vector<std::string> failures;
};

// Verifies every template contains its anchor strings (e.g. the Refine
// prompt's "Old summary:" line, the worked precision examples "50.125" and
// "1,234.500") and that the six precision variants differ exactly along
// the Direct / Shot / Shot-Precision axes.
std::vector<TemplateCheck> verify_templates(const TemplateRegistry& registry);

enum class CompletionLevel { A, A_C, A_T, A_T_C };

std::string_view completion_level_name(CompletionLevel level);
std::optional<CompletionLevel> completion_level_from_string(std::string_view name);

// A user keyword: the attribute, optionally completed with company and
// time context from document metadata.
struct Keyword {
    std::string attribute;
    std::optional<std::string> company;
    std::optional<std::string> time;
    CompletionLevel completion_level = CompletionLevel::A;

    bool operator==(const Keyword&) const = default;
};

// Renders the keyword at its completion level:
//   A      -> "{attribute}"
//   A_C    -> "{attribute} of {company}"
//   A_T    -> "{attribute} of {time}"
//   A_T_C  -> "{attribute} of {company} {time}"
// Throws IncompleteKeywordError when a required field is missing.
std::string complete_keyword(const Keyword& keyword);

}  // namespace afie
