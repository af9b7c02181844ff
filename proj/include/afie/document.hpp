#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace afie {

enum class ReportType { TenK, TenQ, Other };

std::string_view report_type_name(ReportType type);            // "10-K" | "10-Q" | "other"
ReportType parse_report_type(std::string_view name);

struct Paragraph {
    std::string text;

    bool operator==(const Paragraph&) const = default;
};

// Flat grid of cell strings. Rows may be ragged: real filings contain
// merged and indented cells, so row lengths are kept verbatim.
struct Table {
    std::vector<std::vector<std::string>> rows;

    bool operator==(const Table&) const = default;
};

struct Element {
    int element_id = 0;
    std::variant<Paragraph, Table> content;

    bool is_paragraph() const { return std::holds_alternative<Paragraph>(content); }
    bool is_table() const { return std::holds_alternative<Table>(content); }
    const Paragraph& paragraph() const { return std::get<Paragraph>(content); }
    const Table& table() const { return std::get<Table>(content); }

    bool operator==(const Element&) const = default;
};

// Ordered mix of paragraph and table elements plus report metadata.
// Periods are opaque labels ("2022Q3", "FY2022", free-form phrases),
// never parsed as dates. Immutable by convention after construction.
struct Document {
    std::string id;
    std::string company;
    std::string period;
    ReportType report_type = ReportType::Other;
    std::vector<Element> elements;

    bool operator==(const Document&) const = default;
};

enum class DocumentFormat { JsonElements };

// Parses the JSON document schema:
//   {"id": str, "company": str, "period": str,
//    "report_type": "10-K"|"10-Q"|"other",
//    "elements": [{"type":"paragraph","text":str} |
//                 {"type":"table","rows":[[str,...],...]}]}
// Element ids are assigned 0..n-1 in file order.
// Throws ParseError (with byte offset) on malformed input and
// EmptyDocumentError when the elements list is empty.
Document parse_document(std::string_view input,
                        DocumentFormat format = DocumentFormat::JsonElements);

Document load_document(const std::filesystem::path& path);

// Inverse of parse_document: parse(serialize(doc)) == doc.
std::string document_to_json(const Document& doc);

}  // namespace afie
