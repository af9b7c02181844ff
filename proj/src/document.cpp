#include "afie/document.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "afie/errors.hpp"

namespace afie {

using nlohmann::json;

std::string_view report_type_name(ReportType type) {
    switch (type) {
        case ReportType::TenK: return "10-K";
        case ReportType::TenQ: return "10-Q";
        case ReportType::Other: break;
    }
    return "other";
}

ReportType parse_report_type(std::string_view name) {
    if (name == "10-K") return ReportType::TenK;
    if (name == "10-Q") return ReportType::TenQ;
    if (name == "other") return ReportType::Other;
    throw ParseError("unknown report_type \"" + std::string(name) + "\"", 0);
}

namespace {

const json& require_field(const json& obj, const char* key, const char* where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(std::string(where) + ": missing field \"" + key + "\"", 0);
    }
    return *it;
}

std::string require_string(const json& obj, const char* key, const char* where) {
    const json& value = require_field(obj, key, where);
    if (!value.is_string()) {
        throw ParseError(std::string(where) + ": field \"" + key + "\" must be a string", 0);
    }
    return value.get<std::string>();
}

Element parse_element(const json& value, int element_id) {
    const std::string where = "elements[" + std::to_string(element_id) + "]";
    if (!value.is_object()) {
        throw ParseError(where + ": element must be an object", 0);
    }
    const std::string type = require_string(value, "type", where.c_str());
    Element element;
    element.element_id = element_id;
    if (type == "paragraph") {
        std::string text = require_string(value, "text", where.c_str());
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
            throw ParseError(where + ": paragraph text must be nonempty", 0);
        }
        element.content = Paragraph{std::move(text)};
        return element;
    }
    if (type == "table") {
        const json& rows = require_field(value, "rows", where.c_str());
        if (!rows.is_array() || rows.empty()) {
            throw ParseError(where + ": \"rows\" must be a nonempty array", 0);
        }
        Table table;
        for (const json& row : rows) {
            if (!row.is_array() || row.empty()) {
                throw ParseError(where + ": each row must be a nonempty array", 0);
            }
            std::vector<std::string> cells;
            for (const json& cell : row) {
                if (!cell.is_string()) {
                    throw ParseError(where + ": table cells must be strings", 0);
                }
                cells.push_back(cell.get<std::string>());
            }
            table.rows.push_back(std::move(cells));
        }
        element.content = std::move(table);
        return element;
    }
    throw ParseError(where + ": unknown element type \"" + type + "\"", 0);
}

}  // namespace

Document parse_document(std::string_view input, DocumentFormat format) {
    (void)format;  // single format today; the enum keeps the call sites honest
    json root;
    try {
        root = json::parse(input);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    if (!root.is_object()) {
        throw ParseError("document root must be a JSON object", 0);
    }

    Document doc;
    doc.id = require_string(root, "id", "document");
    doc.company = require_string(root, "company", "document");
    doc.period = require_string(root, "period", "document");
    doc.report_type = parse_report_type(require_string(root, "report_type", "document"));
    if (doc.id.empty()) throw ParseError("document: \"id\" must be nonempty", 0);
    if (doc.period.empty()) throw ParseError("document: \"period\" must be nonempty", 0);

    const json& elements = require_field(root, "elements", "document");
    if (!elements.is_array()) {
        throw ParseError("document: \"elements\" must be an array", 0);
    }
    if (elements.empty()) {
        throw EmptyDocumentError("document \"" + doc.id + "\" has no elements");
    }
    int next_id = 0;
    for (const json& value : elements) {
        doc.elements.push_back(parse_element(value, next_id++));
    }
    return doc;
}

Document load_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open document file " + path.string(), 0);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_document(buffer.str());
}

std::string document_to_json(const Document& doc) {
    json elements = json::array();
    for (const Element& element : doc.elements) {
        if (element.is_paragraph()) {
            elements.push_back({{"type", "paragraph"}, {"text", element.paragraph().text}});
        } else {
            elements.push_back({{"type", "table"}, {"rows", element.table().rows}});
        }
    }
    json root = {
        {"id", doc.id},
        {"company", doc.company},
        {"period", doc.period},
        {"report_type", std::string(report_type_name(doc.report_type))},
        {"elements", std::move(elements)},
    };
    return root.dump(2);
}

}  // namespace afie
