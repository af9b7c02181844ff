#include "afie/serialization.hpp"

#include <cctype>

#include "afie/errors.hpp"

namespace afie {

std::string_view format_name(SerializationFormat format) {
    switch (format) {
        case SerializationFormat::Plain: return "plain";
        case SerializationFormat::Csv: return "csv";
        case SerializationFormat::Xml: return "xml";
        case SerializationFormat::Html: return "html";
    }
    return "plain";
}

SerializationFormat parse_format(std::string_view name) {
    std::string lowered;
    lowered.reserve(name.size());
    for (char c : name) {
        lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (lowered == "plain") return SerializationFormat::Plain;
    if (lowered == "csv") return SerializationFormat::Csv;
    if (lowered == "xml") return SerializationFormat::Xml;
    if (lowered == "html") return SerializationFormat::Html;
    throw ConfigError("unknown serialization format \"" + std::string(name) + "\"");
}

namespace {

// Newlines inside a plain cell would collide with the row separator.
void append_plain_cell(std::string& out, const std::string& cell) {
    for (char c : cell) {
        out.push_back(c == '\n' || c == '\r' ? ' ' : c);
    }
}

void append_csv_cell(std::string& out, const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) {
        out += cell;
        return;
    }
    out.push_back('"');
    for (char c : cell) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

void append_xml_escaped(std::string& out, const std::string& cell) {
    for (char c : cell) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
}

std::string serialize_tagged(const Table& table, const char* table_tag,
                             const char* row_tag, const char* cell_tag) {
    std::string out;
    out += "<";
    out += table_tag;
    out += ">";
    for (const auto& row : table.rows) {
        out += "<";
        out += row_tag;
        out += ">";
        for (const auto& cell : row) {
            out += "<";
            out += cell_tag;
            out += ">";
            append_xml_escaped(out, cell);
            out += "</";
            out += cell_tag;
            out += ">";
        }
        out += "</";
        out += row_tag;
        out += ">";
    }
    out += "</";
    out += table_tag;
    out += ">";
    return out;
}

}  // namespace

std::string serialize_table(const Table& table, SerializationFormat format) {
    switch (format) {
        case SerializationFormat::Plain: {
            std::string out;
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                if (r > 0) out.push_back('\n');
                const auto& row = table.rows[r];
                for (std::size_t c = 0; c < row.size(); ++c) {
                    if (c > 0) out.push_back(' ');
                    append_plain_cell(out, row[c]);
                }
            }
            return out;
        }
        case SerializationFormat::Csv: {
            std::string out;
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                if (r > 0) out.push_back('\n');
                const auto& row = table.rows[r];
                for (std::size_t c = 0; c < row.size(); ++c) {
                    if (c > 0) out.push_back(',');
                    append_csv_cell(out, row[c]);
                }
            }
            return out;
        }
        case SerializationFormat::Xml:
            return serialize_tagged(table, "table", "row", "cell");
        case SerializationFormat::Html:
            return serialize_tagged(table, "table", "tr", "td");
    }
    return "";
}

std::string serialize_element(const Element& element, SerializationFormat format) {
    if (element.is_paragraph()) {
        return element.paragraph().text;
    }
    return serialize_table(element.table(), format);
}

}  // namespace afie
