#pragma once

#include <string>
#include <string_view>

#include "afie/document.hpp"

namespace afie {

enum class SerializationFormat { Plain, Csv, Xml, Html };

std::string_view format_name(SerializationFormat format);       // "plain" | "csv" | "xml" | "html"
SerializationFormat parse_format(std::string_view name);

// Renders a table as text:
//   Plain - cells joined by single spaces, rows by newlines; internal
//           cell newlines collapse to spaces so the row separator stays
//           unambiguous. Cells are not quoted (lossy on purpose).
//   Csv   - comma-separated with RFC-style quoting of cells containing
//           comma, quote or newline.
//   Xml   - <table><row><cell>...</cell>...</row>...</table>, escaped.
//   Html  - <table><tr><td>...</td>...</tr>...</table>, escaped.
std::string serialize_table(const Table& table, SerializationFormat format);

// Paragraphs pass through unchanged; tables go through serialize_table.
std::string serialize_element(const Element& element, SerializationFormat format);

}  // namespace afie
