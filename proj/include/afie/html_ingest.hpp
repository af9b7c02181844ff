#pragma once

#include <string_view>
#include <vector>

#include "afie/document.hpp"

namespace afie {

// Best-effort extraction of filing-style HTML into document elements:
// one Table element per <table> tag, inter-table text as Paragraph
// elements, document order preserved. Nested tables are flattened into
// the enclosing cell's text. Tolerant of unclosed tags; never fails on
// valid UTF-8.
std::vector<Element> extract_tables_from_html(std::string_view html);

}  // namespace afie
