#include "afie/html_ingest.hpp"

#include <cctype>
#include <string>

namespace afie {

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(lower(c));
    return out;
}

struct TagInfo {
    std::string name;       // lowercased, empty when the "<" was not a tag
    bool closing = false;
    std::size_t end = 0;    // index just past the ">"
};

// Parses the tag starting at html[pos] (which is "<"). Tolerant: a "<"
// that never closes is treated as literal text reaching the end.
TagInfo parse_tag(std::string_view html, std::size_t pos) {
    TagInfo tag;
    std::size_t i = pos + 1;
    if (i < html.size() && html[i] == '!') {
        // Comment or doctype: skip to "-->" for comments, ">" otherwise.
        if (html.compare(i, 3, "!--") == 0) {
            std::size_t close = html.find("-->", i);
            tag.end = close == std::string_view::npos ? html.size() : close + 3;
        } else {
            std::size_t close = html.find('>', i);
            tag.end = close == std::string_view::npos ? html.size() : close + 1;
        }
        return tag;
    }
    if (i < html.size() && html[i] == '/') {
        tag.closing = true;
        ++i;
    }
    std::size_t name_begin = i;
    while (i < html.size() && std::isalnum(static_cast<unsigned char>(html[i]))) ++i;
    if (i == name_begin) {
        tag.end = pos + 1;  // lone "<", keep as text
        return tag;
    }
    tag.name = to_lower(html.substr(name_begin, i - name_begin));
    std::size_t close = html.find('>', i);
    tag.end = close == std::string_view::npos ? html.size() : close + 1;
    return tag;
}

void append_codepoint(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] != '&') {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t semi = text.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(text[i++]);
            continue;
        }
        std::string_view name = text.substr(i + 1, semi - i - 1);
        if (name == "amp") out.push_back('&');
        else if (name == "lt") out.push_back('<');
        else if (name == "gt") out.push_back('>');
        else if (name == "quot") out.push_back('"');
        else if (name == "apos" || name == "#39") out.push_back('\'');
        else if (name == "nbsp") out.push_back(' ');
        else if (!name.empty() && name[0] == '#') {
            unsigned long cp = 0;
            bool ok = name.size() > 1;
            for (std::size_t j = 1; j < name.size(); ++j) {
                if (!std::isdigit(static_cast<unsigned char>(name[j]))) { ok = false; break; }
                cp = cp * 10 + static_cast<unsigned long>(name[j] - '0');
            }
            if (ok && cp > 0 && cp <= 0x10FFFF) append_codepoint(out, cp);
        } else {
            out.append(text.substr(i, semi - i + 1));
        }
        i = semi + 1;
    }
    return out;
}

// Removes every tag and squeezes whitespace runs to single spaces.
std::string flatten_text(std::string_view raw) {
    std::string stripped;
    stripped.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
        if (raw[i] == '<') {
            TagInfo tag = parse_tag(raw, i);
            if (tag.end > i + 1 || !tag.name.empty()) {
                stripped.push_back(' ');
                i = tag.end;
                continue;
            }
        }
        stripped.push_back(raw[i++]);
    }
    std::string decoded = decode_entities(stripped);
    std::string out;
    bool in_space = true;
    for (char c : decoded) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(c);
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

// Parses one full <table> block (html[pos] at the opening tag) into rows.
// Only markup at the outer table's own level is structural; nested tables
// are flattened into the enclosing cell's text.
std::size_t parse_table_block(std::string_view html, std::size_t pos, Table& table) {
    TagInfo open = parse_tag(html, pos);
    std::size_t i = open.end;
    int depth = 1;
    bool in_row = false;
    bool in_cell = false;
    std::vector<std::string> row;
    std::string cell;

    auto close_cell = [&] {
        if (in_cell) {
            row.push_back(flatten_text(cell));
            cell.clear();
            in_cell = false;
        }
    };
    auto close_row = [&] {
        close_cell();
        if (in_row && !row.empty()) table.rows.push_back(row);
        row.clear();
        in_row = false;
    };

    while (i < html.size()) {
        if (html[i] != '<') {
            if (in_cell) cell.push_back(html[i]);
            ++i;
            continue;
        }
        TagInfo tag = parse_tag(html, i);
        if (tag.name == "table") {
            if (!tag.closing) {
                ++depth;
            } else if (--depth == 0) {
                close_row();
                return tag.end;
            }
            if (in_cell) cell.append(html.substr(i, tag.end - i));
            i = tag.end;
            continue;
        }
        if (depth == 1 && (tag.name == "tr" || tag.name == "td" || tag.name == "th")) {
            if (tag.name == "tr") {
                if (tag.closing) close_row();
                else { close_row(); in_row = true; }
            } else if (!tag.closing) {
                close_cell();
                if (!in_row) in_row = true;  // cells imply a row even without <tr>
                in_cell = true;
            } else {
                close_cell();
            }
            i = tag.end;
            continue;
        }
        // Anything else (formatting tags, nested-table internals) belongs
        // to the current cell's text.
        if (in_cell) cell.append(html.substr(i, tag.end - i));
        i = tag.end == i ? i + 1 : tag.end;
    }
    close_row();  // unclosed table: keep what we saw
    return html.size();
}

bool is_block_boundary(const std::string& name) {
    return name == "p" || name == "div" || name == "br" || name == "li" ||
           name == "h1" || name == "h2" || name == "h3" || name == "h4" ||
           name == "h5" || name == "h6" || name == "section" || name == "article";
}

}  // namespace

std::vector<Element> extract_tables_from_html(std::string_view html) {
    std::vector<Element> elements;
    std::string pending;  // raw inter-table text, block tags become "\n\n"

    auto flush_paragraphs = [&] {
        std::string text = pending;
        pending.clear();
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t brk = text.find("\n\n", start);
            std::string_view chunk(text.data() + start,
                                   (brk == std::string::npos ? text.size() : brk) - start);
            std::string para = flatten_text(chunk);
            if (!para.empty()) {
                elements.push_back(Element{0, Paragraph{std::move(para)}});
            }
            if (brk == std::string::npos) break;
            start = brk + 2;
        }
    };

    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            pending.push_back(html[i++]);
            continue;
        }
        TagInfo tag = parse_tag(html, i);
        if (tag.name == "table" && !tag.closing) {
            flush_paragraphs();
            Table table;
            i = parse_table_block(html, i, table);
            if (!table.rows.empty()) {
                elements.push_back(Element{0, std::move(table)});
            }
            continue;
        }
        if (tag.name == "script" || tag.name == "style") {
            std::string close = "</" + tag.name;
            std::size_t stop = html.size();
            for (std::size_t j = tag.end; j + close.size() <= html.size(); ++j) {
                if (to_lower(html.substr(j, close.size())) == close) {
                    std::size_t gt = html.find('>', j);
                    stop = gt == std::string_view::npos ? html.size() : gt + 1;
                    break;
                }
            }
            i = stop;
            continue;
        }
        if (is_block_boundary(tag.name)) {
            pending.append("\n\n");
        } else if (tag.name.empty() && tag.end == i + 1) {
            pending.push_back('<');  // literal "<" in text
            ++i;
            continue;
        }
        i = tag.end;
    }
    flush_paragraphs();

    for (std::size_t id = 0; id < elements.size(); ++id) {
        elements[id].element_id = static_cast<int>(id);
    }
    return elements;
}

}  // namespace afie
