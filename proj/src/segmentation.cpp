#include "afie/segmentation.hpp"

#include <cctype>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "afie/errors.hpp"

namespace afie {

namespace {

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) words.emplace_back(text.substr(start, i - start));
    }
    return words;
}

std::string join_range(const std::vector<std::string>& parts, std::size_t begin,
                       std::size_t end, char sep) {
    std::string out;
    std::size_t total = 0;
    for (std::size_t i = begin; i < end; ++i) total += parts[i].size() + 1;
    out.reserve(total);
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out.push_back(sep);
        out += parts[i];
    }
    return out;
}

// Character-granularity fallback for a single word that exceeds the limit
// on its own. Cuts respect UTF-8 sequence boundaries.
void split_oversized_word(const std::string& word, std::size_t limit,
                          const TokenCounter& counter, std::vector<std::string>& out) {
    std::string_view rest = word;
    while (!rest.empty()) {
        std::size_t lo = 0;
        std::size_t hi = rest.size();
        while (lo < hi) {
            std::size_t mid = lo + (hi - lo + 1) / 2;
            if (counter.count(rest.substr(0, mid)) <= limit) lo = mid;
            else hi = mid - 1;
        }
        if (lo == 0) lo = 1;  // pathological counter; always make progress
        while (lo < rest.size() && lo > 1 &&
               (static_cast<unsigned char>(rest[lo]) & 0xC0) == 0x80) {
            --lo;
        }
        out.emplace_back(rest.substr(0, lo));
        rest.remove_prefix(lo);
    }
}

}  // namespace

std::vector<std::string> split_paragraph(std::string_view text, std::size_t limit,
                                         const TokenCounter& counter) {
    if (counter.count(text) <= limit) {
        return {std::string(text)};
    }
    std::vector<std::string> words = split_words(text);
    if (words.empty()) {
        return {std::string(text)};
    }
    auto fits = [&](std::size_t begin, std::size_t end) {
        return counter.count(join_range(words, begin, end, ' ')) <= limit;
    };
    std::vector<std::string> pieces;
    for (auto [begin, end] : detail::greedy_pack(words.size(), fits)) {
        std::string piece = join_range(words, begin, end, ' ');
        if (end - begin == 1 && counter.count(piece) > limit) {
            split_oversized_word(piece, limit, counter, pieces);
        } else {
            pieces.push_back(std::move(piece));
        }
    }
    return pieces;
}

std::vector<Table> split_table(const Table& table, std::size_t limit,
                               SerializationFormat format, const TokenCounter& counter,
                               std::vector<std::string>* warnings) {
    auto warn_if_over = [&](const Table& t) {
        if (warnings && counter.count(serialize_table(t, format)) > limit) {
            warnings->push_back("table piece of " + std::to_string(t.rows.size()) +
                                " row(s) exceeds the element limit of " +
                                std::to_string(limit) + " tokens");
        }
    };
    if (counter.count(serialize_table(table, format)) <= limit) {
        return {table};
    }
    if (table.rows.size() < 2) {
        warn_if_over(table);
        return {table};
    }
    const auto& header = table.rows.front();
    auto fits = [&](std::size_t begin, std::size_t end) {
        Table piece;
        piece.rows.push_back(header);
        piece.rows.insert(piece.rows.end(), table.rows.begin() + 1 + begin,
                          table.rows.begin() + 1 + end);
        return counter.count(serialize_table(piece, format)) <= limit;
    };
    std::vector<Table> pieces;
    for (auto [begin, end] : detail::greedy_pack(table.rows.size() - 1, fits)) {
        Table piece;
        piece.rows.push_back(header);
        piece.rows.insert(piece.rows.end(), table.rows.begin() + 1 + begin,
                          table.rows.begin() + 1 + end);
        warn_if_over(piece);
        pieces.push_back(std::move(piece));
    }
    return pieces;
}

std::vector<Segment> merge_elements(
    const std::vector<std::pair<int, std::string>>& serialized_elements,
    std::size_t segment_limit, const TokenCounter& counter) {
    std::vector<std::string> texts;
    texts.reserve(serialized_elements.size());
    for (const auto& [id, text] : serialized_elements) texts.push_back(text);

    auto fits = [&](std::size_t begin, std::size_t end) {
        return counter.count(join_range(texts, begin, end, '\n')) <= segment_limit;
    };
    std::vector<Segment> segments;
    for (auto [begin, end] : detail::greedy_pack(texts.size(), fits)) {
        Segment segment;
        segment.text = join_range(texts, begin, end, '\n');
        segment.token_count = counter.count(segment.text);
        for (std::size_t i = begin; i < end; ++i) {
            segment.source_element_ids.push_back(serialized_elements[i].first);
        }
        segment.segment_index = static_cast<int>(segments.size());
        segments.push_back(std::move(segment));
    }
    return segments;
}

std::vector<Segment> segment_document(const Document& doc, const SegmentationConfig& config,
                                      std::vector<std::string>* warnings) {
    if (config.counter == nullptr) {
        throw ConfigError("SegmentationConfig.counter must be set");
    }
    if (config.element_limit == 0 || config.element_limit > config.segment_limit) {
        throw ConfigError("require 0 < element_limit <= segment_limit");
    }
    if (doc.elements.empty()) {
        throw EmptyDocumentError("document \"" + doc.id + "\" has no elements");
    }
    const TokenCounter& counter = *config.counter;

    // Split stage: overlength elements are replaced by their pieces and the
    // whole sequence is renumbered, so segment source ids refer to the
    // post-split order.
    std::vector<std::pair<int, std::string>> serialized;
    int next_id = 0;
    for (const Element& element : doc.elements) {
        if (element.is_paragraph()) {
            for (auto& piece :
                 split_paragraph(element.paragraph().text, config.element_limit, counter)) {
                serialized.emplace_back(next_id++, std::move(piece));
            }
        } else {
            for (const Table& piece : split_table(element.table(), config.element_limit,
                                                  config.format, counter, warnings)) {
                serialized.emplace_back(next_id++, serialize_table(piece, config.format));
            }
        }
    }
    return merge_elements(serialized, config.segment_limit, counter);
}

std::vector<std::vector<Segment>> segment_documents_serial(std::span<const Document> docs,
                                                           const SegmentationConfig& config) {
    std::vector<std::vector<Segment>> out(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        out[i] = segment_document(docs[i], config);
    }
    return out;
}

std::vector<std::vector<Segment>> segment_documents(std::span<const Document> docs,
                                                    const SegmentationConfig& config,
                                                    int jobs) {
    std::vector<std::vector<Segment>> out(docs.size());
    std::exception_ptr failure;
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (long long i = 0; i < static_cast<long long>(docs.size()); ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                segment_document(docs[static_cast<std::size_t>(i)], config);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(afie_segment_documents_failure)
#endif
            {
                if (!failure) failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace afie
