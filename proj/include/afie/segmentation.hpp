#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afie/document.hpp"
#include "afie/serialization.hpp"
#include "afie/token_counter.hpp"

namespace afie {

struct SegmentationConfig {
    std::size_t element_limit = 2000;   // max tokens per serialized element
    std::size_t segment_limit = 2500;   // max tokens per merged segment
    SerializationFormat format = SerializationFormat::Plain;
    const TokenCounter* counter = nullptr;  // non-owning; required
};

// A token-budgeted concatenation of serialized elements. source_element_ids
// index the post-split element sequence (split pieces replace their
// overlength original, re-numbered in document order), so ids are unique
// across a document's segments and strictly increasing.
struct Segment {
    std::string text;
    std::size_t token_count = 0;
    std::vector<int> source_element_ids;
    int segment_index = 0;

    bool operator==(const Segment&) const = default;
};

// Splits an overlength paragraph into sub-paragraphs on whitespace
// boundaries, greedy left-to-right, no overlap; joining the pieces with
// single spaces reproduces the original word sequence. A single word over
// the limit is cut at character granularity, so this never fails.
std::vector<std::string> split_paragraph(std::string_view text, std::size_t limit,
                                         const TokenCounter& counter);

// Splits an overlength table into sub-tables that all start with the
// original header row, bodies being contiguous slices of the remaining
// rows in order. A header-plus-one-row table that still exceeds the limit
// is emitted as-is and reported through `warnings`.
std::vector<Table> split_table(const Table& table, std::size_t limit,
                               SerializationFormat format, const TokenCounter& counter,
                               std::vector<std::string>* warnings = nullptr);

// Greedy left-to-right packing of (element_id, text) pairs into segments,
// joining element texts with single newlines. The next element is appended
// as long as the joined segment stays within segment_limit; otherwise a
// new segment starts. Every element lands in exactly one segment, order
// preserved.
std::vector<Segment> merge_elements(
    const std::vector<std::pair<int, std::string>>& serialized_elements,
    std::size_t segment_limit, const TokenCounter& counter);

// Full pipeline: serialize tables, split overlength elements (pieces
// replace the originals), merge adjacent elements into segments.
std::vector<Segment> segment_document(const Document& doc, const SegmentationConfig& config,
                                      std::vector<std::string>* warnings = nullptr);

// Batch form, parallel across documents. jobs <= 0 uses the OpenMP default.
std::vector<std::vector<Segment>> segment_documents(std::span<const Document> docs,
                                                    const SegmentationConfig& config,
                                                    int jobs = 0);

// Plain sequential loop, kept as the reference the parallel batch is
// checked and benchmarked against.
std::vector<std::vector<Segment>> segment_documents_serial(std::span<const Document> docs,
                                                           const SegmentationConfig& config);

namespace detail {

// Greedy maximal packing shared by paragraph splitting, slicing and
// merging: covers `n` items with consecutive [begin,end) ranges where each
// range is the longest run starting at `begin` with fits(begin, end) true.
// `fits` must be monotone in `end` for fixed `begin`. A single item that
// does not fit on its own still forms a range, so the cover is total.
template <typename FitsFn>
std::vector<std::pair<std::size_t, std::size_t>> greedy_pack(std::size_t n, FitsFn fits) {
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    std::size_t begin = 0;
    while (begin < n) {
        if (!fits(begin, begin + 1)) {
            ranges.emplace_back(begin, begin + 1);
            ++begin;
            continue;
        }
        // Exponential probe, then binary search for the largest fitting end.
        std::size_t good = begin + 1;
        std::size_t step = 1;
        while (good + step <= n && fits(begin, good + step)) {
            good += step;
            step *= 2;
        }
        std::size_t lo = good;
        std::size_t hi = (good + step < n) ? good + step : n;
        while (lo < hi) {
            std::size_t mid = lo + (hi - lo + 1) / 2;
            if (fits(begin, mid)) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        ranges.emplace_back(begin, lo);
        begin = lo;
    }
    return ranges;
}

}  // namespace detail

}  // namespace afie
