#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "afie/embedding.hpp"
#include "afie/segmentation.hpp"
#include "afie/token_counter.hpp"

namespace afie {

struct ScoredSegment {
    Segment segment;
    double score = 0.0;  // max over the segment's slice similarities, in [-1, 1]
};

// Cuts text into non-overlapping, order-preserving slices of at most
// slice_limit tokens, sized for the embedding model's input window.
std::vector<std::string> slice_text(std::string_view text, std::size_t slice_limit,
                                    const TokenCounter& counter);

// Similarity between a segment and the keyword: the segment is sliced to
// the provider's input limit, every slice is embedded, and the score is
// the maximum cosine over slices (dot product on unit vectors).
ScoredSegment score_segment(const Segment& segment, const std::string& keyword_text,
                            const EmbeddingProvider& provider, const TokenCounter& counter);

// Scores a whole corpus against one keyword. All slices go to the provider
// as a single batch; the dot/max kernel then runs data-parallel over
// slices. Scores are associated by segment index, never by completion
// order, so results are identical for any thread count. jobs <= 0 leaves
// the OpenMP default in place.
std::vector<double> score_segments(std::span<const Segment> segments,
                                   const std::string& keyword_text,
                                   const EmbeddingProvider& provider,
                                   const TokenCounter& counter, int jobs = 0);

// Straightforward one-segment-at-a-time loop, embedding each slice with
// its own provider call. Reference implementation for tests and the
// benchmark baseline.
std::vector<double> score_segments_serial(std::span<const Segment> segments,
                                          const std::string& keyword_text,
                                          const EmbeddingProvider& provider,
                                          const TokenCounter& counter);

// The k highest-scoring segments, returned in original document order.
// Ties break toward the lower segment_index. When the corpus has at most
// k segments, retrieval is skipped and all segments are returned.
std::vector<Segment> retrieve_top_k(const std::vector<Segment>& segments,
                                    const std::string& keyword_text, std::size_t k,
                                    const EmbeddingProvider& provider,
                                    const TokenCounter& counter, int jobs = 0);

}  // namespace afie
