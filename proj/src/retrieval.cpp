#include "afie/retrieval.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "afie/errors.hpp"

namespace afie {

namespace {

double dot(const std::vector<float>& a, const std::vector<float>& b) {
    std::size_t n = std::min(a.size(), b.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return sum;
}

std::vector<std::vector<float>> embed_or_wrap(const EmbeddingProvider& provider,
                                              const std::vector<std::string>& texts) {
    try {
        return provider.embed(texts);
    } catch (const RetrievalError&) {
        throw;
    } catch (const std::exception& e) {
        throw RetrievalError(std::string("embedding provider failed: ") + e.what());
    }
}

}  // namespace

std::vector<std::string> slice_text(std::string_view text, std::size_t slice_limit,
                                    const TokenCounter& counter) {
    // Same cutting rules as paragraph splitting: word-preserving,
    // non-overlapping, left to right.
    return split_paragraph(text, slice_limit, counter);
}

ScoredSegment score_segment(const Segment& segment, const std::string& keyword_text,
                            const EmbeddingProvider& provider, const TokenCounter& counter) {
    if (counter.count(keyword_text) > provider.max_input_tokens()) {
        throw RetrievalError("keyword exceeds the embedding input limit of " +
                             std::to_string(provider.max_input_tokens()) + " tokens");
    }
    std::vector<std::string> texts;
    texts.push_back(keyword_text);
    for (auto& slice : slice_text(segment.text, provider.max_input_tokens(), counter)) {
        texts.push_back(std::move(slice));
    }
    auto vectors = embed_or_wrap(provider, texts);
    double best = -1.0;
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        best = std::max(best, dot(vectors[0], vectors[i]));
    }
    return ScoredSegment{segment, best};
}

std::vector<double> score_segments_serial(std::span<const Segment> segments,
                                          const std::string& keyword_text,
                                          const EmbeddingProvider& provider,
                                          const TokenCounter& counter) {
    std::vector<double> scores;
    scores.reserve(segments.size());
    for (const Segment& segment : segments) {
        scores.push_back(score_segment(segment, keyword_text, provider, counter).score);
    }
    return scores;
}

std::vector<double> score_segments(std::span<const Segment> segments,
                                   const std::string& keyword_text,
                                   const EmbeddingProvider& provider,
                                   const TokenCounter& counter, int jobs) {
    if (segments.empty()) return {};
    if (counter.count(keyword_text) > provider.max_input_tokens()) {
        throw RetrievalError("keyword exceeds the embedding input limit of " +
                             std::to_string(provider.max_input_tokens()) + " tokens");
    }

    // One batched provider call for the keyword plus every slice of every
    // segment; slice_begin[i] marks segment i's range in the batch.
    std::vector<std::string> texts;
    texts.push_back(keyword_text);
    std::vector<std::size_t> slice_begin(segments.size() + 1, 1);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        for (auto& slice : slice_text(segments[i].text, provider.max_input_tokens(), counter)) {
            texts.push_back(std::move(slice));
        }
        slice_begin[i + 1] = texts.size();
    }
    auto vectors = embed_or_wrap(provider, texts);
    if (vectors.size() != texts.size()) {
        throw RetrievalError("embedding provider returned a short batch");
    }

    // Similarities are indexed by slice position, so the result does not
    // depend on thread scheduling.
    std::vector<double> slice_scores(texts.size() - 1, -1.0);
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
    for (long long s = 1; s < static_cast<long long>(vectors.size()); ++s) {
        slice_scores[static_cast<std::size_t>(s) - 1] =
            dot(vectors[0], vectors[static_cast<std::size_t>(s)]);
    }

    std::vector<double> scores(segments.size(), -1.0);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        for (std::size_t s = slice_begin[i]; s < slice_begin[i + 1]; ++s) {
            scores[i] = std::max(scores[i], slice_scores[s - 1]);
        }
    }
    return scores;
}

std::vector<Segment> retrieve_top_k(const std::vector<Segment>& segments,
                                    const std::string& keyword_text, std::size_t k,
                                    const EmbeddingProvider& provider,
                                    const TokenCounter& counter, int jobs) {
    if (segments.empty()) {
        throw EmptyCorpusError("retrieve_top_k called with no segments");
    }
    if (k < 1) {
        throw RetrievalError("retrieval quantity k must be at least 1");
    }
    if (segments.size() <= k) {
        return segments;  // nothing to rank; keep every segment
    }
    std::vector<double> scores = score_segments(segments, keyword_text, provider, counter, jobs);

    std::vector<std::size_t> order(segments.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;  // tie: keep the earlier segment
                      });
    order.resize(k);
    std::sort(order.begin(), order.end());  // back to document order

    std::vector<Segment> out;
    out.reserve(k);
    for (std::size_t idx : order) out.push_back(segments[idx]);
    return out;
}

}  // namespace afie
