#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace afie {

// Produces unit-normalized (L2 norm 1 +- 1e-6) embedding vectors of a
// fixed dimension. Must be deterministic; output order matches input
// order. max_input_tokens is the longest text the model accepts (384 for
// the reference sentence-embedding model).
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) const = 0;
    virtual std::size_t max_input_tokens() const = 0;

    // True when embed() may be called from multiple threads at once.
    virtual bool concurrency_safe() const { return false; }
};

// Offline default: feature-hashed bag of words. Each lowercased
// alphanumeric run hashes (FNV-1a, stable across platforms) into one of
// `dim` buckets; the bucket-count vector is L2-normalized. Deterministic
// and dependency-free, which is what the tests need.
class HashingEmbedder final : public EmbeddingProvider {
public:
    explicit HashingEmbedder(std::size_t dim = 256, std::size_t max_tokens = 384)
        : dim_(dim), max_tokens_(max_tokens) {}

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) const override;
    std::size_t max_input_tokens() const override { return max_tokens_; }
    bool concurrency_safe() const override { return true; }

    std::vector<float> embed_one(const std::string& text) const;
    std::size_t dimension() const { return dim_; }

    static std::uint64_t fnv1a(std::string_view token);

private:
    std::size_t dim_;
    std::size_t max_tokens_;
};

// Remote embedding service: POST {"texts": [str]} -> {"vectors": [[float]]}.
// Retries transient failures with exponential backoff.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    struct Options {
        std::string base_url;        // e.g. "http://127.0.0.1:8080"
        std::string path = "/embed";
        std::string auth_token;      // sent as "Authorization: Bearer <token>" when set
        std::size_t max_tokens = 384;
        int timeout_seconds = 30;
        int max_attempts = 3;
        int backoff_initial_ms = 200;
    };

    explicit HttpEmbeddingProvider(Options options) : options_(std::move(options)) {}

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) const override;
    std::size_t max_input_tokens() const override { return options_.max_tokens; }

private:
    Options options_;
};

}  // namespace afie
