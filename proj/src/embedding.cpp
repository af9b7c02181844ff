#include "afie/embedding.hpp"

#include <cctype>
#include <cmath>

#include <json.hpp>

#include "afie/errors.hpp"
#include "internal/http_post.hpp"

namespace afie {

std::uint64_t HashingEmbedder::fnv1a(std::string_view token) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : token) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::vector<float> HashingEmbedder::embed_one(const std::string& text) const {
    std::vector<double> counts(dim_, 0.0);
    std::size_t i = 0;
    bool any = false;
    while (i < text.size()) {
        while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        std::string token;
        while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) {
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
            ++i;
        }
        if (i > start) {
            counts[fnv1a(token) % dim_] += 1.0;
            any = true;
        }
    }
    std::vector<float> out(dim_, 0.0f);
    if (!any) {
        out[0] = 1.0f;  // tokenless input still gets a unit vector
        return out;
    }
    double norm = 0.0;
    for (double c : counts) norm += c * c;
    norm = std::sqrt(norm);
    for (std::size_t d = 0; d < dim_; ++d) {
        out[d] = static_cast<float>(counts[d] / norm);
    }
    return out;
}

std::vector<std::vector<float>> HashingEmbedder::embed(
    const std::vector<std::string>& texts) const {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(embed_one(text));
    return out;
}

std::vector<std::vector<float>> HttpEmbeddingProvider::embed(
    const std::vector<std::string>& texts) const {
    nlohmann::json body = {{"texts", texts}};

    internal::HttpPostOptions post;
    post.base_url = options_.base_url;
    post.path = options_.path;
    post.timeout_seconds = options_.timeout_seconds;
    post.max_attempts = options_.max_attempts;
    post.backoff_initial_ms = options_.backoff_initial_ms;
    if (!options_.auth_token.empty()) {
        post.headers.emplace("Authorization", "Bearer " + options_.auth_token);
    }

    std::string response = internal::post_json_with_retry(
        post, body.dump(), [](const std::string& reason) {
            throw RetrievalError("embedding service: " + reason);
        });

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(response);
    } catch (const nlohmann::json::parse_error& e) {
        throw RetrievalError(std::string("embedding service returned invalid JSON: ") + e.what());
    }
    if (!parsed.is_object() || !parsed.contains("vectors") || !parsed["vectors"].is_array()) {
        throw RetrievalError("embedding service response missing \"vectors\" array");
    }
    std::vector<std::vector<float>> vectors;
    for (const auto& row : parsed["vectors"]) {
        if (!row.is_array()) {
            throw RetrievalError("embedding service vector is not an array");
        }
        std::vector<float> v;
        v.reserve(row.size());
        for (const auto& x : row) {
            if (!x.is_number()) {
                throw RetrievalError("embedding service vector has a non-numeric entry");
            }
            v.push_back(x.get<float>());
        }
        vectors.push_back(std::move(v));
    }
    if (vectors.size() != texts.size()) {
        throw RetrievalError("embedding service returned " + std::to_string(vectors.size()) +
                             " vectors for " + std::to_string(texts.size()) + " texts");
    }
    return vectors;
}

}  // namespace afie
