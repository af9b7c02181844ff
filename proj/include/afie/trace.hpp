#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>

namespace afie {

// Appends one JSON object per line for every LLM / embedding call when
// tracing is enabled. Entries carry a monotonic sequence number instead of
// wall-clock time so repeated runs produce comparable traces.
class Tracer {
public:
    Tracer() = default;
    explicit Tracer(const std::filesystem::path& path);

    bool enabled() const { return out_.is_open(); }

    // kind: "llm" | "embedding". request/response are JSON-encoded strings.
    void record(std::string_view kind, const std::string& request,
                const std::string& response);

private:
    std::ofstream out_;
    std::mutex mutex_;
    long long sequence_ = 0;
};

}  // namespace afie
