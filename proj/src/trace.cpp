#include "afie/trace.hpp"

#include <json.hpp>

#include "afie/errors.hpp"

namespace afie {

Tracer::Tracer(const std::filesystem::path& path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw ConfigError("cannot open trace file " + path.string());
    }
}

void Tracer::record(std::string_view kind, const std::string& request,
                    const std::string& response) {
    if (!out_.is_open()) return;
    std::lock_guard<std::mutex> lock(mutex_);
    nlohmann::json line = {
        {"seq", sequence_++},
        {"kind", std::string(kind)},
        {"request", request},
        {"response", response},
    };
    out_ << line.dump() << '\n';
    out_.flush();
}

}  // namespace afie
