#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include <httplib.h>

namespace afie::internal {

struct HttpPostOptions {
    std::string base_url;
    std::string path;
    httplib::Headers headers;
    int timeout_seconds = 30;
    int max_attempts = 3;
    int backoff_initial_ms = 200;
};

// POSTs a JSON body, retrying transport errors and 5xx responses with
// exponential backoff. 4xx responses are not retried. `fail` must throw
// the caller's error type; it receives a human-readable reason.
inline std::string post_json_with_retry(
    const HttpPostOptions& options, const std::string& body,
    const std::function<void(const std::string&)>& fail) {
    std::string last_error = "no attempts made";
    int backoff_ms = options.backoff_initial_ms;
    for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client client(options.base_url);
        client.set_connection_timeout(options.timeout_seconds, 0);
        client.set_read_timeout(options.timeout_seconds, 0);
        client.set_write_timeout(options.timeout_seconds, 0);

        auto res = client.Post(options.path, options.headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            return res->body;
        }
        if (res->status >= 400 && res->status < 500) {
            fail("HTTP " + std::to_string(res->status) + " from " + options.base_url +
                 options.path + " (not retried): " + res->body);
        }
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
    }
    fail("request to " + options.base_url + options.path + " failed after " +
         std::to_string(options.max_attempts) + " attempts; last error: " + last_error);
    return {};  // fail() always throws
}

}  // namespace afie::internal
