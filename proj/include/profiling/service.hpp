#pragma once

#include <memory>
#include <string>
#include <vector>

#include "profiling/profiler.hpp"

namespace profiling {

inline constexpr int kResponseSchemaVersion = 1;

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080;                     // 0: pick a free port
    std::size_t default_top_n = 10;
    std::size_t top_n_cap = 100;         // larger requests are clamped
    std::string cors_origin = "*";       // empty disables CORS headers
    std::size_t threads = 8;
};

struct HttpReply {
    int status = 200;
    std::string body;  // JSON
};

/// Edit distance between two labels (unit-cost insert/delete/substitute).
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Up to `limit` candidates closest to `query` by edit distance, ties lexicographic.
std::vector<std::string> nearest_labels(std::string_view query, const std::vector<std::string>& candidates,
                                        std::size_t limit = 5);

/// JSON endpoints over one immutable model. Handlers are const and safe to call concurrently.
///
/// Status codes: 400 malformed JSON or wrong field types, 422 unknown facet or
/// value (with nearest labels) and other rejected queries, 500 unexpected
/// failures (opaque id in the body, details logged).
class ProfileService {
public:
    ProfileService(std::shared_ptr<const Profiler> model, std::string checkpoint_digest, ServiceOptions options = {});
    ~ProfileService();

    /// Loads and fingerprint-checks a checkpoint.
    static std::unique_ptr<ProfileService> from_checkpoint(const std::string& path, ServiceOptions options = {});

    HttpReply health() const;
    HttpReply schema() const;
    HttpReply profile(const std::string& body) const;
    HttpReply shift(const std::string& body) const;

    /// Binds the listening socket and returns the bound port.
    int bind();
    /// Serves until stop(); call after bind().
    void listen();
    void stop();

    const ServiceOptions& options() const noexcept { return options_; }

private:
    struct Server;

    std::shared_ptr<const Profiler> model_;
    std::string digest_;
    ServiceOptions options_;
    std::unique_ptr<Server> server_;
};

}  // namespace profiling
