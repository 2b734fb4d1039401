#include "profiling/service.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>

// Bursts of concurrent clients overflow httplib's default backlog of 5.
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <json.hpp>

#include "profiling/checkpoint.hpp"
#include "profiling/divergence.hpp"
#include "profiling/errors.hpp"

namespace profiling {

using nlohmann::json;

namespace {

class HttpError : public std::runtime_error {
public:
    HttpError(int status, const std::string& message, std::string field = {}, std::vector<std::string> nearest = {})
        : std::runtime_error(message), status(status), field(std::move(field)), nearest(std::move(nearest)) {}

    int status;
    std::string field;
    std::vector<std::string> nearest;
};

HttpReply reply(int status, const json& body) { return {status, body.dump()}; }

std::string error_id() {
    static std::atomic<std::uint64_t> counter{0};
    const auto now = std::chrono::steady_clock::now().time_since_epoch().count();
    return fingerprint_hex(fnv1a64(std::to_string(counter++) + ":" + std::to_string(now)));
}

template <typename Fn>
HttpReply guarded(const char* endpoint, Fn&& fn) {
    try {
        return fn();
    } catch (const HttpError& e) {
        json body = {{"error", e.what()}};
        if (!e.field.empty()) body["field"] = e.field;
        if (!e.nearest.empty()) body["nearest"] = e.nearest;
        return reply(e.status, body);
    } catch (const ValidationError& e) {
        return reply(422, {{"error", e.what()}});
    } catch (const std::exception& e) {
        const std::string id = error_id();
        spdlog::error("{} failed [{}]: {}", endpoint, id, e.what());
        return reply(500, {{"error", "internal error"}, {"id", id}});
    }
}

json parse_body(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw HttpError(400, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
    return j;
}

std::vector<std::string> facet_names(const FacetSchema& schema) {
    std::vector<std::string> out;
    for (const auto& f : schema.facets()) out.push_back(f.name);
    return out;
}

GroupQuery parse_known(const FacetSchema& schema, const json& obj, const std::string& field) {
    if (!obj.is_object()) throw HttpError(400, "'" + field + "' must be an object of facet -> value", field);
    GroupQuery q;
    for (const auto& [name, value] : obj.items()) {
        const std::string where = field + "." + name;
        if (!value.is_string()) throw HttpError(400, "value of '" + where + "' must be a string", where);
        const auto f = schema.find_facet(name);
        if (!f) throw HttpError(422, "unknown facet '" + name + "'", where, nearest_labels(name, facet_names(schema)));
        const auto label = value.get<std::string>();
        const auto v = schema.find_value(*f, label);
        if (!v)
            throw HttpError(422, "unknown value '" + label + "' for facet '" + name + "'", where,
                            nearest_labels(label, schema.facet(*f).vocabulary));
        q.known.emplace_back(*f, *v);
    }
    return q;
}

std::vector<double> parse_vector(const json& j, const std::string& field) {
    if (!j.is_array()) throw HttpError(400, "'" + field + "' must be an array of numbers", field);
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) throw HttpError(400, "'" + field + "' must be an array of numbers", field);
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::vector<std::string> nearest_labels(std::string_view query, const std::vector<std::string>& candidates,
                                        std::size_t limit) {
    std::vector<std::pair<std::size_t, const std::string*>> scored;
    for (const auto& c : candidates) scored.emplace_back(edit_distance(query, c), &c);
    const std::size_t n = std::min(limit, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                      [](const auto& x, const auto& y) { return x.first != y.first ? x.first < y.first : *x.second < *y.second; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(*scored[i].second);
    return out;
}

struct ProfileService::Server {
    httplib::Server http;
};

ProfileService::ProfileService(std::shared_ptr<const Profiler> model, std::string checkpoint_digest,
                               ServiceOptions options)
    : model_(std::move(model)), digest_(std::move(checkpoint_digest)), options_(std::move(options)) {
    if (!model_) throw ValidationError("service needs a model");
    if (options_.default_top_n == 0 || options_.top_n_cap == 0) throw ValidationError("top_n limits must be at least 1");
}

ProfileService::~ProfileService() = default;

std::unique_ptr<ProfileService> ProfileService::from_checkpoint(const std::string& path, ServiceOptions options) {
    std::shared_ptr<const Profiler> model = load_model(path);
    return std::make_unique<ProfileService>(std::move(model), file_digest(path), std::move(options));
}

namespace {

json model_info(const Profiler& model, const std::string& digest) {
    return {{"kind", to_string(model.kind())},
            {"checkpoint", digest},
            {"schema_fingerprint", fingerprint_hex(model.schema().fingerprint())}};
}

}  // namespace

HttpReply ProfileService::health() const {
    return reply(200, {{"status", "ok"}, {"model", model_info(*model_, digest_)}});
}

HttpReply ProfileService::schema() const {
    return guarded("/schema", [&] {
        const FacetSchema& s = model_->schema();
        json facets = json::array();
        for (std::size_t f = 0; f < s.size(); ++f)
            facets.push_back({{"name", s.facet(f).name},
                              {"vocabulary", s.facet(f).vocabulary},
                              {"trained", s.training_count(f) > 0}});
        return reply(200, {{"schema_version", kResponseSchemaVersion},
                           {"model", model_info(*model_, digest_)},
                           {"vector_dim", model_->entity_vector_dim()},
                           {"top_n_default", options_.default_top_n},
                           {"top_n_cap", options_.top_n_cap},
                           {"facets", std::move(facets)}});
    });
}

HttpReply ProfileService::profile(const std::string& body) const {
    return guarded("/profile", [&] {
        const FacetSchema& s = model_->schema();
        const json req = parse_body(body);
        GroupQuery query = req.contains("known") ? parse_known(s, req["known"], "known") : GroupQuery{};
        if (req.contains("vector")) query.entity_vector = parse_vector(req["vector"], "vector");
        std::size_t top_n = options_.default_top_n;
        if (req.contains("top_n")) {
            const auto& t = req["top_n"];
            if (!t.is_number_integer() || t.get<long long>() < 1)
                throw HttpError(400, "'top_n' must be a positive integer", "top_n");
            top_n = std::min<std::size_t>(t.get<std::size_t>(), options_.top_n_cap);
        }
        validate_query(*model_, query);
        const ProfileDistribution dist = profiling::profile(*model_, query);

        json fixed = json::object(), expectations = json::object();
        for (std::size_t f = 0; f < s.size(); ++f) {
            const auto& name = s.facet(f).name;
            const auto& fp = dist.facets[f];
            if (fp.fixed) {
                fixed[name] = s.label(f, *fp.fixed);
                continue;
            }
            if (fp.distribution.empty()) {
                expectations[name] = {{"untrained", true}, {"values", json::array()}, {"other", 1.0}};
                continue;
            }
            json values = json::array();
            double listed = 0.0;
            for (ValueIndex v : top_k(fp.distribution, top_n)) {
                const double p = fp.distribution[v];
                if (!std::isfinite(p)) throw NumericError("non-finite probability for facet '" + name + "'");
                values.push_back({{"value", s.label(f, v)}, {"p", p}});
                listed += p;
            }
            expectations[name] = {{"values", std::move(values)}, {"other", std::max(0.0, 1.0 - listed)}};
        }
        return reply(200, {{"schema_version", kResponseSchemaVersion},
                           {"model", model_info(*model_, digest_)},
                           {"top_n", top_n},
                           {"fixed", std::move(fixed)},
                           {"expectations", std::move(expectations)}});
    });
}

HttpReply ProfileService::shift(const std::string& body) const {
    return guarded("/shift", [&] {
        const FacetSchema& s = model_->schema();
        const json req = parse_body(body);
        GroupQuery base = req.contains("base") ? parse_known(s, req["base"], "base") : GroupQuery{};
        const GroupQuery added = req.contains("added") ? parse_known(s, req["added"], "added") : GroupQuery{};
        if (req.contains("vector")) base.entity_vector = parse_vector(req["vector"], "vector");
        validate_query(*model_, merge_queries(base, added));
        const ShiftReport report = profiling::shift(*model_, base, added);
        json facets = json::object();
        for (const auto& fs : report.facets)
            facets[s.facet(fs.facet).name] = {{"divergence", fs.divergence},
                                              {"before", s.label(fs.facet, fs.top_before)},
                                              {"after", s.label(fs.facet, fs.top_after)},
                                              {"changed", fs.top_changed}};
        return reply(200, {{"schema_version", kResponseSchemaVersion},
                           {"model", model_info(*model_, digest_)},
                           {"facets", std::move(facets)}});
    });
}

int ProfileService::bind() {
    server_ = std::make_unique<Server>();
    auto& http = server_->http;
    const std::size_t threads = std::max<std::size_t>(1, options_.threads);
    http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    if (!options_.cors_origin.empty())
        http.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type"}});

    auto send = [](httplib::Response& res, const HttpReply& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    http.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
    http.Get("/schema", [this, send](const httplib::Request&, httplib::Response& res) { send(res, schema()); });
    http.Post("/profile",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, profile(req.body)); });
    http.Post("/shift", [this, send](const httplib::Request& req, httplib::Response& res) { send(res, shift(req.body)); });
    http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    int port = options_.port;
    if (port == 0) {
        port = http.bind_to_any_port(options_.host);
        if (port < 0) throw IoError("cannot bind " + options_.host);
    } else if (!http.bind_to_port(options_.host, port)) {
        throw IoError("cannot bind " + options_.host + ":" + std::to_string(port));
    }
    spdlog::info("serving {} model {} on {}:{}", to_string(model_->kind()), digest_, options_.host, port);
    return port;
}

void ProfileService::listen() {
    if (!server_) throw IoError("listen() before bind()");
    server_->http.listen_after_bind();
}

void ProfileService::stop() {
    if (server_) server_->http.stop();
}

}  // namespace profiling
