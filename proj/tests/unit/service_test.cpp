#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "profiling/baselines.hpp"
#include "profiling/checkpoint.hpp"
#include "profiling/embedding_predictor.hpp"
#include "profiling/errors.hpp"
#include "profiling/service.hpp"
#include "profiling/synthetic.hpp"

using namespace profiling;
using nlohmann::json;

namespace {

std::shared_ptr<const Profiler> nb_model() {
    static const auto table = deterministic_corpus({});
    static const std::shared_ptr<const Profiler> model = std::make_shared<NbModel>(NbModel::fit(table));
    return model;
}

void expect_normalized(const json& expectations) {
    for (const auto& [name, e] : expectations.items()) {
        double total = e["other"].get<double>();
        for (const auto& v : e["values"]) total += v["p"].get<double>();
        EXPECT_NEAR(total, 1.0, 1e-6) << name;
    }
}

// Throws from predict() to exercise the 500 path.
class BrokenModel final : public Profiler {
public:
    BrokenModel() : schema_(nb_model()->schema_ptr()) {}
    ModelKind kind() const override { return ModelKind::MFV; }
    const FacetSchema& schema() const override { return *schema_; }
    std::shared_ptr<const FacetSchema> schema_ptr() const override { return schema_; }
    std::vector<std::vector<double>> predict(const ProfileInput&) const override {
        throw NumericError("secret internal detail");
    }
    Checkpoint to_checkpoint() const override { throw std::logic_error("unused"); }

private:
    std::shared_ptr<const FacetSchema> schema_;
};

}  // namespace

TEST(EditDistance, Examples) {
    EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
    EXPECT_EQ(edit_distance("", "abc"), 3u);
    EXPECT_EQ(edit_distance("same", "same"), 0u);
    EXPECT_EQ(nearest_labels("b9", {"a1", "b1", "b2", "zz"}, 2), (std::vector<std::string>{"b1", "b2"}));
}

TEST(Service, EmptyQueryReturnsPriorsForEveryFacet) {
    ProfileService svc(nb_model(), "digest");
    const auto r = svc.profile("{}");
    ASSERT_EQ(r.status, 200) << r.body;
    const auto j = json::parse(r.body);
    EXPECT_EQ(j["expectations"].size(), 4u);
    EXPECT_TRUE(j["fixed"].empty());
    EXPECT_EQ(j["model"]["kind"], "NB");
    EXPECT_EQ(j["model"]["checkpoint"], "digest");
    expect_normalized(j["expectations"]);
}

TEST(Service, TruncatesToTopNWithResidual) {
    ProfileService svc(nb_model(), "d");
    const auto j = json::parse(svc.profile(R"({"known":{"A":"a1"},"top_n":2})").body);
    EXPECT_EQ(j["fixed"]["A"], "a1");
    EXPECT_FALSE(j["expectations"].contains("A"));
    EXPECT_EQ(j["expectations"]["B"]["values"].size(), 2u);
    EXPECT_EQ(j["expectations"]["B"]["values"][0]["value"], "b0");  // (3*1+5) mod 8
    EXPECT_GT(j["expectations"]["C"]["other"].get<double>(), 0.0);
    expect_normalized(j["expectations"]);

    ServiceOptions capped;
    capped.top_n_cap = 3;
    ProfileService small(nb_model(), "d", capped);
    const auto k = json::parse(small.profile(R"({"top_n":50})").body);
    EXPECT_EQ(k["top_n"], 3);
    EXPECT_EQ(k["expectations"]["A"]["values"].size(), 3u);
}

TEST(Service, MalformedRequestsAre400) {
    ProfileService svc(nb_model(), "d");
    EXPECT_EQ(svc.profile("{not json").status, 400);
    EXPECT_EQ(svc.profile("[1,2]").status, 400);
    const auto r = svc.profile(R"({"known":{"A":3}})");
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(json::parse(r.body)["field"], "known.A");
    EXPECT_EQ(svc.profile(R"({"top_n":0})").status, 400);
    EXPECT_EQ(svc.profile(R"({"top_n":"5"})").status, 400);
    EXPECT_EQ(svc.shift(R"({"base":[]})").status, 400);
}

TEST(Service, UnknownFacetOrValueIs422WithNearestLabels) {
    ProfileService svc(nb_model(), "d");
    auto r = svc.profile(R"({"known":{"AA":"a1"}})");
    ASSERT_EQ(r.status, 422);
    auto j = json::parse(r.body);
    EXPECT_EQ(j["field"], "known.AA");
    EXPECT_EQ(j["nearest"][0], "A");

    r = svc.profile(R"({"known":{"B":"b77"}})");
    ASSERT_EQ(r.status, 422);
    j = json::parse(r.body);
    EXPECT_EQ(j["nearest"][0], "b7");
}

TEST(Service, ShiftReportsDivergences) {
    ProfileService svc(nb_model(), "d");
    auto j = json::parse(svc.shift(R"({"base":{"C":"c0"},"added":{}})").body);
    ASSERT_EQ(j["facets"].size(), 3u);
    for (const auto& [name, f] : j["facets"].items()) EXPECT_EQ(f["divergence"].get<double>(), 0.0) << name;

    j = json::parse(svc.shift(R"({"added":{"A":"a2"}})").body);
    EXPECT_EQ(j["facets"]["B"]["after"], "b3");
    EXPECT_GT(j["facets"]["B"]["divergence"].get<double>(), 0.3);
    EXPECT_EQ(svc.shift(R"({"base":{"A":"a1"},"added":{"A":"a2"}})").status, 422);
}

TEST(Service, SchemaIsEnoughToBuildValidRequests) {
    ProfileService svc(nb_model(), "d");
    const auto s = json::parse(svc.schema().body);
    ASSERT_EQ(s["facets"].size(), 4u);
    json known = json::object();
    for (const auto& f : s["facets"]) known[f["name"].get<std::string>()] = f["vocabulary"].back();
    json req = {{"known", known}};
    EXPECT_EQ(svc.profile(req.dump()).status, 200);
    EXPECT_EQ(json::parse(svc.health().body)["status"], "ok");
}

TEST(Service, VectorModelsNeedAWellFormedVector) {
    const auto t = separable_vector_corpus(60, 4, 1);
    EmbConfig c;
    c.input_dim = 4;
    c.max_epochs = 1;
    ProfileService svc(std::make_shared<EmbModel>(train_embedding_predictor(t, c).model), "d");
    EXPECT_EQ(svc.profile("{}").status, 422);
    EXPECT_EQ(svc.profile(R"({"vector":[1,2]})").status, 422);
    EXPECT_EQ(svc.profile(R"({"vector":[1,"x",3,4]})").status, 400);
    const auto r = svc.profile(R"({"vector":[1,2,3,4]})");
    ASSERT_EQ(r.status, 200);
    expect_normalized(json::parse(r.body)["expectations"]);
    EXPECT_EQ(json::parse(svc.schema().body)["vector_dim"], 4);
}

TEST(Service, UntrainedFacetsAreMarked) {
    const auto t = build_table({{"x", {"a"}}, {"never", {"z"}}}, {{0, kMissing}, {0, 0}}, {Split::Train, Split::Dev});
    ProfileService svc(std::make_shared<MfvModel>(MfvModel::fit(t)), "d");
    const auto j = json::parse(svc.profile("{}").body);
    EXPECT_TRUE(j["expectations"]["never"]["untrained"].get<bool>());
    EXPECT_EQ(j["expectations"]["never"]["other"], 1.0);
    expect_normalized(j["expectations"]);
}

TEST(Service, InternalFailuresAreOpaque500s) {
    ProfileService svc(std::make_shared<BrokenModel>(), "d");
    const auto r = svc.profile("{}");
    EXPECT_EQ(r.status, 500);
    EXPECT_EQ(r.body.find("secret"), std::string::npos);
    EXPECT_TRUE(json::parse(r.body).contains("id"));
}

TEST(Service, ConcurrentIdenticalRequestsOverHttp) {
    const auto dir = std::filesystem::temp_directory_path() / "profiling_service_http";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "nb.ckpt").string();
    save_model(*nb_model(), path);
    const auto digest = file_digest(path);

    ServiceOptions o;
    o.port = 0;
    o.threads = 16;
    auto svc = ProfileService::from_checkpoint(path, o);
    const int port = svc->bind();
    std::thread server([&] { svc->listen(); });

    const std::string body = R"({"known":{"A":"a4","C":"c2"},"top_n":5})";
    std::vector<std::string> bodies(64);
    std::vector<int> statuses(64, 0);
    std::vector<std::thread> clients;
    for (int i = 0; i < 64; ++i)
        clients.emplace_back([&, i] {
            httplib::Client cli("127.0.0.1", port);
            cli.set_read_timeout(30, 0);
            if (auto res = cli.Post("/profile", body, "application/json")) {
                statuses[i] = res->status;
                bodies[i] = res->body;
            }
        });
    for (auto& c : clients) c.join();

    httplib::Client cli("127.0.0.1", port);
    auto bad = cli.Post("/profile", R"({"known":{"nope":"x"}})", "application/json");
    auto cors = cli.Get("/schema");
    svc->stop();
    server.join();

    for (int i = 0; i < 64; ++i) {
        EXPECT_EQ(statuses[i], 200);
        EXPECT_EQ(bodies[i], bodies[0]);
    }
    expect_normalized(json::parse(bodies[0])["expectations"]);
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 422);
    ASSERT_TRUE(cors);
    EXPECT_EQ(cors->get_header_value("Access-Control-Allow-Origin"), "*");
    EXPECT_EQ(file_digest(path), digest);
}
