#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "profiling/autoencoder.hpp"
#include "profiling/baselines.hpp"
#include "profiling/checkpoint.hpp"
#include "profiling/embedding_predictor.hpp"
#include "profiling/errors.hpp"
#include "profiling/synthetic.hpp"

using namespace profiling;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("profiling_ckpt_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
}

ExemplarTable corpus() {
    SyntheticOptions o;
    o.rows = 200;
    o.a_missing = 0.2;
    return deterministic_corpus(o);
}

std::vector<GroupQuery> random_queries(const FacetSchema& schema, std::size_t n, std::size_t vector_dim, Rng& rng) {
    std::vector<GroupQuery> out;
    for (std::size_t i = 0; i < n; ++i) {
        GroupQuery q;
        for (std::size_t f = 0; f < schema.size(); ++f)
            if (rng.bernoulli(0.4)) q.known.emplace_back(f, static_cast<ValueIndex>(rng.below(schema.vocabulary_size(f))));
        for (std::size_t d = 0; d < vector_dim; ++d) q.entity_vector.push_back(rng.normal());
        out.push_back(std::move(q));
    }
    return out;
}

// Bit-level equality of every predicted distribution.
void expect_identical_predictions(const Profiler& a, const Profiler& b, std::size_t vector_dim) {
    Rng rng(99);
    for (const auto& q : random_queries(a.schema(), 100, vector_dim, rng)) {
        const auto pa = profile(a, q), pb = profile(b, q);
        for (std::size_t f = 0; f < pa.facets.size(); ++f) {
            EXPECT_EQ(pa.facets[f].fixed, pb.facets[f].fixed);
            EXPECT_EQ(pa.facets[f].distribution, pb.facets[f].distribution);
        }
    }
}

AeConfig small_ae() {
    AeConfig c;
    c.embedding_size = 4;
    c.hidden_units = 8;
    c.max_epochs = 3;
    return c;
}

}  // namespace

TEST(Checkpoint, BaselinesRoundTrip) {
    const auto dir = temp_dir("baselines");
    const auto t = corpus();
    const auto mfv = MfvModel::fit(t);
    const auto nb = NbModel::fit(t, 0.5);
    save_model(mfv, (dir / "mfv.ckpt").string());
    save_model(nb, (dir / "nb.ckpt").string());
    const auto mfv2 = load_model((dir / "mfv.ckpt").string(), &t.schema());
    const auto nb2 = load_model((dir / "nb.ckpt").string());
    EXPECT_EQ(mfv2->kind(), ModelKind::MFV);
    EXPECT_EQ(nb2->kind(), ModelKind::NB);
    EXPECT_DOUBLE_EQ(dynamic_cast<const NbModel&>(*nb2).alpha(), 0.5);
    expect_identical_predictions(mfv, *mfv2, 0);
    expect_identical_predictions(nb, *nb2, 0);
}

TEST(Checkpoint, AutoencoderRoundTripIsExact) {
    const auto dir = temp_dir("ae");
    const auto t = corpus();
    const auto trained = train_autoencoder(t, small_ae());
    const auto path = (dir / "ae.ckpt").string();
    save_model(trained.model, path);
    const auto loaded = load_model(path, &t.schema());
    EXPECT_TRUE(dynamic_cast<const AeModel&>(*loaded) == trained.model);
    expect_identical_predictions(trained.model, *loaded, 0);
    const auto cp = read_checkpoint(path);
    ASSERT_TRUE(cp.best_dev_loss.has_value());
    EXPECT_EQ(*cp.best_dev_loss, trained.log.best_dev_loss);
    EXPECT_EQ(cp.epoch_reached, trained.log.epochs.size());
}

TEST(Checkpoint, EmbeddingPredictorRoundTripIsExact) {
    const auto dir = temp_dir("emb");
    const auto t = separable_vector_corpus(120, 6, 3);
    EmbConfig c;
    c.input_dim = 6;
    c.hidden_units = 8;
    c.max_epochs = 3;
    const auto trained = train_embedding_predictor(t, c);
    const auto path = (dir / "emb.ckpt").string();
    save_model(trained.model, path);
    const auto loaded = load_model(path);
    EXPECT_TRUE(dynamic_cast<const EmbModel&>(*loaded) == trained.model);
    expect_identical_predictions(trained.model, *loaded, 6);
}

TEST(Checkpoint, SavingTwiceGivesIdenticalBytes) {
    const auto dir = temp_dir("stable");
    const auto t = corpus();
    const auto nb = NbModel::fit(t);
    save_model(nb, (dir / "a").string());
    save_model(nb, (dir / "b").string());
    EXPECT_EQ(read_bytes(dir / "a"), read_bytes(dir / "b"));
    EXPECT_EQ(file_digest((dir / "a").string()), file_digest((dir / "b").string()));
}

TEST(Checkpoint, CorruptFilesRaiseSpecificErrors) {
    const auto dir = temp_dir("corrupt");
    const auto t = corpus();
    const auto path = dir / "m.ckpt";
    save_model(MfvModel::fit(t), path.string());
    const std::string good = read_bytes(path);

    auto bad = good;
    bad[0] = 'X';
    write_bytes(path, bad);
    EXPECT_THROW(read_checkpoint(path.string()), BadMagicError);

    bad = good;
    bad[4] = 9;
    write_bytes(path, bad);
    EXPECT_THROW(read_checkpoint(path.string()), VersionMismatchError);

    write_bytes(path, good.substr(0, good.size() - 3));
    EXPECT_THROW(read_checkpoint(path.string()), TruncatedFileError);

    write_bytes(path, good.substr(0, 20));
    EXPECT_THROW(read_checkpoint(path.string()), TruncatedFileError);

    write_bytes(path, good + "xx");
    EXPECT_THROW(read_checkpoint(path.string()), FormatError);

    // Rename a vocabulary label without touching the recorded fingerprint.
    bad = good;
    const auto at = bad.find("\"a0\"");
    ASSERT_NE(at, std::string::npos);
    bad[at + 1] = 'z';
    write_bytes(path, bad);
    EXPECT_THROW(read_checkpoint(path.string()), FingerprintMismatchError);

    EXPECT_THROW(read_checkpoint((dir / "missing.ckpt").string()), IoError);
}

TEST(Checkpoint, RefusesAForeignSchema) {
    const auto dir = temp_dir("foreign");
    const auto t = corpus();
    save_model(MfvModel::fit(t), (dir / "m.ckpt").string());
    const auto other = build_table({{"x", {"a"}}}, {{0}});
    EXPECT_THROW(load_model((dir / "m.ckpt").string(), &other.schema()), FingerprintMismatchError);
}
