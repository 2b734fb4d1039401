#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "profiling/errors.hpp"
#include "profiling/ingest.hpp"
#include "profiling/rng.hpp"
#include "profiling/store_io.hpp"

using namespace profiling;

namespace {

RawRecord record(std::string id, std::vector<std::pair<std::string, std::string>> assertions) {
    return RawRecord{std::move(id), std::move(assertions), {}, {}};
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("profiling_ks_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<RawRecord> random_records(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<RawRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        RawRecord r{"Q" + std::to_string(i), {}, {}, {}};
        for (const char* facet : {"color", "shape", "size"})
            if (rng.bernoulli(0.7)) r.assertions.emplace_back(facet, std::string(1, static_cast<char>('a' + rng.below(6))));
        if (rng.bernoulli(0.3)) r.assertions.emplace_back("color", std::string(1, static_cast<char>('a' + rng.below(6))));
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

TEST(Ingest, VocabularyOrderedByFrequency) {
    auto result = ingest({record("e1", {{"color", "red"}}), record("e2", {{"color", "blue"}}),
                          record("e3", {{"color", "red"}})});
    ASSERT_EQ(result.schema->size(), 1u);
    EXPECT_EQ(result.schema->facet(0).vocabulary, (std::vector<std::string>{"red", "blue"}));
}

TEST(Ingest, CapTurnsRareValuesMissing) {
    std::vector<RawRecord> recs;
    const std::vector<std::pair<std::string, int>> labels = {{"a", 5}, {"b", 4}, {"c", 3}, {"d", 2}, {"e", 1}};
    int id = 0;
    for (const auto& [label, count] : labels)
        for (int i = 0; i < count; ++i) recs.push_back(record("e" + std::to_string(id++), {{"f", label}}));
    auto result = ingest(recs, {.cap = 3, .seed = 1});
    EXPECT_EQ(result.schema->facet(0).vocabulary, (std::vector<std::string>{"a", "b", "c"}));
    const auto& t = result.table;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const std::string& original = recs[r].assertions.front().second;
        if (original == "d" || original == "e") EXPECT_EQ(t.cell(r, 0), kMissing);
        else EXPECT_EQ(t.schema().label(0, t.cell(r, 0)), original);
    }
}

TEST(Ingest, CapTiesBrokenLexicographically) {
    auto result = ingest({record("1", {{"f", "zeta"}}), record("2", {{"f", "alpha"}}), record("3", {{"f", "mid"}})},
                         {.cap = 2, .seed = 0});
    EXPECT_EQ(result.schema->facet(0).vocabulary, (std::vector<std::string>{"alpha", "mid"}));
}

TEST(Ingest, SplitIs80_10_10AndReproducible) {
    std::vector<RawRecord> recs;
    for (int i = 0; i < 100; ++i) recs.push_back(record("e" + std::to_string(i), {{"f", i % 2 ? "x" : "y"}}));
    auto a = ingest(recs, {.seed = 7});
    auto b = ingest(recs, {.seed = 7});
    EXPECT_EQ(a.table.rows_in(Split::Train).size(), 80u);
    EXPECT_EQ(a.table.rows_in(Split::Dev).size(), 10u);
    EXPECT_EQ(a.table.rows_in(Split::Test).size(), 10u);
    EXPECT_EQ(a.table.splits(), b.table.splits());
    EXPECT_TRUE(a.table == b.table);
    auto c = ingest(recs, {.seed = 8});
    EXPECT_NE(a.table.splits(), c.table.splits());
}

TEST(Ingest, SplitProportionsWithinOneRow) {
    for (std::size_t n : {1u, 3u, 7u, 19u, 55u, 101u, 999u}) {
        auto splits = assign_splits(n, 3);
        auto count = [&](Split s) { return static_cast<double>(std::count(splits.begin(), splits.end(), s)); };
        EXPECT_LE(std::abs(count(Split::Train) - 0.8 * n), 1.0) << n;
        EXPECT_LE(std::abs(count(Split::Dev) - 0.1 * n), 1.0) << n;
        EXPECT_LE(std::abs(count(Split::Test) - 0.1 * n), 1.0) << n;
    }
}

TEST(Ingest, EmptyInputIsDistinctError) {
    EXPECT_THROW(ingest({}), EmptyInputError);
}

TEST(Ingest, RecordWithoutAssertionsKeptAsMissingRow) {
    auto result = ingest({record("e1", {{"f", "x"}}), record("bare", {})});
    ASSERT_EQ(result.table.rows(), 2u);
    EXPECT_EQ(result.table.cell(1, 0), kMissing);
    EXPECT_THROW(ingest({record("", {})}), ParseError);
}

TEST(Ingest, ValueCountsAreTrainingOnlyAndSumToExamples) {
    auto result = ingest(random_records(200, 5), {.seed = 11});
    const auto report = stats(result.table);
    const auto counts = training_value_counts(result.table);
    for (std::size_t f = 0; f < result.schema->size(); ++f) {
        EXPECT_EQ(result.schema->facet(f).value_counts, counts[f]);
        EXPECT_EQ(result.schema->training_count(f), report[f].examples);
    }
}

TEST(Ingest, MultiValueResolvedByTrainingFrequency) {
    std::vector<RawRecord> recs;
    for (int i = 0; i < 50; ++i) recs.push_back(record("d" + std::to_string(i), {{"citizenship", "Dutch"}}));
    recs.push_back(record("dual", {{"citizenship", "Swiss"}, {"citizenship", "Dutch"}}));
    recs.push_back(record("s", {{"citizenship", "Swiss"}}));
    auto result = ingest(recs, {.seed = 2});
    const auto& t = result.table;
    EXPECT_EQ(t.schema().label(0, t.cell(50, 0)), "Dutch");
}

TEST(ResolveMultivalue, FrequencyRule) {
    std::map<std::string, std::uint64_t> freq{{"Dutch", 900}, {"Swiss", 40}};
    EXPECT_EQ(resolve_multivalue({"Dutch", "Swiss"}, freq), "Dutch");
    EXPECT_EQ(resolve_multivalue({"Swiss", "Dutch"}, freq), "Dutch");
    EXPECT_EQ(resolve_multivalue({"A"}, freq), "A");
}

TEST(ResolveMultivalue, EqualCountsPickLexicographicallySmallest) {
    std::map<std::string, std::uint64_t> freq{{"A", 1}, {"B", 1}};
    EXPECT_EQ(resolve_multivalue({"B", "A"}, freq), "A");
    EXPECT_EQ(resolve_multivalue({"A", "B"}, freq), "A");
    EXPECT_EQ(resolve_multivalue({"B", "A"}, {}), "A");
}

TEST(DateFacets, LifespanAndCentury) {
    auto d = derive_date_facets(parse_date("1954"), parse_date("2016"));
    EXPECT_EQ(d.lifespan, "[60,65)");
    EXPECT_EQ(d.century, "20th");
    EXPECT_FALSE(d.warning);
}

TEST(DateFacets, PartialInput) {
    auto d = derive_date_facets(parse_date("1899-12-31"), std::nullopt);
    EXPECT_FALSE(d.lifespan);
    EXPECT_EQ(d.century, "19th");
    auto none = derive_date_facets(std::nullopt, parse_date("1990"));
    EXPECT_FALSE(none.lifespan);
    EXPECT_FALSE(none.century);
}

TEST(DateFacets, DeathBeforeBirthWarns) {
    auto d = derive_date_facets(parse_date("2000"), parse_date("1990"));
    EXPECT_FALSE(d.lifespan);
    EXPECT_FALSE(d.century);
    EXPECT_TRUE(d.warning);
    // Same year, day precision decides.
    EXPECT_TRUE(derive_date_facets(parse_date("1990-05-02"), parse_date("1990-05-01")).warning);
    EXPECT_FALSE(derive_date_facets(parse_date("1990-05-02"), parse_date("1990")).warning);
}

TEST(DateFacets, Labels) {
    EXPECT_EQ(century_label(2001), "21st");
    EXPECT_EQ(century_label(2000), "20th");
    EXPECT_EQ(century_label(1150), "12th");
    EXPECT_EQ(century_label(1), "1st");
    EXPECT_EQ(century_label(-50), "1st BCE");
    EXPECT_EQ(lifespan_label(0), "[0,5)");
    EXPECT_EQ(lifespan_label(104), "[100,105)");
    EXPECT_FALSE(parse_date("19x4"));
    EXPECT_FALSE(parse_date("1954-13-01"));
    EXPECT_EQ(parse_date("1954-03-09T00:00:00Z")->month, 3);
}

TEST(Ingest, DerivedFacetsAppendedAndWarningsKept) {
    RawRecord a = record("a", {{"party", "X"}});
    a.birth_date = "1954";
    a.death_date = "2016";
    RawRecord b = record("b", {{"party", "Y"}});
    b.birth_date = "2000";
    b.death_date = "1990";
    auto result = ingest({a, b});
    ASSERT_EQ(result.schema->size(), 3u);
    EXPECT_EQ(result.schema->facet(1).name, kLifespanFacet);
    EXPECT_EQ(result.schema->facet(2).name, kCenturyFacet);
    EXPECT_EQ(result.table.cell(1, 1), kMissing);
    EXPECT_EQ(result.table.cell(1, 2), kMissing);
    EXPECT_EQ(result.schema->label(1, result.table.cell(0, 1)), "[60,65)");
    ASSERT_EQ(result.warnings.size(), 1u);
    EXPECT_NE(result.warnings[0].find("b:"), std::string::npos);
}

TEST(ParseTriples, GroupsByEntityAndReadsDates) {
    std::istringstream in("Q1\tcolor\tred\nQ2\tcolor\tblue\nQ1\tshape\tround\nQ1\tbirth_date\t1954-01-02\n\nQ3\n");
    auto recs = parse_triples(in);
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].assertions.size(), 2u);
    EXPECT_EQ(recs[0].birth_date, "1954-01-02");
    EXPECT_TRUE(recs[2].assertions.empty());
}

TEST(ParseTriples, RejectsMalformedLines) {
    std::istringstream two_fields("Q1\tcolor\n");
    EXPECT_THROW(parse_triples(two_fields), ParseError);
    std::istringstream empty_id("\tcolor\tred\n");
    try {
        parse_triples(empty_id);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1u);
    }
}

TEST(ParseTriples, ReadsGzipInput) {
    auto dir = temp_dir("gz");
    auto path = (dir / "in.tsv.gz").string();
    gzFile f = gzopen(path.c_str(), "wb");
    const std::string text = "Q1\tcolor\tred\nQ2\tcolor\tblue\n";
    gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
    auto recs = read_triples_file(path);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[1].assertions[0].second, "blue");
    EXPECT_THROW(read_triples_file((dir / "absent.tsv").string()), IoError);
}

TEST(Stats, CountsTrainingCells) {
    auto table = build_table({{"f", {"a", "b"}}}, {{0}, {kMissing}, {1}, {0}});
    auto s = stats(table);
    EXPECT_EQ(s[0].examples, 3u);
    EXPECT_EQ(s[0].vocabulary_size, 2u);
    EXPECT_FALSE(s[0].empty);
}

TEST(Stats, AllMissingFacetFlagged) {
    auto table = build_table({{"f", {"a"}}, {"g", {}}}, {{0, kMissing}, {kMissing, kMissing}});
    auto s = stats(table);
    EXPECT_EQ(s[1].examples, 0u);
    EXPECT_EQ(s[1].vocabulary_size, 0u);
    EXPECT_TRUE(s[1].empty);
}

TEST(Schema, RejectsDuplicatesAndOversizedVocabularies) {
    EXPECT_THROW(FacetSchema({{"f", {"a", "a"}, {}}}), ValidationError);
    EXPECT_THROW(FacetSchema({{"f", {"a"}, {}}, {"f", {"b"}, {}}}), ValidationError);
    std::vector<std::string> big;
    for (int i = 0; i < 3001; ++i) big.push_back(std::to_string(i));
    EXPECT_THROW(FacetSchema({{"f", big, {}}}), ValidationError);
}

TEST(Schema, UnknownLabelErrorListsValidLabels) {
    FacetSchema schema({{"religion", {"Buddhism", "Islam"}, {}}});
    try {
        schema.value_index(0, "Jainism");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("Buddhism"), std::string::npos);
    }
    EXPECT_THROW(schema.facet_index("colour"), ValidationError);
}

TEST(Schema, FingerprintIgnoresCountsButNotOrder) {
    FacetSchema a({{"x", {"1", "2"}, {3, 4}}, {"y", {"u"}, {1}}});
    FacetSchema b({{"x", {"1", "2"}, {0, 0}}, {"y", {"u"}, {0}}});
    FacetSchema c({{"y", {"u"}, {1}}, {"x", {"1", "2"}, {3, 4}}});
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    EXPECT_NE(a.fingerprint(), c.fingerprint());
}

TEST(StoreIo, RoundTripPreservesCellsSplitsAndVectors) {
    auto result = ingest(random_records(120, 9), {.seed = 4});
    std::vector<std::optional<std::vector<double>>> vectors(result.table.rows());
    for (std::size_t r = 0; r < vectors.size(); r += 2) vectors[r] = std::vector<double>{0.5 * r, -1.0, 1e-300};
    result.table.set_vectors(3, vectors);

    auto dir = temp_dir("roundtrip");
    save_store(result.table, dir.string());
    auto store = load_store(dir.string());
    EXPECT_TRUE(*store.schema == *result.schema);
    EXPECT_TRUE(*store.table == result.table);
    for (std::size_t f = 0; f < result.schema->size(); ++f)
        EXPECT_EQ(store.schema->facet(f).name, result.schema->facet(f).name);
}

TEST(StoreIo, RejectsCorruptAndMismatchedTables) {
    auto result = ingest(random_records(30, 1), {.seed = 4});
    auto dir = temp_dir("corrupt");
    auto path = (dir / "t.bin").string();
    save_table(result.table, path);

    auto other = std::make_shared<const FacetSchema>(std::vector<Facet>{{"z", {"q"}, {}}});
    EXPECT_THROW(load_table(other, path), FingerprintMismatchError);

    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    {
        std::ofstream out(path, std::ios::binary);
        out << bytes.substr(0, bytes.size() / 2);
    }
    EXPECT_THROW(load_table(result.schema, path), TruncatedFileError);
    {
        std::ofstream out(path, std::ios::binary);
        out << "XXXX" << bytes.substr(4);
    }
    EXPECT_THROW(load_table(result.schema, path), BadMagicError);
}

TEST(StoreIo, VectorSidecar) {
    auto dir = temp_dir("vectors");
    auto path = (dir / "v.tsv").string();
    std::map<std::string, std::vector<double>> vectors{{"Q1", {0.1, 0.2}}, {"Q2", {-3.0, 4.5}}};
    write_vector_sidecar(vectors, path);
    EXPECT_EQ(read_vector_sidecar(path), vectors);

    auto table = build_table({{"f", {"a"}}}, {{0}, {0}, {0}}, {}, {"Q1", "Q2", "Q3"});
    EXPECT_EQ(attach_vectors(table, vectors), 1u);
    EXPECT_TRUE(table.has_vector(1));
    EXPECT_FALSE(table.has_vector(2));
    EXPECT_DOUBLE_EQ(table.vector(1)[1], 4.5);

    std::ofstream(path) << "Q1\t1 2\nQ2\t1 2 3\n";
    EXPECT_THROW(read_vector_sidecar(path), ParseError);
}
