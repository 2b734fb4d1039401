#include <gtest/gtest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "profiling/baselines.hpp"
#include "profiling/errors.hpp"
#include "profiling/evaluation.hpp"

using namespace profiling;

namespace {

ExemplarTable toy_table() {
    // facet x: a a b c ; facet y: p q p p
    return build_table({{"x", {"a", "b", "c"}}, {"y", {"p", "q"}}}, {{0, 0}, {0, 1}, {1, 0}, {2, 0}});
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

TEST(Mfv, FrequenciesAreTrainingProportions) {
    const auto t = toy_table();
    const auto m = MfvModel::fit(t);
    EXPECT_DOUBLE_EQ(m.frequencies(0)[0], 0.5);
    EXPECT_DOUBLE_EQ(m.frequencies(0)[1], 0.25);
    EXPECT_DOUBLE_EQ(m.frequencies(1)[0], 0.75);
    EXPECT_EQ(m.mode(0), 0u);
}

TEST(Mfv, IgnoresEvidence) {
    const auto t = toy_table();
    const auto m = MfvModel::fit(t);
    std::vector<ValueIndex> a{2, kMissing}, b{kMissing, kMissing};
    EXPECT_EQ(m.predict({a, {}}), m.predict({b, {}}));
}

TEST(Mfv, TieGoesToLexicographicallySmallestLabel) {
    // Index 0 is "zeta", index 1 is "alpha": equal counts, so "alpha" wins.
    const auto t = build_table({{"f", {"zeta", "alpha"}}}, {{0}, {1}});
    EXPECT_EQ(MfvModel::fit(t).mode(0), 1u);
}

TEST(Mfv, TopOneEqualsModalFrequencyOnMatchingTestSet) {
    // 10,000 TRAIN and 10,000 TEST rows with identical value counts; mode holds 1,426.
    const std::vector<std::size_t> counts{1426, 1225, 1225, 1225, 1225, 1225, 1225, 1224};
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < counts.size(); ++i) vocab.push_back("c" + std::to_string(i));
    std::vector<std::vector<ValueIndex>> rows;
    std::vector<Split> splits;
    for (Split s : {Split::Train, Split::Test})
        for (std::size_t v = 0; v < counts.size(); ++v)
            for (std::size_t i = 0; i < counts[v]; ++i) {
                rows.push_back({static_cast<ValueIndex>(v)});
                splits.push_back(s);
            }
    const auto t = build_table({{"citizenship", vocab}}, rows, splits);
    const auto m = MfvModel::fit(t);
    const auto acc = topk_accuracy(m, t, 1).accuracy(0, 1);
    ASSERT_TRUE(acc.has_value());
    EXPECT_EQ(*acc, m.frequencies(0)[m.mode(0)]);
    EXPECT_EQ(*acc, 0.1426);
}

TEST(Mfv, UntrainedFacetIsEmptyAndNamedOnDirectQuery) {
    const auto t = build_table({{"x", {"a"}}, {"never", {"z"}}}, {{0, kMissing}, {0, 0}}, {Split::Train, Split::Dev});
    const auto m = MfvModel::fit(t);
    std::vector<ValueIndex> q{kMissing, kMissing};
    EXPECT_TRUE(m.predict({q, {}})[1].empty());
    try {
        m.predict_facet({q, {}}, 1);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("never"), std::string::npos);
    }
}

TEST(NaiveBayes, MatchesBruteForceOnRandomSmallCorpora) {
    Rng rng(20240611);
    std::size_t compared = 0;
    for (int c = 0; c < 100; ++c) {
        const auto t = oracle::random_small_corpus(rng);
        const auto nb = NbModel::fit(t, 1.0);
        for (std::size_t target = 0; target < t.facets(); ++target) {
            if (t.schema().training_count(target) == 0) continue;
            for (const auto& ev : oracle::all_evidence(t.schema(), target)) {
                const auto got = nb.predict_facet({ev, {}}, target);
                const auto want = oracle::nb_brute_force(t, ev, target, 1.0);
                ASSERT_EQ(got.size(), want.size());
                for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
                ++compared;
            }
        }
    }
    EXPECT_GT(compared, 500u);
}

TEST(NaiveBayes, SmoothedTablesAreDistributions) {
    const auto t = toy_table();
    const auto nb = NbModel::fit(t);
    double prior = 0.0;
    for (ValueIndex v = 0; v < 3; ++v) prior += nb.prior(0, v);
    EXPECT_NEAR(prior, 1.0, 1e-12);
    for (ValueIndex y = 0; y < 3; ++y) {
        double s = 0.0;
        for (ValueIndex v = 0; v < 2; ++v) s += nb.conditional(0, y, 1, v);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(NaiveBayes, HandComputedPosterior) {
    // Target y, evidence x = a. Counts: y=p: 3 rows (x=a,b,c), y=q: 1 row (x=a).
    // P(p) = 4/6, P(q) = 2/6; P(a|p) = 2/6, P(a|q) = 2/4.
    // Unnormalized: p 4/6*2/6 = 8/36, q 2/6*1/2 = 6/36 -> p = 8/14.
    const auto t = toy_table();
    const auto nb = NbModel::fit(t);
    std::vector<ValueIndex> q{0, kMissing};
    const auto d = nb.predict_facet({q, {}}, 1);
    EXPECT_NEAR(d[0], 8.0 / 14.0, 1e-12);
    EXPECT_NEAR(d[1], 6.0 / 14.0, 1e-12);
}

TEST(NaiveBayes, MissingEvidenceLeavesThePrior) {
    const auto t = toy_table();
    const auto nb = NbModel::fit(t);
    std::vector<ValueIndex> q{kMissing, kMissing};
    const auto d = nb.predict_facet({q, {}}, 1);
    EXPECT_NEAR(d[0], nb.prior(1, 0), 1e-12);
    EXPECT_NEAR(sum(d), 1.0, 1e-12);
}

TEST(NaiveBayes, SmallAlphaApproachesUnsmoothedEstimate) {
    const auto t = toy_table();
    std::vector<ValueIndex> q{0, kMissing};
    // Unsmoothed: p: 3/4 * 1/3 = 1/4, q: 1/4 * 1 = 1/4 -> 0.5 each.
    double previous = 1.0;
    for (double alpha : {1.0, 1e-2, 1e-4, 1e-8}) {
        const auto d = NbModel::fit(t, alpha).predict_facet({q, {}}, 1);
        const double err = std::abs(d[0] - 0.5);
        EXPECT_LE(err, previous + 1e-15);
        previous = err;
    }
    EXPECT_LT(previous, 1e-7);
}

TEST(NaiveBayes, ZeroAlphaWithNoSupportIsNumericError) {
    // x=b only occurs in a row without y, so every class has zero likelihood.
    const auto t = build_table({{"x", {"a", "b"}}, {"y", {"p", "q"}}}, {{0, 0}, {0, 1}, {1, kMissing}});
    const auto nb = NbModel::fit(t, 0.0);
    std::vector<ValueIndex> q{1, kMissing};
    EXPECT_THROW(nb.predict_facet({q, {}}, 1), NumericError);
}

TEST(NaiveBayes, RejectsOutOfVocabularyEvidence) {
    const auto nb = NbModel::fit(toy_table());
    std::vector<ValueIndex> q{7, kMissing};
    EXPECT_THROW(nb.predict({q, {}}), ValidationError);
    EXPECT_THROW(NbModel::fit(toy_table(), -1.0), ValidationError);
}
