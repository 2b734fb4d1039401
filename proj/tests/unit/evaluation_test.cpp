#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "profiling/baselines.hpp"
#include "profiling/dataspace.hpp"
#include "profiling/errors.hpp"
#include "profiling/evaluation.hpp"
#include "profiling/ingest.hpp"
#include "profiling/synthetic.hpp"

using namespace profiling;

TEST(Judgments, UnanimousVotesGiveAPointMass) {
    const std::vector<std::string> options{"v1", "v2", "v3"};
    const auto d = aggregate_judgments(std::vector<std::string>(15, "v1"), options);
    EXPECT_EQ(d, (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
}

TEST(Judgments, SingleCannotDecideIsUniform) {
    std::vector<std::string> options;
    for (int i = 0; i < 10; ++i) options.push_back("v" + std::to_string(i));
    const auto d = aggregate_judgments({std::string(kCannotDecide)}, options);
    ASSERT_EQ(d.size(), 11u);
    for (double v : d) EXPECT_NEAR(v, 1.0 / 11.0, 1e-12);
}

TEST(Judgments, MixedVotesMatchHandArithmetic) {
    std::vector<std::string> options;
    for (int i = 1; i <= 10; ++i) options.push_back("v" + std::to_string(i));
    std::vector<std::string> votes(8, "v1");
    votes.insert(votes.end(), 4, std::string(kNoneOfTheAbove));
    votes.insert(votes.end(), 3, std::string(kCannotDecide));
    const auto d = aggregate_judgments(votes, options);
    const double share = 3.0 / 11.0;
    EXPECT_NEAR(d[0], (8.0 + share) / 15.0, 1e-9);
    for (std::size_t i = 1; i < 10; ++i) EXPECT_NEAR(d[i], share / 15.0, 1e-9);
    EXPECT_NEAR(d[10], (4.0 + share) / 15.0, 1e-9);
    double s = 0.0;
    for (double v : d) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);

    std::reverse(votes.begin(), votes.end());
    const auto r = aggregate_judgments(votes, options);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(r[i], d[i], 1e-15);
}

TEST(Judgments, EmptyOrUnknownVotesAreRejected) {
    EXPECT_THROW(aggregate_judgments({}, {"a"}), ValidationError);
    EXPECT_THROW(aggregate_judgments({"b"}, {"a"}), ValidationError);
}

TEST(Judgments, ParsesJsonLinesAndReportsBadLines) {
    std::istringstream good(R"({"id":"p1","known":{"A":"a1"},"target":"B","options":["b0","b1"],"judgments":["b0","CANNOT_DECIDE"]}

{"target":"C","options":["c0"],"judgments":["NONE_OF_THE_ABOVE"]}
)");
    const auto set = parse_judgments(good);
    ASSERT_EQ(set.size(), 2u);
    EXPECT_EQ(set[0].known, (std::vector<std::pair<std::string, std::string>>{{"A", "a1"}}));
    EXPECT_EQ(set[1].id, "line3");
    std::istringstream bad("{\"target\":\"B\",\"options\":[\"b0\"],\"judgments\":[\"b0\"]}\n{not json\n");
    try {
        parse_judgments(bad);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    std::istringstream none("{\"target\":\"B\",\"options\":[\"b0\"],\"judgments\":[]}\n");
    EXPECT_THROW(parse_judgments(none), ParseError);
}

TEST(ClassOverlap, SetArithmetic) {
    auto same = class_overlap_prf({1, 2}, {1, 2});
    EXPECT_EQ(*same.precision, 1.0);
    EXPECT_EQ(*same.recall, 1.0);
    EXPECT_EQ(*same.f1, 1.0);
    auto disjoint = class_overlap_prf({1}, {2});
    EXPECT_EQ(*disjoint.f1, 0.0);
    auto half = class_overlap_prf({0, 1}, {1, 2});
    EXPECT_DOUBLE_EQ(*half.precision, 0.5);
    EXPECT_DOUBLE_EQ(*half.recall, 0.5);
    EXPECT_DOUBLE_EQ(*half.f1, 0.5);
    auto no_human = class_overlap_prf({0}, {});
    EXPECT_FALSE(no_human.recall.has_value());
    EXPECT_FALSE(no_human.f1.has_value());
}

TEST(ClassOverlap, ThresholdIsStrictlyAboveOneOverN) {
    const std::vector<double> d{0.25, 0.5, 0.25, 0.0};
    EXPECT_EQ(classes_above_threshold(d), (std::vector<std::size_t>{1}));
}

TEST(Spearman, RankCorrelationExamples) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> up{2, 4, 9, 10, 30}, down{5, 4, 3, 2, 1};
    EXPECT_NEAR(spearman(x, up), 1.0, 1e-12);
    EXPECT_NEAR(spearman(x, down), -1.0, 1e-12);
    // Ties: ranks of y are 1, 2.5, 2.5, 4 -> rho = 0.9486832981.
    const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 2, 3};
    EXPECT_NEAR(spearman(a, b), 0.9486832981, 1e-9);
    EXPECT_EQ(spearman(a, std::vector<double>{1, 1, 1, 1}), 0.0);
}

TEST(DivergenceMetrics, AgreeWithJsOnRandomPairs) {
    Rng rng(2024);
    std::vector<std::vector<double>> ps, qs;
    for (int i = 0; i < 1000; ++i) {
        ps.push_back(random_simplex(11, rng));
        qs.push_back(random_simplex(11, rng));
    }
    std::vector<double> js;
    for (std::size_t i = 0; i < ps.size(); ++i) js.push_back(js_divergence(ps[i], qs[i]));
    for (auto metric : all_divergence_metrics()) {
        std::vector<double> other;
        for (std::size_t i = 0; i < ps.size(); ++i) other.push_back(divergence(metric, ps[i], qs[i]));
        EXPECT_GE(spearman(js, other), 0.85) << to_string(metric);
    }
}

namespace {

ExemplarTable corpus() { return deterministic_corpus({}); }

}  // namespace

TEST(TopK, MonotoneInKAndCompleteAtFullVocabulary) {
    const auto t = corpus();
    const auto nb = NbModel::fit(t);
    EvalOptions o;
    o.ks = {1, 2, 3, 5, 8};
    const auto report = evaluate_accuracy(nb, t, o);
    for (const auto& fa : report.facets) {
        for (std::size_t j = 1; j < o.ks.size(); ++j) EXPECT_LE(*fa.accuracy(j - 1), *fa.accuracy(j));
    }
    EXPECT_EQ(*report.accuracy(kFacetA, 8), 1.0);
    EXPECT_EQ(*report.accuracy(kFacetB, 8), 1.0);
    EXPECT_EQ(*report.accuracy(kFacetB, 1), 1.0);  // B is a function of A, which is always known
}

TEST(TopK, ThreadCountDoesNotChangeTheReport) {
    const auto t = corpus();
    const auto nb = NbModel::fit(t);
    EvalOptions one, many;
    one.threads = 1;
    many.threads = 4;
    one.input_mask_rate = many.input_mask_rate = 0.5;
    const auto a = evaluate_accuracy(nb, t, one), b = evaluate_accuracy(nb, t, many);
    for (std::size_t f = 0; f < a.facets.size(); ++f) {
        EXPECT_EQ(a.facets[f].evaluated, b.facets[f].evaluated);
        EXPECT_EQ(a.facets[f].hits, b.facets[f].hits);
    }
}

TEST(TopK, FacetWithoutTestValuesIsNotApplicable) {
    const auto t = build_table({{"x", {"a", "b"}}, {"y", {"p"}}},
                               {{0, 0}, {1, 0}, {0, kMissing}}, {Split::Train, Split::Train, Split::Test});
    const auto report = topk_accuracy(MfvModel::fit(t), t, 1);
    EXPECT_TRUE(report.accuracy(0, 1).has_value());
    EXPECT_FALSE(report.accuracy(1, 1).has_value());
    EXPECT_NE(to_csv(report, t.schema()).find("N/A"), std::string::npos);
    EXPECT_EQ(to_json(report, t.schema())["facets"][1]["top1"], "N/A");
}

TEST(ShiftCurve, BucketsPartitionRowsAndADeterminesB) {
    SyntheticOptions so;
    so.a_missing = 0.3;
    const auto t = deterministic_corpus(so);
    const auto nb = NbModel::fit(t);
    const auto all = shift_curve(nb, t, kFacetB);
    std::size_t with_b = 0;
    for (std::size_t r : t.rows_in(Split::Test))
        if (t.cell(r, kFacetB) != kMissing) ++with_b;
    EXPECT_EQ(all.evaluated(), with_b);

    const auto with_a = shift_curve(nb, t, kFacetB, kFacetA);
    for (const auto& b : with_a.buckets) {
        EXPECT_GE(b.known_facets, 1u);
        EXPECT_EQ(b.top1(), 1.0);
    }
    for (std::size_t i = 1; i < all.buckets.size(); ++i)
        EXPECT_LT(all.buckets[i - 1].known_facets, all.buckets[i].known_facets);

    const auto csv = to_csv({all}, t.schema());
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "facet,known_facets,top1,top3,n,low_confidence");
}

TEST(ShiftCurve, RegimeThresholds) {
    EXPECT_EQ(classify_regime(0.5), Regime::Positive);
    EXPECT_EQ(classify_regime(0.0), Regime::None);
    EXPECT_EQ(classify_regime(-0.31), Regime::Negative);
}

TEST(HumanEvaluation, MatchingJudgmentsScoreLowDivergence) {
    const auto t = corpus();
    const auto nb = NbModel::fit(t);
    JudgmentSet set;
    JudgmentProfile p;
    p.id = "p";
    p.known = {{"A", "a2"}};
    p.target = "B";
    p.options = {"b3", "b0"};
    p.choices = std::vector<std::string>(10, "b3");  // b3 = f(a2)
    set.push_back(p);
    p.choices = std::vector<std::string>(10, "b0");
    set.push_back(p);
    const auto report = human_evaluation(nb, set);
    ASSERT_EQ(report.per_profile_divergence.size(), 2u);
    EXPECT_LT(report.per_profile_divergence[0], 0.05);
    EXPECT_GT(report.per_profile_divergence[1], 0.9);
    ASSERT_EQ(report.facets.size(), 1u);
    EXPECT_NEAR(report.facets[0].mean_divergence, report.mean_divergence, 1e-12);

    p.target = "nope";
    EXPECT_THROW(human_evaluation(nb, {p}), ValidationError);
}

TEST(HumanEvaluation, ProjectionKeepsResidualMass) {
    const auto t = corpus();
    const std::vector<double> full{0.5, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05, 0.0};
    const auto d = project_to_options(t.schema(), kFacetA, full, {"a0", "a5"});
    EXPECT_EQ(d.size(), 3u);
    EXPECT_DOUBLE_EQ(d[0], 0.5);
    EXPECT_DOUBLE_EQ(d[1], 0.05);
    EXPECT_NEAR(d[2], 0.45, 1e-12);
    EXPECT_THROW(project_to_options(t.schema(), kFacetA, full, {"a0", "a0"}), ValidationError);
}

TEST(HumanEvaluation, HigherEntropyFacetsDivergeMoreUnderNaiveBayes) {
    // Five independent facets whose marginals flatten from one to the next;
    // NB can only predict the marginal, so divergence from the truth grows with entropy.
    Rng rng(31);
    const std::vector<double> peaks{0.9, 0.7, 0.5, 0.3, 0.2};
    std::vector<FacetSpec> specs;
    for (std::size_t f = 0; f < peaks.size(); ++f)
        specs.push_back({"t" + std::to_string(f), {"v0", "v1", "v2", "v3", "v4"}});
    std::vector<std::vector<ValueIndex>> rows;
    for (int i = 0; i < 2000; ++i) {
        std::vector<ValueIndex> row;
        for (double peak : peaks) row.push_back(rng.bernoulli(peak) ? 0u : static_cast<ValueIndex>(rng.below(5)));
        rows.push_back(row);
    }
    const auto t = build_table(specs, rows, assign_splits(rows.size(), 31));
    const auto nb = NbModel::fit(t);
    std::vector<double> entropy, mean_div;
    const auto counts = training_value_counts(t);
    for (std::size_t f = 0; f < peaks.size(); ++f) {
        entropy.push_back(facet_entropy(counts[f]).normalized);
        double total = 0.0;
        std::size_t n = 0;
        for (std::size_t r : t.rows_in(Split::Test)) {
            std::vector<ValueIndex> q(t.row(r).begin(), t.row(r).end());
            q[f] = kMissing;
            std::vector<double> truth(5, 0.0);
            truth[t.cell(r, f)] = 1.0;
            total += js_divergence(nb.predict_facet({q, {}}, f), truth);
            ++n;
        }
        mean_div.push_back(total / static_cast<double>(n));
    }
    EXPECT_GT(spearman(entropy, mean_div), 0.0);
}
