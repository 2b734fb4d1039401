#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "profiling/divergence.hpp"
#include "profiling/profiler.hpp"
#include "profiling/rng.hpp"
#include "profiling/table.hpp"

namespace profiling {

// ---- top-k accuracy ----

struct EvalOptions {
    std::vector<std::size_t> ks{1, 3};
    Split split = Split::Test;
    /// Each known input cell (never the target) is hidden with this probability.
    double input_mask_rate = 0.0;
    std::uint64_t seed = 0;
    /// Evaluate a (row, target) pair only if this facet is still known in the input.
    std::optional<std::size_t> require_known;
    /// Restrict to one target facet.
    std::optional<std::size_t> only_facet;
    std::size_t threads = 0;  // 0: hardware concurrency
};

struct FacetAccuracy {
    std::size_t facet = 0;
    std::size_t evaluated = 0;
    std::vector<std::size_t> hits;  // parallel to the report's ks

    /// Hit rate for ks[i]; nullopt (N/A) when nothing was evaluated.
    std::optional<double> accuracy(std::size_t i) const;
};

struct AccuracyReport {
    std::string model;
    std::vector<std::size_t> ks;
    std::vector<FacetAccuracy> facets;

    std::optional<double> accuracy(std::size_t facet, std::size_t k) const;
};

/// For every row of the split and every known facet: hide it, predict it from
/// the remaining known facets (or the row's entity vector for EMB), and count a
/// hit when the true value is among the top k. Rows without a vector are not
/// evaluated for vector-driven models.
AccuracyReport evaluate_accuracy(const Profiler& model, const ExemplarTable& table, const EvalOptions& options = {});

AccuracyReport topk_accuracy(const Profiler& model, const ExemplarTable& table, std::size_t k);

nlohmann::json to_json(const AccuracyReport& report, const FacetSchema& schema);
std::string to_csv(const AccuracyReport& report, const FacetSchema& schema);

// ---- accuracy by number of known facets ----

inline constexpr std::size_t kLowConfidenceBucket = 20;

struct ShiftBucket {
    std::size_t known_facets = 0;
    std::size_t evaluated = 0;
    std::size_t top1_hits = 0;
    std::size_t top3_hits = 0;

    double top1() const { return evaluated ? static_cast<double>(top1_hits) / static_cast<double>(evaluated) : 0.0; }
    double top3() const { return evaluated ? static_cast<double>(top3_hits) / static_cast<double>(evaluated) : 0.0; }
    bool low_confidence() const { return evaluated < kLowConfidenceBucket; }
};

enum class Regime { Positive, None, Negative };
std::string to_string(Regime regime);

struct ShiftCurve {
    std::size_t facet = 0;
    std::vector<ShiftBucket> buckets;  // ascending known_facets, empty buckets omitted
    double spearman = 0.0;             // known-facet count vs top-1 over buckets
    Regime regime = Regime::None;

    std::size_t evaluated() const;
};

/// Rows of the split with a known value for `facet`, bucketed by how many other
/// facets are known. `require_known` keeps only rows where that facet is known.
ShiftCurve shift_curve(const Profiler& model, const ExemplarTable& table, std::size_t facet,
                       std::optional<std::size_t> require_known = std::nullopt, Split split = Split::Test);

/// Regime from rank correlation: > 0.3 positive, < -0.3 negative, otherwise none.
Regime classify_regime(double spearman);

/// Columns: facet,known_facets,top1,top3,n,low_confidence
std::string to_csv(const std::vector<ShiftCurve>& curves, const FacetSchema& schema);

// ---- human judgments ----

inline constexpr std::string_view kNoneOfTheAbove = "NONE_OF_THE_ABOVE";
inline constexpr std::string_view kCannotDecide = "CANNOT_DECIDE";

struct JudgmentProfile {
    std::string id;
    std::vector<std::pair<std::string, std::string>> known;
    std::string target;
    std::vector<std::string> options;  // value labels offered to workers
    std::vector<std::string> choices;  // an option label, NONE_OF_THE_ABOVE, or CANNOT_DECIDE
};

using JudgmentSet = std::vector<JudgmentProfile>;

/// One JSON object per line:
/// {"id", "known": {facet: label}, "target", "options": [...], "judgments": [...]}.
/// Throws ParseError with the line number.
JudgmentSet parse_judgments(std::istream& in);
JudgmentSet read_judgments_file(const std::string& path);

/// Distribution over options.size() + 1 classes, the last being "outside the
/// options". NONE_OF_THE_ABOVE votes go to the outside class; CANNOT_DECIDE
/// gives 1/N to every class. Throws ValidationError on no votes or unknown labels.
std::vector<double> aggregate_judgments(const std::vector<std::string>& choices,
                                        const std::vector<std::string>& options);

/// The model's distribution over the same classes: mass of each option plus
/// the remaining mass in the outside class.
std::vector<double> project_to_options(const FacetSchema& schema, std::size_t facet, std::span<const double> full,
                                       const std::vector<std::string>& options);

/// Classes holding more than 1/N of the mass.
std::vector<std::size_t> classes_above_threshold(std::span<const double> distribution);

struct Prf {
    std::optional<double> precision;  // N/A when the system set is empty
    std::optional<double> recall;     // N/A when the human set is empty
    std::optional<double> f1;
};

Prf class_overlap_prf(const std::vector<std::size_t>& system, const std::vector<std::size_t>& human);

struct HumanFacetSummary {
    std::string facet;
    std::size_t profiles = 0;
    double mean_divergence = 0.0;       // mean of per-profile JS divergences
    double pooled_divergence = 0.0;     // JS divergence between label-averaged distributions
    std::optional<double> precision, recall, f1;  // means over profiles where defined
};

struct HumanEvalReport {
    std::vector<HumanFacetSummary> facets;
    double mean_divergence = 0.0;
    std::vector<double> per_profile_divergence;
};

/// Scores a model against a judgment set. Throws ValidationError when a profile
/// references facets or labels outside the model's schema.
HumanEvalReport human_evaluation(const Profiler& model, const JudgmentSet& judgments);
nlohmann::json to_json(const HumanEvalReport& report);

// ---- statistics ----

/// Spearman rank correlation with average ranks for ties; 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Uniform sample from the (k-1)-simplex (flat Dirichlet).
std::vector<double> random_simplex(std::size_t k, Rng& rng);

}  // namespace profiling
