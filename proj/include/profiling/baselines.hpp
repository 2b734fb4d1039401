#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "profiling/checkpoint.hpp"
#include "profiling/profiler.hpp"
#include "profiling/table.hpp"

namespace profiling {

/// Most-frequent-value baseline: each facet's training distribution, ignoring evidence.
class MfvModel final : public Profiler {
public:
    static MfvModel fit(const ExemplarTable& table);
    static MfvModel from_checkpoint(const Checkpoint& checkpoint);

    ModelKind kind() const override { return ModelKind::MFV; }
    const FacetSchema& schema() const override { return *schema_; }
    std::shared_ptr<const FacetSchema> schema_ptr() const override { return schema_; }

    /// Facets without training values get an empty distribution.
    std::vector<std::vector<double>> predict(const ProfileInput& input) const override;
    /// Throws ValidationError naming the facet when it has no training values.
    std::vector<double> predict_facet(const ProfileInput& input, std::size_t facet) const override;
    Checkpoint to_checkpoint() const override;

    /// Modal value, lexicographically smallest label on ties.
    ValueIndex mode(std::size_t facet) const;
    const std::vector<double>& frequencies(std::size_t facet) const { return frequencies_.at(facet); }

private:
    MfvModel(std::shared_ptr<const FacetSchema> schema, std::vector<std::vector<std::uint64_t>> counts);

    std::shared_ptr<const FacetSchema> schema_;
    std::vector<std::vector<std::uint64_t>> counts_;
    std::vector<std::vector<double>> frequencies_;
    std::vector<ValueIndex> modes_;
};

/// Naive Bayes over one-hot facet values with Laplace-alpha smoothing.
///
/// For target t and evidence facets e:
///   P(y_t | evidence) ∝ P(y_t) Π_e P(x_e = y_e | y_t)
/// with P(y_t) = (n(y_t) + α) / (n_t + α v_t) and
/// P(x_e = y | y_t) = (n(y, y_t) + α) / (n_e(y_t) + α v_e), where n_e(y_t)
/// counts training rows with target value y_t and facet e observed.
/// Missing evidence contributes no factor. Products are taken in log space.
class NbModel final : public Profiler {
public:
    static NbModel fit(const ExemplarTable& table, double alpha = 1.0);
    static NbModel from_checkpoint(const Checkpoint& checkpoint);

    ModelKind kind() const override { return ModelKind::NB; }
    const FacetSchema& schema() const override { return *schema_; }
    std::shared_ptr<const FacetSchema> schema_ptr() const override { return schema_; }

    std::vector<std::vector<double>> predict(const ProfileInput& input) const override;
    /// Throws ValidationError for an untrained target or out-of-vocabulary evidence.
    std::vector<double> predict_facet(const ProfileInput& input, std::size_t facet) const override;
    Checkpoint to_checkpoint() const override;

    double alpha() const noexcept { return alpha_; }
    /// Smoothed P(x_evidence = value | x_target = target_value); sums to 1 over `value`.
    double conditional(std::size_t target, ValueIndex target_value, std::size_t evidence, ValueIndex value) const;
    double prior(std::size_t target, ValueIndex value) const;

private:
    struct PairTable {
        std::vector<std::uint64_t> target_totals;                // per target value
        std::unordered_map<std::uint64_t, std::uint64_t> joint;  // (target value << 32 | evidence value)
    };

    NbModel() = default;
    const PairTable& pair(std::size_t target, std::size_t evidence) const {
        return pairs_[target * schema_->size() + evidence];
    }
    std::vector<double> posterior(std::span<const ValueIndex> cells, std::size_t target) const;

    std::shared_ptr<const FacetSchema> schema_;
    double alpha_ = 1.0;
    std::vector<std::vector<std::uint64_t>> prior_counts_;
    std::vector<std::uint64_t> prior_totals_;
    std::vector<PairTable> pairs_;
};

}  // namespace profiling
