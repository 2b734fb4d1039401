#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "profiling/schema.hpp"

namespace profiling {

struct Checkpoint;

enum class ModelKind { AE, EMB, NB, MFV };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// A group: known (facet, value) pairs, plus an entity vector for models that
/// read one instead of facet values.
struct GroupQuery {
    std::vector<std::pair<std::size_t, ValueIndex>> known;
    std::vector<double> entity_vector;

    /// Throws ValidationError for unknown facets/labels or a facet given two different values.
    static GroupQuery from_labels(const FacetSchema& schema,
                                  const std::vector<std::pair<std::string, std::string>>& known);

    /// Cell vector of width schema.size(); unknown facets are kMissing.
    std::vector<ValueIndex> cells(const FacetSchema& schema) const;
};

/// What a model sees for one prediction.
struct ProfileInput {
    std::span<const ValueIndex> cells;
    std::span<const double> entity_vector;
};

struct FacetProfile {
    std::optional<ValueIndex> fixed;   // set for facets given in the query
    std::vector<double> distribution;  // empty when fixed
};

/// A profile: every facet either fixed by the group or given a distribution.
struct ProfileDistribution {
    std::vector<FacetProfile> facets;
};

/// Common surface of the four profiling models. Implementations are
/// immutable after training and safe for concurrent predict() calls.
class Profiler {
public:
    virtual ~Profiler() = default;

    virtual ModelKind kind() const = 0;
    virtual const FacetSchema& schema() const = 0;
    virtual std::shared_ptr<const FacetSchema> schema_ptr() const = 0;

    /// One distribution per facet, each over that facet's vocabulary.
    virtual std::vector<std::vector<double>> predict(const ProfileInput& input) const = 0;

    /// Distribution for a single facet; defaults to predict()[facet].
    virtual std::vector<double> predict_facet(const ProfileInput& input, std::size_t facet) const;

    /// True when predictions are driven by the entity vector rather than cells.
    virtual bool uses_entity_vector() const { return false; }
    /// Required entity-vector width; 0 when vectors are not used.
    virtual std::size_t entity_vector_dim() const { return 0; }

    virtual Checkpoint to_checkpoint() const = 0;
};

/// Validates the query against the model, then fills every unknown facet's
/// distribution. Known facets are echoed as fixed.
ProfileDistribution profile(const Profiler& model, const GroupQuery& query);

void validate_query(const Profiler& model, const GroupQuery& query);

struct FacetShift {
    std::size_t facet = 0;
    double divergence = 0.0;  // JS divergence, bits
    ValueIndex top_before = kMissing;
    ValueIndex top_after = kMissing;
    bool top_changed = false;
};

struct ShiftReport {
    std::vector<FacetShift> facets;  // facets unknown in base and added
};

/// Merges `added` into `base`; throws ValidationError when they disagree on a facet.
GroupQuery merge_queries(const GroupQuery& base, const GroupQuery& added);

ShiftReport shift(const Profiler& model, const GroupQuery& base, const GroupQuery& added);

/// Index of the largest probability, lowest index on ties.
ValueIndex argmax(std::span<const double> distribution);

/// Indices of the k largest probabilities, descending, ties by lower index.
std::vector<ValueIndex> top_k(std::span<const double> distribution, std::size_t k);

}  // namespace profiling
