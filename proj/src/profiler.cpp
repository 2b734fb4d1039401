#include "profiling/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "profiling/divergence.hpp"
#include "profiling/errors.hpp"

namespace profiling {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::AE: return "AE";
        case ModelKind::EMB: return "EMB";
        case ModelKind::NB: return "NB";
        case ModelKind::MFV: return "MFV";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
    std::string upper = name;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "AE") return ModelKind::AE;
    if (upper == "EMB") return ModelKind::EMB;
    if (upper == "NB") return ModelKind::NB;
    if (upper == "MFV") return ModelKind::MFV;
    throw ValidationError("unknown model kind '" + name + "' (expected ae, emb, nb, or mfv)");
}

GroupQuery GroupQuery::from_labels(const FacetSchema& schema,
                                   const std::vector<std::pair<std::string, std::string>>& known) {
    GroupQuery q;
    for (const auto& [facet_name, label] : known) {
        const std::size_t f = schema.facet_index(facet_name);
        const ValueIndex v = schema.value_index(f, label);
        auto it = std::find_if(q.known.begin(), q.known.end(), [f](const auto& kv) { return kv.first == f; });
        if (it != q.known.end()) {
            if (it->second != v) throw ValidationError("facet '" + facet_name + "' given two different values");
            continue;
        }
        q.known.emplace_back(f, v);
    }
    return q;
}

std::vector<ValueIndex> GroupQuery::cells(const FacetSchema& schema) const {
    std::vector<ValueIndex> out(schema.size(), kMissing);
    for (const auto& [f, v] : known) out.at(f) = v;
    return out;
}

std::vector<double> Profiler::predict_facet(const ProfileInput& input, std::size_t facet) const {
    return predict(input).at(facet);
}

void validate_query(const Profiler& model, const GroupQuery& query) {
    const FacetSchema& schema = model.schema();
    std::vector<bool> seen(schema.size(), false);
    for (const auto& [f, v] : query.known) {
        if (f >= schema.size()) throw ValidationError("query references facet index " + std::to_string(f) + " outside schema");
        if (v == kMissing || v >= schema.vocabulary_size(f))
            throw ValidationError("query value index " + std::to_string(v) + " outside vocabulary of facet '" +
                                  schema.facet(f).name + "'");
        if (seen[f]) throw ValidationError("facet '" + schema.facet(f).name + "' appears twice in query");
        seen[f] = true;
    }
    if (model.uses_entity_vector()) {
        if (query.entity_vector.empty())
            throw ValidationError(to_string(model.kind()) + " model requires an entity vector in the query");
        if (query.entity_vector.size() != model.entity_vector_dim())
            throw ShapeError("entity vector", model.entity_vector_dim(), query.entity_vector.size());
        for (double x : query.entity_vector)
            if (!std::isfinite(x)) throw ValidationError("entity vector holds a non-finite value");
    }
}

ProfileDistribution profile(const Profiler& model, const GroupQuery& query) {
    validate_query(model, query);
    const auto cells = query.cells(model.schema());
    auto dists = model.predict({cells, query.entity_vector});
    ProfileDistribution out;
    out.facets.resize(cells.size());
    for (std::size_t f = 0; f < cells.size(); ++f) {
        if (cells[f] != kMissing) out.facets[f].fixed = cells[f];
        else out.facets[f].distribution = std::move(dists[f]);
    }
    return out;
}

GroupQuery merge_queries(const GroupQuery& base, const GroupQuery& added) {
    GroupQuery merged = base;
    for (const auto& [f, v] : added.known) {
        auto it = std::find_if(merged.known.begin(), merged.known.end(), [f](const auto& kv) { return kv.first == f; });
        if (it == merged.known.end()) merged.known.emplace_back(f, v);
        else if (it->second != v) throw ValidationError("added facts contradict the base group on facet index " + std::to_string(f));
    }
    if (!added.entity_vector.empty()) merged.entity_vector = added.entity_vector;
    return merged;
}

ShiftReport shift(const Profiler& model, const GroupQuery& base, const GroupQuery& added) {
    const GroupQuery merged = merge_queries(base, added);
    const auto before = profile(model, base);
    const auto after = profile(model, merged);
    ShiftReport report;
    for (std::size_t f = 0; f < after.facets.size(); ++f) {
        if (after.facets[f].fixed) continue;
        const auto& p = before.facets[f].distribution;
        const auto& q = after.facets[f].distribution;
        if (q.empty()) continue;
        FacetShift s;
        s.facet = f;
        s.divergence = js_divergence(p, q);
        s.top_before = argmax(p);
        s.top_after = argmax(q);
        s.top_changed = s.top_before != s.top_after;
        report.facets.push_back(s);
    }
    return report;
}

ValueIndex argmax(std::span<const double> distribution) {
    if (distribution.empty()) return kMissing;
    return static_cast<ValueIndex>(std::max_element(distribution.begin(), distribution.end()) - distribution.begin());
}

std::vector<ValueIndex> top_k(std::span<const double> distribution, std::size_t k) {
    std::vector<ValueIndex> order(distribution.size());
    std::iota(order.begin(), order.end(), 0u);
    k = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](ValueIndex a, ValueIndex b) {
                          return distribution[a] > distribution[b] || (distribution[a] == distribution[b] && a < b);
                      });
    order.resize(k);
    return order;
}

}  // namespace profiling
