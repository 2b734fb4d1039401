#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <cmath>
#include <vector>

#include "profiling/rng.hpp"
#include "profiling/table.hpp"

namespace profiling::oracle {

/// Naive Bayes posterior for `target` by direct counting over TRAIN rows,
/// multiplying probabilities in linear space.
inline std::vector<double> nb_brute_force(const ExemplarTable& table, std::span<const ValueIndex> evidence,
                                          std::size_t target, double alpha) {
    const auto& schema = table.schema();
    const auto train = table.rows_in(Split::Train);
    const std::size_t vt = schema.vocabulary_size(target);
    std::vector<double> score(vt, 0.0);
    double n_target = 0.0;
    for (std::size_t r : train)
        if (table.cell(r, target) != kMissing) n_target += 1.0;
    for (ValueIndex y = 0; y < vt; ++y) {
        double n_y = 0.0;
        for (std::size_t r : train)
            if (table.cell(r, target) == y) n_y += 1.0;
        double s = (n_y + alpha) / (n_target + alpha * static_cast<double>(vt));
        for (std::size_t e = 0; e < schema.size(); ++e) {
            if (e == target || evidence[e] == kMissing) continue;
            double joint = 0.0, observed = 0.0;
            for (std::size_t r : train) {
                if (table.cell(r, target) != y || table.cell(r, e) == kMissing) continue;
                observed += 1.0;
                if (table.cell(r, e) == evidence[e]) joint += 1.0;
            }
            s *= (joint + alpha) / (observed + alpha * static_cast<double>(schema.vocabulary_size(e)));
        }
        score[y] = s;
    }
    double z = 0.0;
    for (double s : score) z += s;
    for (double& s : score) s /= z;
    return score;
}

/// Tiny corpus for NB checks: 2 or 3 facets, 2-4 values each, 1-8 TRAIN rows, ~20% missing.
inline ExemplarTable random_small_corpus(Rng& rng) {
    const std::size_t facets = 2 + rng.below(2);
    const std::size_t rows = 1 + rng.below(8);
    std::vector<FacetSpec> specs;
    for (std::size_t f = 0; f < facets; ++f) {
        FacetSpec s{"f" + std::to_string(f), {}};
        const std::size_t v = 2 + rng.below(3);
        for (std::size_t j = 0; j < v; ++j) s.vocabulary.push_back("v" + std::to_string(j));
        specs.push_back(std::move(s));
    }
    std::vector<std::vector<ValueIndex>> cells(rows);
    for (auto& row : cells)
        for (std::size_t f = 0; f < facets; ++f)
            row.push_back(rng.bernoulli(0.2) ? kMissing
                                             : static_cast<ValueIndex>(rng.below(specs[f].vocabulary.size())));
    return build_table(std::move(specs), cells);
}

/// Every evidence assignment for `target`: each other facet MISSING or any value.
inline std::vector<std::vector<ValueIndex>> all_evidence(const FacetSchema& schema, std::size_t target) {
    std::vector<std::vector<ValueIndex>> out{std::vector<ValueIndex>(schema.size(), kMissing)};
    for (std::size_t e = 0; e < schema.size(); ++e) {
        if (e == target) continue;
        std::vector<std::vector<ValueIndex>> next;
        for (const auto& partial : out) {
            next.push_back(partial);
            for (ValueIndex v = 0; v < schema.vocabulary_size(e); ++v) {
                auto copy = partial;
                copy[e] = v;
                next.push_back(std::move(copy));
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace profiling::oracle
