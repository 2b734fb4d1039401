#include "profiling/table.hpp"

#include "profiling/errors.hpp"

namespace profiling {

std::string_view to_string(Split split) {
    switch (split) {
        case Split::Train: return "TRAIN";
        case Split::Dev: return "DEV";
        case Split::Test: return "TEST";
    }
    return "?";
}

ExemplarTable::ExemplarTable(std::shared_ptr<const FacetSchema> schema, std::vector<std::string> entity_ids,
                             std::vector<ValueIndex> cells, std::vector<Split> splits)
    : schema_(std::move(schema)),
      entity_ids_(std::move(entity_ids)),
      cells_(std::move(cells)),
      splits_(std::move(splits)) {
    if (!schema_) throw ValidationError("exemplar table requires a schema");
    const std::size_t n = schema_->size();
    if (cells_.size() != entity_ids_.size() * n) throw ShapeError("exemplar table cells", entity_ids_.size() * n, cells_.size());
    if (splits_.size() != entity_ids_.size()) throw ShapeError("exemplar table splits", entity_ids_.size(), splits_.size());
    for (std::size_t r = 0; r < entity_ids_.size(); ++r) {
        for (std::size_t f = 0; f < n; ++f) {
            ValueIndex v = cells_[r * n + f];
            if (v != kMissing && v >= schema_->vocabulary_size(f))
                throw ValidationError("row " + std::to_string(r) + " facet '" + schema_->facet(f).name +
                                      "': value index " + std::to_string(v) + " outside vocabulary of size " +
                                      std::to_string(schema_->vocabulary_size(f)));
        }
    }
}

std::vector<std::size_t> ExemplarTable::rows_in(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < splits_.size(); ++r)
        if (splits_[r] == split) out.push_back(r);
    return out;
}

void ExemplarTable::set_vectors(std::size_t dim, const std::vector<std::optional<std::vector<double>>>& per_row) {
    if (per_row.size() != rows()) throw ShapeError("entity vectors", rows(), per_row.size());
    vector_dim_ = dim;
    vectors_.assign(rows() * dim, 0.0);
    has_vector_.assign(rows(), 0);
    for (std::size_t r = 0; r < rows(); ++r) {
        if (!per_row[r]) continue;
        if (per_row[r]->size() != dim) throw ShapeError("entity vector for '" + entity_ids_[r] + "'", dim, per_row[r]->size());
        std::copy(per_row[r]->begin(), per_row[r]->end(), vectors_.begin() + static_cast<std::ptrdiff_t>(r * dim));
        has_vector_[r] = 1;
    }
}

bool ExemplarTable::operator==(const ExemplarTable& other) const {
    return *schema_ == *other.schema_ && entity_ids_ == other.entity_ids_ && cells_ == other.cells_ &&
           splits_ == other.splits_ && vector_dim_ == other.vector_dim_ && vectors_ == other.vectors_ &&
           has_vector_ == other.has_vector_;
}

std::vector<std::vector<std::uint64_t>> training_value_counts(const ExemplarTable& table) {
    std::vector<std::vector<std::uint64_t>> counts(table.facets());
    for (std::size_t f = 0; f < table.facets(); ++f) counts[f].assign(table.schema().vocabulary_size(f), 0);
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (table.split(r) != Split::Train) continue;
        for (std::size_t f = 0; f < table.facets(); ++f)
            if (auto v = table.cell(r, f); v != kMissing) ++counts[f][v];
    }
    return counts;
}

ExemplarTable build_table(std::vector<FacetSpec> facets, const std::vector<std::vector<ValueIndex>>& rows,
                          std::vector<Split> splits, std::vector<std::string> entity_ids) {
    const std::size_t n = facets.size();
    if (splits.empty()) splits.assign(rows.size(), Split::Train);
    if (entity_ids.empty())
        for (std::size_t r = 0; r < rows.size(); ++r) entity_ids.push_back("row" + std::to_string(r));
    if (splits.size() != rows.size()) throw ShapeError("build_table splits", rows.size(), splits.size());

    std::vector<Facet> schema_facets;
    for (auto& spec : facets)
        schema_facets.push_back({std::move(spec.name), std::move(spec.vocabulary), {}});
    for (auto& f : schema_facets) f.value_counts.assign(f.vocabulary.size(), 0);

    std::vector<ValueIndex> cells;
    cells.reserve(rows.size() * n);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != n) throw ShapeError("build_table row " + std::to_string(r), n, rows[r].size());
        for (std::size_t f = 0; f < n; ++f) {
            ValueIndex v = rows[r][f];
            if (v != kMissing && v >= schema_facets[f].vocabulary.size())
                throw ValidationError("build_table: value index out of vocabulary");
            if (v != kMissing && splits[r] == Split::Train) ++schema_facets[f].value_counts[v];
            cells.push_back(v);
        }
    }
    auto schema = std::make_shared<const FacetSchema>(std::move(schema_facets));
    return ExemplarTable(std::move(schema), std::move(entity_ids), std::move(cells), std::move(splits));
}

}  // namespace profiling
