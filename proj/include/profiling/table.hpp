#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "profiling/schema.hpp"

namespace profiling {

enum class Split : std::uint8_t { Train = 0, Dev = 1, Test = 2 };

std::string_view to_string(Split split);

/// Background knowledge: one row per entity, one cell per facet.
///
/// Cells are stored row-major. Rows may carry a fixed-size entity vector used
/// by the embedding predictor; the dimension is shared across the table.
class ExemplarTable {
public:
    ExemplarTable(std::shared_ptr<const FacetSchema> schema, std::vector<std::string> entity_ids,
                  std::vector<ValueIndex> cells, std::vector<Split> splits);

    const FacetSchema& schema() const noexcept { return *schema_; }
    std::shared_ptr<const FacetSchema> schema_ptr() const noexcept { return schema_; }

    std::size_t rows() const noexcept { return entity_ids_.size(); }
    std::size_t facets() const noexcept { return schema_->size(); }

    std::span<const ValueIndex> row(std::size_t r) const {
        return {cells_.data() + r * facets(), facets()};
    }
    ValueIndex cell(std::size_t r, std::size_t facet) const { return cells_[r * facets() + facet]; }
    const std::vector<ValueIndex>& cells() const noexcept { return cells_; }

    const std::string& entity_id(std::size_t r) const { return entity_ids_.at(r); }
    const std::vector<std::string>& entity_ids() const noexcept { return entity_ids_; }
    Split split(std::size_t r) const { return splits_.at(r); }
    const std::vector<Split>& splits() const noexcept { return splits_; }

    std::vector<std::size_t> rows_in(Split split) const;

    std::size_t vector_dim() const noexcept { return vector_dim_; }
    bool has_vector(std::size_t r) const { return vector_dim_ > 0 && has_vector_.at(r) != 0; }
    std::span<const double> vector(std::size_t r) const {
        return {vectors_.data() + r * vector_dim_, vector_dim_};
    }
    /// Attaches entity vectors; rows without one get nullopt. All present vectors must share `dim`.
    void set_vectors(std::size_t dim, const std::vector<std::optional<std::vector<double>>>& per_row);
    /// Raw storage: rows() * vector_dim() values, zero for rows without a vector.
    const std::vector<double>& vector_storage() const noexcept { return vectors_; }
    const std::vector<std::uint8_t>& vector_presence() const noexcept { return has_vector_; }

    bool operator==(const ExemplarTable& other) const;

private:
    std::shared_ptr<const FacetSchema> schema_;
    std::vector<std::string> entity_ids_;
    std::vector<ValueIndex> cells_;
    std::vector<Split> splits_;
    std::size_t vector_dim_ = 0;
    std::vector<double> vectors_;
    std::vector<std::uint8_t> has_vector_;
};

struct FacetSpec {
    std::string name;
    std::vector<std::string> vocabulary;
};

/// Builds schema and table together from already-encoded cells, computing the
/// schema's value counts from TRAIN rows. Entity ids default to "row<i>".
ExemplarTable build_table(std::vector<FacetSpec> facets,
                          const std::vector<std::vector<ValueIndex>>& rows,
                          std::vector<Split> splits = {}, std::vector<std::string> entity_ids = {});

/// Per-label TRAIN counts for every facet of `table`.
std::vector<std::vector<std::uint64_t>> training_value_counts(const ExemplarTable& table);

}  // namespace profiling
