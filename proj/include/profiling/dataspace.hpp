#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "profiling/schema.hpp"
#include "profiling/table.hpp"

namespace profiling {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct FacetEntropy {
    double bits = 0.0;        // H_i
    double normalized = 0.0;  // H_i / log2(n_ex(i)); 0 when n_ex(i) <= 1
};

/// Shannon entropy (bits) of a count vector. Throws ValidationError when all counts are zero.
FacetEntropy facet_entropy(std::span<const std::uint64_t> counts);

/// log10 of a non-negative big integer; -inf for zero.
double log10_big(const BigInt& value);

struct DataspaceSize {
    BigInt size;            // product of vocabulary sizes
    BigRational avg_density;  // size / training rows
    double log10_size = 0.0;
    double log10_avg_density = 0.0;
    std::vector<std::string> excluded;  // facets with empty vocabulary
};

/// Throws ValidationError when training_rows is zero.
DataspaceSize dataspace_size(const FacetSchema& schema, std::uint64_t training_rows);

struct FacetReport {
    std::string name;
    std::uint64_t examples = 0;
    std::size_t vocabulary_size = 0;
    double entropy = 0.0;
    double normalized_entropy = 0.0;
    bool empty = false;
};

struct DataspaceReport {
    std::vector<FacetReport> facets;
    DataspaceSize space;
    std::uint64_t training_rows = 0;
};

DataspaceReport dataspace_report(const ExemplarTable& table);

nlohmann::json to_json(const DataspaceReport& report);
/// Aligned columns: attribute, n_ex, v_i, H_i, H_i'.
std::string to_text(const DataspaceReport& report);

}  // namespace profiling
