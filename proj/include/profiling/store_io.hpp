#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "profiling/schema.hpp"
#include "profiling/table.hpp"

namespace profiling {

inline constexpr int kSchemaFormatVersion = 1;
inline constexpr std::uint16_t kTableFormatVersion = 1;

nlohmann::json schema_to_json(const FacetSchema& schema);
FacetSchema schema_from_json(const nlohmann::json& doc);

void save_schema(const FacetSchema& schema, const std::string& path);
FacetSchema load_schema(const std::string& path);

/// Binary columnar layout, little-endian:
///   "PRFT" | u16 version | u64 schema fingerprint | u32 facets | u64 rows
///   | rows x (u32 length + id bytes) | rows x u8 split
///   | facets x rows x u32 cell (0xFFFFFFFF = missing)
///   | u32 vector dim | if dim > 0: rows x u8 presence + rows x dim f64
void save_table(const ExemplarTable& table, const std::string& path);
ExemplarTable load_table(std::shared_ptr<const FacetSchema> schema, const std::string& path);

/// Reads `entity_id<TAB>v1 v2 ...` lines. All vectors must share one dimension.
std::map<std::string, std::vector<double>> read_vector_sidecar(const std::string& path);
void write_vector_sidecar(const std::map<std::string, std::vector<double>>& vectors,
                          const std::string& path);

/// Attaches sidecar vectors to rows by entity id; returns the count of rows left without one.
std::size_t attach_vectors(ExemplarTable& table, const std::map<std::string, std::vector<double>>& vectors);

/// A store directory holds schema.json and table.bin.
struct Store {
    std::shared_ptr<const FacetSchema> schema;
    std::shared_ptr<const ExemplarTable> table;
};

void save_store(const ExemplarTable& table, const std::string& directory);
Store load_store(const std::string& directory);

}  // namespace profiling
