#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "profiling/schema.hpp"
#include "profiling/table.hpp"

namespace profiling {

inline constexpr std::string_view kBirthDateFacet = "birth_date";
inline constexpr std::string_view kDeathDateFacet = "death_date";
inline constexpr std::string_view kLifespanFacet = "lifespan_range";
inline constexpr std::string_view kCenturyFacet = "century_of_birth";

struct RawRecord {
    std::string entity_id;
    /// (facet, value) pairs; a facet may repeat.
    std::vector<std::pair<std::string, std::string>> assertions;
    std::optional<std::string> birth_date;
    std::optional<std::string> death_date;
};

/// Parses tab-separated `entity<TAB>facet<TAB>value` lines, grouping by entity in
/// first-appearance order. A line holding only an entity id declares an entity
/// with no assertions. Blank lines are skipped. birth_date/death_date facets fill
/// the record's date fields. Throws ParseError.
std::vector<RawRecord> parse_triples(std::istream& in);

/// Same as parse_triples, reading a plain or gzip-compressed file.
std::vector<RawRecord> read_triples_file(const std::string& path);

/// Calendar date; month/day are 0 when only a year was given.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;
};

/// Accepts "YYYY", "YYYY-MM", "YYYY-MM-DD", with an optional leading '-' or '+'.
std::optional<Date> parse_date(std::string_view text);

std::string century_label(int year);
std::string lifespan_label(int years);

struct DerivedDates {
    std::optional<std::string> lifespan;
    std::optional<std::string> century;
    std::optional<std::string> warning;
};

DerivedDates derive_date_facets(const std::optional<Date>& birth, const std::optional<Date>& death);

/// Picks the asserted label with the highest count in `frequencies`; ties and
/// unknown labels fall back to lexicographic order. `asserted` must be non-empty.
std::string resolve_multivalue(const std::vector<std::string>& asserted,
                               const std::map<std::string, std::uint64_t>& frequencies);

struct IngestOptions {
    std::size_t cap = kDefaultVocabularyCap;
    std::uint64_t seed = 0;
};

struct IngestResult {
    std::shared_ptr<const FacetSchema> schema;
    ExemplarTable table;
    std::vector<std::string> warnings;
};

/// Builds vocabularies (capped, frequency-ranked, lexicographic ties), resolves
/// multi-valued cells, derives date facets, and splits rows 80/10/10.
/// Throws EmptyInputError on no records, ValidationError when cap is 0 or an
/// entity id is empty.
IngestResult ingest(const std::vector<RawRecord>& records, const IngestOptions& options = {});

/// Seeded 80/10/10 assignment over `rows` rows.
std::vector<Split> assign_splits(std::size_t rows, std::uint64_t seed);

struct FacetStats {
    std::string name;
    std::uint64_t examples = 0;  // non-missing TRAIN cells
    std::size_t vocabulary_size = 0;
    bool empty = false;          // no training values
};

std::vector<FacetStats> stats(const ExemplarTable& table);

}  // namespace profiling
