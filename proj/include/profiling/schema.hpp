#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace profiling {

using ValueIndex = std::uint32_t;

/// Cell sentinel for an absent value; also the on-disk column sentinel.
inline constexpr ValueIndex kMissing = 0xFFFFFFFFu;

inline constexpr std::size_t kDefaultVocabularyCap = 3000;

struct Facet {
    std::string name;
    std::vector<std::string> vocabulary;
    /// Training occurrence count per vocabulary entry.
    std::vector<std::uint64_t> value_counts;
};

/// Ordered facets with their value vocabularies. Immutable once built.
class FacetSchema {
public:
    FacetSchema() = default;

    /// Throws ValidationError on duplicate facet names, duplicate labels within
    /// a facet, vocabularies over kMaxVocabulary, or count/vocabulary length mismatch.
    explicit FacetSchema(std::vector<Facet> facets);

    static constexpr std::size_t kMaxVocabulary = kDefaultVocabularyCap;

    std::size_t size() const noexcept { return facets_.size(); }
    const Facet& facet(std::size_t i) const { return facets_.at(i); }
    const std::vector<Facet>& facets() const noexcept { return facets_; }

    std::size_t vocabulary_size(std::size_t i) const { return facets_.at(i).vocabulary.size(); }
    /// Sum of all vocabulary sizes.
    std::size_t total_vocabulary() const noexcept { return total_vocabulary_; }

    std::optional<std::size_t> find_facet(std::string_view name) const;
    std::optional<ValueIndex> find_value(std::size_t facet, std::string_view label) const;

    /// Like find_facet/find_value but throws ValidationError listing valid names.
    std::size_t facet_index(std::string_view name) const;
    ValueIndex value_index(std::size_t facet, std::string_view label) const;

    const std::string& label(std::size_t facet, ValueIndex value) const;

    std::uint64_t training_count(std::size_t facet) const;

    /// Stable 64-bit hash of facet order, names, and vocabularies (not counts).
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    bool operator==(const FacetSchema& other) const;

private:
    std::vector<Facet> facets_;
    std::unordered_map<std::string, std::size_t> facet_lookup_;
    std::vector<std::unordered_map<std::string, ValueIndex>> value_lookup_;
    std::size_t total_vocabulary_ = 0;
    std::uint64_t fingerprint_ = 0;
};

std::string fingerprint_hex(std::uint64_t fingerprint);

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace profiling
