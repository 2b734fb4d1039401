#include "profiling/schema.hpp"

#include <cstdio>

#include "profiling/errors.hpp"

namespace profiling {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint));
    return buf;
}

namespace {

std::string join_names(const std::vector<std::string>& names, std::size_t limit = 20) {
    std::string out;
    for (std::size_t i = 0; i < names.size() && i < limit; ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    if (names.size() > limit) out += ", ...";
    return out;
}

}  // namespace

FacetSchema::FacetSchema(std::vector<Facet> facets) : facets_(std::move(facets)) {
    // Length-prefixed fields keep the hash unambiguous.
    std::uint64_t h = fnv1a64("facet-schema/1");
    auto mix = [&h](std::string_view s) {
        h = fnv1a64(std::to_string(s.size()) + ":", h);
        h = fnv1a64(s, h);
    };
    value_lookup_.resize(facets_.size());
    for (std::size_t i = 0; i < facets_.size(); ++i) {
        Facet& f = facets_[i];
        if (f.name.empty()) throw ValidationError("facet " + std::to_string(i) + " has an empty name");
        if (!facet_lookup_.emplace(f.name, i).second)
            throw ValidationError("duplicate facet name '" + f.name + "'");
        if (f.vocabulary.size() > kMaxVocabulary)
            throw ValidationError("facet '" + f.name + "' vocabulary exceeds " +
                                  std::to_string(kMaxVocabulary) + " labels");
        if (f.value_counts.empty()) f.value_counts.assign(f.vocabulary.size(), 0);
        if (f.value_counts.size() != f.vocabulary.size())
            throw ValidationError("facet '" + f.name + "' has " + std::to_string(f.value_counts.size()) +
                                  " counts for " + std::to_string(f.vocabulary.size()) + " labels");
        mix(f.name);
        h = fnv1a64(std::to_string(f.vocabulary.size()) + "#", h);
        for (std::size_t j = 0; j < f.vocabulary.size(); ++j) {
            if (!value_lookup_[i].emplace(f.vocabulary[j], static_cast<ValueIndex>(j)).second)
                throw ValidationError("facet '" + f.name + "' has duplicate label '" + f.vocabulary[j] + "'");
            mix(f.vocabulary[j]);
        }
        total_vocabulary_ += f.vocabulary.size();
    }
    fingerprint_ = h;
}

std::optional<std::size_t> FacetSchema::find_facet(std::string_view name) const {
    auto it = facet_lookup_.find(std::string(name));
    if (it == facet_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<ValueIndex> FacetSchema::find_value(std::size_t facet, std::string_view label) const {
    const auto& lookup = value_lookup_.at(facet);
    auto it = lookup.find(std::string(label));
    if (it == lookup.end()) return std::nullopt;
    return it->second;
}

std::size_t FacetSchema::facet_index(std::string_view name) const {
    if (auto i = find_facet(name)) return *i;
    std::vector<std::string> names;
    for (const auto& f : facets_) names.push_back(f.name);
    throw ValidationError("unknown facet '" + std::string(name) + "'; valid facets: " + join_names(names));
}

ValueIndex FacetSchema::value_index(std::size_t facet, std::string_view label) const {
    if (auto v = find_value(facet, label)) return *v;
    throw ValidationError("unknown value '" + std::string(label) + "' for facet '" + facets_.at(facet).name +
                          "'; valid labels: " + join_names(facets_.at(facet).vocabulary));
}

const std::string& FacetSchema::label(std::size_t facet, ValueIndex value) const {
    return facets_.at(facet).vocabulary.at(value);
}

std::uint64_t FacetSchema::training_count(std::size_t facet) const {
    std::uint64_t total = 0;
    for (auto c : facets_.at(facet).value_counts) total += c;
    return total;
}

bool FacetSchema::operator==(const FacetSchema& other) const {
    if (facets_.size() != other.facets_.size()) return false;
    for (std::size_t i = 0; i < facets_.size(); ++i) {
        const auto& a = facets_[i];
        const auto& b = other.facets_[i];
        if (a.name != b.name || a.vocabulary != b.vocabulary || a.value_counts != b.value_counts) return false;
    }
    return true;
}

}  // namespace profiling
