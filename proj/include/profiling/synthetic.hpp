#pragma once

#include <cstdint>
#include <ostream>

#include "profiling/table.hpp"

namespace profiling {

/// Facets of the deterministic corpus.
///   A: 8 values, a0 slightly favoured (20%), the rest equal.
///   B: 8 values, B = (3A + 5) mod 8, always present.
///   C, D: independent uniform noise (5 and 6 values), each missing with `noise_missing`.
struct SyntheticOptions {
    std::size_t rows = 1000;
    std::uint64_t seed = 0;
    double a_missing = 0.0;
    double noise_missing = 0.3;
};

inline constexpr std::size_t kFacetA = 0;
inline constexpr std::size_t kFacetB = 1;

ValueIndex synthetic_b_of_a(ValueIndex a);

ExemplarTable deterministic_corpus(const SyntheticOptions& options = {});

/// Facets "sign" (neg/pos) and "quadrant" (q0..q3) are functions of two hidden
/// signs s0, s1. Each vector is s0*u0 + s1*u1 + noise, with u0, u1 fixed random
/// directions and standard normal noise per coordinate.
ExemplarTable separable_vector_corpus(std::size_t rows, std::size_t dim, std::uint64_t seed);

/// Writes `entity<TAB>facet<TAB>label` lines for every known cell; rows with no
/// known cell are written as a bare entity id.
void write_triples(const ExemplarTable& table, std::ostream& out);

}  // namespace profiling
