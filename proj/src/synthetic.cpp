#include "profiling/synthetic.hpp"


#include "profiling/errors.hpp"
#include "profiling/ingest.hpp"
#include "profiling/rng.hpp"

namespace profiling {

namespace {

std::vector<std::string> labels(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

}  // namespace

ValueIndex synthetic_b_of_a(ValueIndex a) { return (3 * a + 5) % 8; }

ExemplarTable deterministic_corpus(const SyntheticOptions& options) {
    if (options.rows < 10) throw ValidationError("synthetic corpus needs at least 10 rows");
    Rng rng(options.seed);
    std::vector<std::vector<ValueIndex>> rows;
    rows.reserve(options.rows);
    for (std::size_t r = 0; r < options.rows; ++r) {
        ValueIndex a = rng.bernoulli(0.2) ? 0 : static_cast<ValueIndex>(1 + rng.below(7));
        const ValueIndex b = synthetic_b_of_a(a);
        const bool a_known = !rng.bernoulli(options.a_missing);
        const ValueIndex c = static_cast<ValueIndex>(rng.below(5));
        const ValueIndex d = static_cast<ValueIndex>(rng.below(6));
        const bool c_known = !rng.bernoulli(options.noise_missing);
        const bool d_known = !rng.bernoulli(options.noise_missing);
        rows.push_back({a_known ? a : kMissing, b, c_known ? c : kMissing, d_known ? d : kMissing});
    }
    return build_table({{"A", labels("a", 8)}, {"B", labels("b", 8)}, {"C", labels("c", 5)}, {"D", labels("d", 6)}},
                       rows, assign_splits(options.rows, options.seed));
}

ExemplarTable separable_vector_corpus(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw ValidationError("separable corpus needs a vector dimension");
    if (rows < 10) throw ValidationError("separable corpus needs at least 10 rows");
    Rng rng(seed);
    std::vector<double> u0(dim), u1(dim);
    for (double& x : u0) x = rng.normal();
    for (double& x : u1) x = rng.normal();
    std::vector<std::vector<ValueIndex>> cells;
    std::vector<std::optional<std::vector<double>>> vectors;
    for (std::size_t r = 0; r < rows; ++r) {
        const bool pos0 = rng.bernoulli(0.5);
        const bool pos1 = rng.bernoulli(0.5);
        const double s0 = pos0 ? 1.0 : -1.0, s1 = pos1 ? 1.0 : -1.0;
        std::vector<double> v(dim);
        for (std::size_t i = 0; i < dim; ++i) v[i] = s0 * u0[i] + s1 * u1[i] + rng.normal();
        cells.push_back({pos0 ? 1u : 0u, static_cast<ValueIndex>((pos0 ? 2 : 0) + (pos1 ? 1 : 0))});
        vectors.emplace_back(std::move(v));
    }
    ExemplarTable table =
        build_table({{"sign", {"neg", "pos"}}, {"quadrant", labels("q", 4)}}, cells, assign_splits(rows, seed));
    table.set_vectors(dim, std::move(vectors));
    return table;
}

void write_triples(const ExemplarTable& table, std::ostream& out) {
    const auto& schema = table.schema();
    for (std::size_t r = 0; r < table.rows(); ++r) {
        bool any = false;
        for (std::size_t f = 0; f < table.facets(); ++f) {
            const ValueIndex v = table.cell(r, f);
            if (v == kMissing) continue;
            out << table.entity_id(r) << '\t' << schema.facet(f).name << '\t' << schema.label(f, v) << '\n';
            any = true;
        }
        if (!any) out << table.entity_id(r) << '\n';
    }
}

}  // namespace profiling
