#include "profiling/dataspace.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "profiling/errors.hpp"
#include "profiling/ingest.hpp"

namespace profiling {

FacetEntropy facet_entropy(std::span<const std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw ValidationError("entropy of an all-zero count vector is undefined");
    FacetEntropy out;
    const double n = static_cast<double>(total);
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        out.bits -= p * std::log2(p);
    }
    // Clamp rounding residue at the degenerate single-category case.
    if (out.bits < 0.0) out.bits = 0.0;
    out.normalized = total > 1 ? out.bits / std::log2(n) : 0.0;
    return out;
}

double log10_big(const BigInt& value) {
    if (value.is_zero()) return -std::numeric_limits<double>::infinity();
    const std::size_t bits = boost::multiprecision::msb(value) + 1;
    if (bits <= 1000) return std::log10(value.convert_to<double>());
    // Keep the top 64 bits and account for the shifted-out part.
    const std::size_t shift = bits - 64;
    BigInt top = value >> shift;
    return std::log10(top.convert_to<double>()) + static_cast<double>(shift) * std::log10(2.0);
}

DataspaceSize dataspace_size(const FacetSchema& schema, std::uint64_t training_rows) {
    if (training_rows == 0) throw ValidationError("training density needs at least one training row");
    DataspaceSize out;
    out.size = 1;
    for (const auto& f : schema.facets()) {
        if (f.vocabulary.empty()) {
            out.excluded.push_back(f.name);
            continue;
        }
        out.size *= f.vocabulary.size();
    }
    out.avg_density = BigRational(out.size, BigInt(training_rows));
    out.log10_size = log10_big(out.size);
    out.log10_avg_density = out.log10_size - std::log10(static_cast<double>(training_rows));
    return out;
}

DataspaceReport dataspace_report(const ExemplarTable& table) {
    DataspaceReport report;
    const auto counts = training_value_counts(table);
    for (const auto& s : stats(table)) {
        FacetReport f{s.name, s.examples, s.vocabulary_size, 0.0, 0.0, s.empty};
        if (!s.empty) {
            auto h = facet_entropy(counts[report.facets.size()]);
            f.entropy = h.bits;
            f.normalized_entropy = h.normalized;
        }
        report.facets.push_back(std::move(f));
    }
    report.training_rows = table.rows_in(Split::Train).size();
    report.space = dataspace_size(table.schema(), report.training_rows);
    return report;
}

nlohmann::json to_json(const DataspaceReport& report) {
    nlohmann::json facets = nlohmann::json::array();
    for (const auto& f : report.facets)
        facets.push_back({{"name", f.name},
                          {"n_ex", f.examples},
                          {"v", f.vocabulary_size},
                          {"entropy_bits", f.entropy},
                          {"normalized_entropy", f.normalized_entropy},
                          {"empty", f.empty}});
    return {{"facets", std::move(facets)},
            {"training_rows", report.training_rows},
            {"d_size", report.space.size.str()},
            {"log10_d_size", report.space.log10_size},
            {"d_avg_d", report.space.avg_density.str()},
            {"log10_d_avg_d", report.space.log10_avg_density},
            {"excluded_facets", report.space.excluded}};
}

std::string to_text(const DataspaceReport& report) {
    std::size_t width = std::string_view("attribute").size();
    for (const auto& f : report.facets) width = std::max(width, f.name.size());
    std::string out;
    char line[512];
    std::snprintf(line, sizeof line, "%*s | %12s %6s %6s %6s\n", static_cast<int>(width), "attribute", "n_ex", "v_i",
                  "H_i", "H_i'");
    out += line;
    out += std::string(width + 1, '-') + "+" + std::string(36, '-') + "\n";
    for (const auto& f : report.facets) {
        std::snprintf(line, sizeof line, "%*s | %12llu %6zu %6.2f %6.2f%s\n", static_cast<int>(width), f.name.c_str(),
                      static_cast<unsigned long long>(f.examples), f.vocabulary_size, f.entropy, f.normalized_entropy,
                      f.empty ? "  (no training values)" : "");
        out += line;
    }
    std::snprintf(line, sizeof line, "\ntraining rows: %llu\nlog10 d_size: %.4f\nlog10 d_avg_d: %.4f\n",
                  static_cast<unsigned long long>(report.training_rows), report.space.log10_size,
                  report.space.log10_avg_density);
    out += line;
    for (const auto& name : report.space.excluded) out += "excluded (empty vocabulary): " + name + "\n";
    return out;
}

}  // namespace profiling
