#include "profiling/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <sstream>
#include <unordered_map>

#include "profiling/errors.hpp"
#include "profiling/rng.hpp"

namespace profiling {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

}  // namespace

std::vector<RawRecord> parse_triples(std::istream& in) {
    std::vector<RawRecord> records;
    std::unordered_map<std::string, std::size_t> by_entity;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line) || line.front() == '#') continue;
        auto fields = split_tabs(line);
        if (fields.size() != 1 && fields.size() != 3)
            throw ParseError("expected 3 tab-separated fields (entity, facet, value), got " +
                                 std::to_string(fields.size()),
                             line_no);
        if (fields[0].empty()) throw ParseError("empty entity id", line_no);
        std::string entity(fields[0]);
        auto [it, inserted] = by_entity.emplace(entity, records.size());
        if (inserted) records.push_back(RawRecord{entity, {}, {}, {}});
        RawRecord& rec = records[it->second];
        if (fields.size() == 1) continue;
        if (fields[1].empty()) throw ParseError("empty facet name", line_no);
        if (fields[2].empty()) throw ParseError("empty value for facet '" + std::string(fields[1]) + "'", line_no);
        if (fields[1] == kBirthDateFacet) {
            if (!rec.birth_date) rec.birth_date = std::string(fields[2]);
        } else if (fields[1] == kDeathDateFacet) {
            if (!rec.death_date) rec.death_date = std::string(fields[2]);
        } else {
            rec.assertions.emplace_back(std::string(fields[1]), std::string(fields[2]));
        }
    }
    return records;
}

std::vector<RawRecord> read_triples_file(const std::string& path) {
    gzFile file = gzopen(path.c_str(), "rb");
    if (!file) throw IoError("cannot open '" + path + "'");
    std::string content;
    char buf[1 << 16];
    int n;
    while ((n = gzread(file, buf, sizeof buf)) > 0) content.append(buf, static_cast<std::size_t>(n));
    int err = 0;
    const char* msg = gzerror(file, &err);
    std::string error_text = (n < 0 && msg) ? msg : "";
    gzclose(file);
    if (n < 0) throw IoError("error reading '" + path + "': " + error_text);
    std::istringstream in(content);
    return parse_triples(in);
}

std::optional<Date> parse_date(std::string_view text) {
    Date d;
    std::size_t pos = 0;
    bool negative = false;
    if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
        negative = text[0] == '-';
        pos = 1;
    }
    auto read_int = [&](int& out, std::size_t min_digits, std::size_t max_digits) {
        std::size_t start = pos;
        while (pos < text.size() && pos - start < max_digits && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos - start < min_digits) return false;
        std::from_chars(text.data() + start, text.data() + pos, out);
        return true;
    };
    if (!read_int(d.year, 1, 9)) return std::nullopt;
    if (negative) d.year = -d.year;
    if (pos < text.size()) {
        if (text[pos++] != '-' || !read_int(d.month, 2, 2) || d.month < 1 || d.month > 12) return std::nullopt;
        if (pos < text.size()) {
            if (text[pos++] != '-' || !read_int(d.day, 2, 2) || d.day < 1 || d.day > 31) return std::nullopt;
            // Tolerate a trailing time component ("T00:00:00Z").
            if (pos < text.size() && text[pos] != 'T') return std::nullopt;
        }
    }
    return d;
}

namespace {

std::string ordinal(int n) {
    const int mod100 = n % 100;
    const char* suffix = "th";
    if (mod100 < 11 || mod100 > 13) {
        switch (n % 10) {
            case 1: suffix = "st"; break;
            case 2: suffix = "nd"; break;
            case 3: suffix = "rd"; break;
            default: break;
        }
    }
    return std::to_string(n) + suffix;
}

bool precedes(const Date& later, const Date& earlier) {
    if (later.year != earlier.year) return later.year < earlier.year;
    if (later.month == 0 || earlier.month == 0) return false;
    if (later.month != earlier.month) return later.month < earlier.month;
    if (later.day == 0 || earlier.day == 0) return false;
    return later.day < earlier.day;
}

}  // namespace

std::string century_label(int year) {
    if (year >= 1) return ordinal((year + 99) / 100);
    // Astronomical year 0 is 1 BCE.
    return ordinal((1 - year + 99) / 100) + " BCE";
}

std::string lifespan_label(int years) {
    const int lo = (years / 5) * 5;
    return "[" + std::to_string(lo) + "," + std::to_string(lo + 5) + ")";
}

DerivedDates derive_date_facets(const std::optional<Date>& birth, const std::optional<Date>& death) {
    DerivedDates out;
    if (!birth) return out;
    if (death && precedes(*death, *birth)) {
        out.warning = "death date precedes birth date (" + std::to_string(death->year) + " < " +
                      std::to_string(birth->year) + ")";
        return out;
    }
    out.century = century_label(birth->year);
    if (death) out.lifespan = lifespan_label(death->year - birth->year);
    return out;
}

std::string resolve_multivalue(const std::vector<std::string>& asserted,
                               const std::map<std::string, std::uint64_t>& frequencies) {
    const std::string* best = nullptr;
    std::uint64_t best_count = 0;
    for (const auto& label : asserted) {
        auto it = frequencies.find(label);
        std::uint64_t count = it == frequencies.end() ? 0 : it->second;
        if (!best || count > best_count || (count == best_count && label < *best)) {
            best = &label;
            best_count = count;
        }
    }
    return *best;
}

std::vector<Split> assign_splits(std::size_t rows, std::uint64_t seed) {
    const std::size_t n_train = (8 * rows + 5) / 10;
    const std::size_t n_dev = (rows + 5) / 10;
    std::vector<std::size_t> order(rows);
    for (std::size_t i = 0; i < rows; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<Split> splits(rows, Split::Test);
    for (std::size_t i = 0; i < rows; ++i) {
        if (i < n_train) splits[order[i]] = Split::Train;
        else if (i < n_train + n_dev) splits[order[i]] = Split::Dev;
    }
    return splits;
}

IngestResult ingest(const std::vector<RawRecord>& records, const IngestOptions& options) {
    if (records.empty()) throw EmptyInputError("no records to ingest");
    if (options.cap == 0) throw ValidationError("vocabulary cap must be at least 1");
    if (options.cap > FacetSchema::kMaxVocabulary)
        throw ValidationError("vocabulary cap exceeds " + std::to_string(FacetSchema::kMaxVocabulary));

    std::vector<std::string> warnings;
    const std::size_t n_rows = records.size();

    // Expand each record into per-row assertions, adding derived date facets.
    std::vector<std::vector<std::pair<std::string, std::string>>> assertions(n_rows);
    bool any_dates = false;
    for (std::size_t r = 0; r < n_rows; ++r) {
        const RawRecord& rec = records[r];
        if (rec.entity_id.empty()) throw ParseError("record " + std::to_string(r) + " has no entity id");
        std::optional<std::string> birth_text = rec.birth_date, death_text = rec.death_date;
        for (const auto& [facet, value] : rec.assertions) {
            if (facet.empty()) throw ParseError("record '" + rec.entity_id + "' has an empty facet name");
            if (facet == kBirthDateFacet) {
                if (!birth_text) birth_text = value;
            } else if (facet == kDeathDateFacet) {
                if (!death_text) death_text = value;
            } else {
                assertions[r].emplace_back(facet, value);
            }
        }
        if (!birth_text && !death_text) continue;
        any_dates = true;
        std::optional<Date> birth, death;
        if (birth_text && !(birth = parse_date(*birth_text)))
            warnings.push_back(rec.entity_id + ": unparseable birth date '" + *birth_text + "'");
        if (death_text && !(death = parse_date(*death_text)))
            warnings.push_back(rec.entity_id + ": unparseable death date '" + *death_text + "'");
        DerivedDates derived = derive_date_facets(birth, death);
        if (derived.warning) warnings.push_back(rec.entity_id + ": " + *derived.warning);
        if (derived.lifespan) assertions[r].emplace_back(std::string(kLifespanFacet), *derived.lifespan);
        if (derived.century) assertions[r].emplace_back(std::string(kCenturyFacet), *derived.century);
    }

    // Facet order: first appearance among asserted facets, derived facets last.
    std::vector<std::string> facet_names;
    std::unordered_map<std::string, std::size_t> facet_pos;
    auto add_facet = [&](const std::string& name) {
        if (facet_pos.emplace(name, facet_names.size()).second) facet_names.push_back(name);
    };
    for (std::size_t r = 0; r < n_rows; ++r)
        for (const auto& [facet, value] : assertions[r])
            if (facet != kLifespanFacet && facet != kCenturyFacet) add_facet(facet);
    if (any_dates) {
        add_facet(std::string(kLifespanFacet));
        add_facet(std::string(kCenturyFacet));
    }
    const std::size_t n_facets = facet_names.size();

    std::vector<Split> splits = assign_splits(n_rows, options.seed);

    // Group assertions per (row, facet) and gather training frequencies.
    std::vector<std::vector<std::vector<std::string>>> grouped(n_rows, std::vector<std::vector<std::string>>(n_facets));
    std::vector<std::map<std::string, std::uint64_t>> train_freq(n_facets);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (const auto& [facet, value] : assertions[r]) {
            std::size_t f = facet_pos.at(facet);
            grouped[r][f].push_back(value);
            if (splits[r] == Split::Train) ++train_freq[f][value];
        }
    }

    std::vector<std::vector<std::optional<std::string>>> resolved(n_rows, std::vector<std::optional<std::string>>(n_facets));
    std::vector<std::map<std::string, std::uint64_t>> resolved_freq(n_facets);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t f = 0; f < n_facets; ++f) {
            const auto& values = grouped[r][f];
            if (values.empty()) continue;
            resolved[r][f] = values.size() == 1 ? values.front() : resolve_multivalue(values, train_freq[f]);
            ++resolved_freq[f][*resolved[r][f]];
        }
    }

    std::vector<Facet> facets(n_facets);
    std::vector<std::unordered_map<std::string, ValueIndex>> codebooks(n_facets);
    for (std::size_t f = 0; f < n_facets; ++f) {
        std::vector<std::pair<std::string, std::uint64_t>> ranked(resolved_freq[f].begin(), resolved_freq[f].end());
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        if (ranked.size() > options.cap) ranked.resize(options.cap);
        facets[f].name = facet_names[f];
        for (auto& [label, count] : ranked) {
            codebooks[f].emplace(label, static_cast<ValueIndex>(facets[f].vocabulary.size()));
            facets[f].vocabulary.push_back(label);
        }
        facets[f].value_counts.assign(facets[f].vocabulary.size(), 0);
    }

    std::vector<ValueIndex> cells(n_rows * n_facets, kMissing);
    std::vector<std::string> ids;
    ids.reserve(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        ids.push_back(records[r].entity_id);
        for (std::size_t f = 0; f < n_facets; ++f) {
            if (!resolved[r][f]) continue;
            auto it = codebooks[f].find(*resolved[r][f]);
            if (it == codebooks[f].end()) continue;
            cells[r * n_facets + f] = it->second;
            if (splits[r] == Split::Train) ++facets[f].value_counts[it->second];
        }
    }

    auto schema = std::make_shared<const FacetSchema>(std::move(facets));
    ExemplarTable table(schema, std::move(ids), std::move(cells), std::move(splits));
    return IngestResult{schema, std::move(table), std::move(warnings)};
}

std::vector<FacetStats> stats(const ExemplarTable& table) {
    const auto counts = training_value_counts(table);
    std::vector<FacetStats> out;
    for (std::size_t f = 0; f < table.facets(); ++f) {
        FacetStats s;
        s.name = table.schema().facet(f).name;
        for (auto c : counts[f]) s.examples += c;
        s.vocabulary_size = table.schema().vocabulary_size(f);
        s.empty = s.examples == 0;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace profiling
