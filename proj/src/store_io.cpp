#include "profiling/store_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "profiling/binary_io.hpp"
#include "profiling/errors.hpp"

namespace profiling {

namespace {

constexpr std::string_view kTableMagic = "PRFT";

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

}  // namespace

nlohmann::json schema_to_json(const FacetSchema& schema) {
    nlohmann::json facets = nlohmann::json::array();
    for (const auto& f : schema.facets())
        facets.push_back({{"name", f.name}, {"vocabulary", f.vocabulary}, {"value_counts", f.value_counts}});
    return {{"format", "facet-schema"},
            {"version", kSchemaFormatVersion},
            {"fingerprint", fingerprint_hex(schema.fingerprint())},
            {"facets", std::move(facets)}};
}

FacetSchema schema_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format").get<std::string>() != "facet-schema") throw FormatError("not a facet-schema document");
        if (int v = doc.at("version").get<int>(); v != kSchemaFormatVersion)
            throw VersionMismatchError("schema version " + std::to_string(v) + " unsupported (expected " +
                                       std::to_string(kSchemaFormatVersion) + ")");
        std::vector<Facet> facets;
        for (const auto& f : doc.at("facets"))
            facets.push_back({f.at("name").get<std::string>(), f.at("vocabulary").get<std::vector<std::string>>(),
                              f.at("value_counts").get<std::vector<std::uint64_t>>()});
        FacetSchema schema(std::move(facets));
        if (doc.contains("fingerprint") && doc["fingerprint"].get<std::string>() != fingerprint_hex(schema.fingerprint()))
            throw FingerprintMismatchError("schema fingerprint does not match its contents");
        return schema;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed schema document: ") + e.what());
    }
}

void save_schema(const FacetSchema& schema, const std::string& path) {
    auto out = open_out(path);
    out << schema_to_json(schema).dump(2) << '\n';
    if (!out) throw IoError("error writing '" + path + "'");
}

FacetSchema load_schema(const std::string& path) {
    auto in = open_in(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("'" + path + "' is not valid JSON: " + e.what());
    }
    return schema_from_json(doc);
}

void save_table(const ExemplarTable& table, const std::string& path) {
    auto out = open_out(path, std::ios::binary);
    binary::write_bytes(out, kTableMagic);
    binary::write<std::uint16_t>(out, kTableFormatVersion);
    binary::write<std::uint64_t>(out, table.schema().fingerprint());
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(table.facets()));
    binary::write<std::uint64_t>(out, table.rows());
    for (const auto& id : table.entity_ids()) {
        binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
        binary::write_bytes(out, id);
    }
    for (Split s : table.splits()) binary::write<std::uint8_t>(out, static_cast<std::uint8_t>(s));
    for (std::size_t f = 0; f < table.facets(); ++f)
        for (std::size_t r = 0; r < table.rows(); ++r) binary::write<std::uint32_t>(out, table.cell(r, f));
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(table.vector_dim()));
    if (table.vector_dim() > 0) {
        for (auto p : table.vector_presence()) binary::write<std::uint8_t>(out, p);
        for (double v : table.vector_storage()) binary::write<double>(out, v);
    }
    if (!out) throw IoError("error writing '" + path + "'");
}

ExemplarTable load_table(std::shared_ptr<const FacetSchema> schema, const std::string& path) {
    auto in = open_in(path, std::ios::binary);
    std::string magic(4, '\0');
    in.read(magic.data(), 4);
    if (in.gcount() != 4 || magic != kTableMagic) throw BadMagicError("'" + path + "' is not an exemplar table file");
    auto version = binary::read<std::uint16_t>(in, "version");
    if (version != kTableFormatVersion)
        throw VersionMismatchError("table format version " + std::to_string(version) + " unsupported");
    auto fingerprint = binary::read<std::uint64_t>(in, "fingerprint");
    if (fingerprint != schema->fingerprint())
        throw FingerprintMismatchError("table '" + path + "' was written for schema " + fingerprint_hex(fingerprint) +
                                       ", not " + fingerprint_hex(schema->fingerprint()));
    auto n_facets = binary::read<std::uint32_t>(in, "facet count");
    if (n_facets != schema->size()) throw FormatError("facet count disagrees with schema");
    auto n_rows = binary::read<std::uint64_t>(in, "row count");

    std::vector<std::string> ids;
    ids.reserve(n_rows);
    for (std::uint64_t r = 0; r < n_rows; ++r) {
        auto len = binary::read<std::uint32_t>(in, "entity id length");
        ids.push_back(binary::read_string(in, len, "entity id"));
    }
    std::vector<Split> splits(n_rows);
    for (auto& s : splits) {
        auto tag = binary::read<std::uint8_t>(in, "split tag");
        if (tag > 2) throw FormatError("invalid split tag " + std::to_string(tag));
        s = static_cast<Split>(tag);
    }
    std::vector<ValueIndex> cells(n_rows * n_facets);
    for (std::size_t f = 0; f < n_facets; ++f)
        for (std::size_t r = 0; r < n_rows; ++r) cells[r * n_facets + f] = binary::read<std::uint32_t>(in, "cell");

    ExemplarTable table(std::move(schema), std::move(ids), std::move(cells), std::move(splits));
    auto dim = binary::read<std::uint32_t>(in, "vector dimension");
    if (dim > 0) {
        std::vector<std::uint8_t> presence(n_rows);
        for (auto& p : presence) p = binary::read<std::uint8_t>(in, "vector presence");
        std::vector<std::optional<std::vector<double>>> vectors(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) {
            std::vector<double> v(dim);
            for (auto& x : v) x = binary::read<double>(in, "vector value");
            if (presence[r]) vectors[r] = std::move(v);
        }
        table.set_vectors(dim, vectors);
    }
    return table;
}

std::map<std::string, std::vector<double>> read_vector_sidecar(const std::string& path) {
    auto in = open_in(path);
    std::map<std::string, std::vector<double>> out;
    std::string line;
    std::size_t line_no = 0, dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw ParseError("expected entity_id<TAB>vector", line_no);
        std::istringstream values(line.substr(tab + 1));
        std::vector<double> v;
        std::string tok;
        while (values >> tok) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError("non-numeric vector component '" + tok + "'", line_no);
            }
        }
        if (v.empty()) throw ParseError("empty vector", line_no);
        if (dim == 0) dim = v.size();
        if (v.size() != dim)
            throw ParseError("vector has " + std::to_string(v.size()) + " components, expected " + std::to_string(dim), line_no);
        out[line.substr(0, tab)] = std::move(v);
    }
    return out;
}

void write_vector_sidecar(const std::map<std::string, std::vector<double>>& vectors, const std::string& path) {
    auto out = open_out(path);
    out.precision(17);
    for (const auto& [id, v] : vectors) {
        out << id << '\t';
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
        out << '\n';
    }
    if (!out) throw IoError("error writing '" + path + "'");
}

std::size_t attach_vectors(ExemplarTable& table, const std::map<std::string, std::vector<double>>& vectors) {
    std::size_t dim = vectors.empty() ? 0 : vectors.begin()->second.size();
    std::vector<std::optional<std::vector<double>>> per_row(table.rows());
    std::size_t without = 0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        auto it = vectors.find(table.entity_id(r));
        if (it == vectors.end()) {
            ++without;
            continue;
        }
        per_row[r] = it->second;
    }
    table.set_vectors(dim, per_row);
    return without;
}

void save_store(const ExemplarTable& table, const std::string& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw IoError("cannot create directory '" + directory + "': " + ec.message());
    save_schema(table.schema(), directory + "/schema.json");
    save_table(table, directory + "/table.bin");
}

Store load_store(const std::string& directory) {
    auto schema = std::make_shared<const FacetSchema>(load_schema(directory + "/schema.json"));
    auto table = std::make_shared<const ExemplarTable>(load_table(schema, directory + "/table.bin"));
    return {schema, table};
}

}  // namespace profiling
