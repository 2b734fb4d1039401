#include "profiling/checkpoint.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "profiling/autoencoder.hpp"
#include "profiling/baselines.hpp"
#include "profiling/binary_io.hpp"
#include "profiling/embedding_predictor.hpp"
#include "profiling/errors.hpp"
#include "profiling/store_io.hpp"

namespace profiling {

namespace {

constexpr std::string_view kCheckpointMagic = "PRFM";

}  // namespace

const ParameterBlob& Checkpoint::blob(const std::string& name) const {
    for (const auto& b : blobs)
        if (b.name == name) return b;
    throw FormatError("checkpoint has no parameter blob '" + name + "'");
}

ParameterBlob to_blob(std::string name, const neural::Matrix& m) {
    return {std::move(name), m.rows(), m.cols(), std::vector<double>(m.values().begin(), m.values().end())};
}

neural::Matrix to_matrix(const ParameterBlob& blob) {
    neural::Matrix m(blob.rows, blob.cols);
    std::copy(blob.values.begin(), blob.values.end(), m.values().begin());
    return m;
}

void write_checkpoint(const Checkpoint& cp, const std::string& path) {
    if (!cp.schema) throw ValidationError("checkpoint has no schema");
    nlohmann::json manifest = nlohmann::json::array();
    for (const auto& b : cp.blobs) {
        if (b.values.size() != b.rows * b.cols) throw ShapeError("blob '" + b.name + "'", b.rows * b.cols, b.values.size());
        manifest.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
    }
    nlohmann::json header = {{"kind", to_string(cp.kind)},
                             {"fingerprint", fingerprint_hex(cp.schema->fingerprint())},
                             {"schema", schema_to_json(*cp.schema)},
                             {"config", cp.config},
                             {"epoch_reached", cp.epoch_reached},
                             {"blobs", std::move(manifest)}};
    header["best_dev_loss"] = cp.best_dev_loss ? nlohmann::json(*cp.best_dev_loss) : nlohmann::json(nullptr);
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    binary::write_bytes(out, kCheckpointMagic);
    binary::write<std::uint16_t>(out, kCheckpointFormatVersion);
    binary::write<std::uint64_t>(out, text.size());
    binary::write_bytes(out, text);
    for (const auto& b : cp.blobs)
        for (double v : b.values) binary::write<double>(out, v);
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string magic(4, '\0');
    in.read(magic.data(), 4);
    if (in.gcount() != 4 || magic != kCheckpointMagic) throw BadMagicError("'" + path + "' is not a model checkpoint");
    const auto version = binary::read<std::uint16_t>(in, "checkpoint version");
    if (version != kCheckpointFormatVersion)
        throw VersionMismatchError("checkpoint format version " + std::to_string(version) + " unsupported (expected " +
                                   std::to_string(kCheckpointFormatVersion) + ")");
    const auto header_len = binary::read<std::uint64_t>(in, "header length");
    if (header_len > (std::uint64_t{1} << 32)) throw FormatError("implausible checkpoint header length");
    const std::string text = binary::read_string(in, header_len, "checkpoint header");

    Checkpoint cp;
    try {
        const auto header = nlohmann::json::parse(text);
        cp.kind = model_kind_from_string(header.at("kind").get<std::string>());
        auto schema = std::make_shared<const FacetSchema>(schema_from_json(header.at("schema")));
        if (header.at("fingerprint").get<std::string>() != fingerprint_hex(schema->fingerprint()))
            throw FingerprintMismatchError("checkpoint '" + path + "' schema does not match its recorded fingerprint");
        cp.schema = std::move(schema);
        cp.config = header.at("config");
        cp.epoch_reached = header.at("epoch_reached").get<std::size_t>();
        if (!header.at("best_dev_loss").is_null()) cp.best_dev_loss = header["best_dev_loss"].get<double>();
        for (const auto& b : header.at("blobs"))
            cp.blobs.push_back({b.at("name").get<std::string>(), b.at("rows").get<std::size_t>(),
                                b.at("cols").get<std::size_t>(), {}});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed checkpoint header in '" + path + "': " + e.what());
    } catch (const ValidationError& e) {
        if (dynamic_cast<const FingerprintMismatchError*>(&e)) throw;
        throw FormatError("invalid checkpoint header in '" + path + "': " + e.what());
    }

    for (auto& b : cp.blobs) {
        b.values.resize(b.rows * b.cols);
        for (double& v : b.values) v = binary::read<double>(in, "parameter blob");
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checkpoint blobs");
    return cp;
}

void save_model(const Profiler& model, const std::string& path) { write_checkpoint(model.to_checkpoint(), path); }

std::unique_ptr<Profiler> model_from_checkpoint(const Checkpoint& cp) {
    switch (cp.kind) {
        case ModelKind::MFV: return std::make_unique<MfvModel>(MfvModel::from_checkpoint(cp));
        case ModelKind::NB: return std::make_unique<NbModel>(NbModel::from_checkpoint(cp));
        case ModelKind::AE: return std::make_unique<AeModel>(AeModel::from_checkpoint(cp));
        case ModelKind::EMB: return std::make_unique<EmbModel>(EmbModel::from_checkpoint(cp));
    }
    throw FormatError("unknown model kind");
}

std::unique_ptr<Profiler> load_model(const std::string& path, const FacetSchema* expected) {
    const Checkpoint cp = read_checkpoint(path);
    if (expected && expected->fingerprint() != cp.schema->fingerprint())
        throw FingerprintMismatchError("checkpoint '" + path + "' was trained on schema " +
                                       fingerprint_hex(cp.schema->fingerprint()) + ", expected " +
                                       fingerprint_hex(expected->fingerprint()));
    return model_from_checkpoint(cp);
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fingerprint_hex(fnv1a64(buf.str()));
}

}  // namespace profiling
