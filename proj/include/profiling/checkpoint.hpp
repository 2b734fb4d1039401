#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "profiling/neural/matrix.hpp"
#include "profiling/profiler.hpp"
#include "profiling/schema.hpp"

namespace profiling {

inline constexpr std::uint16_t kCheckpointFormatVersion = 1;

struct ParameterBlob {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
};

/// Serialized model: kind, schema, training config, and raw parameters.
struct Checkpoint {
    ModelKind kind = ModelKind::MFV;
    std::shared_ptr<const FacetSchema> schema;
    nlohmann::json config = nlohmann::json::object();
    std::optional<double> best_dev_loss;
    std::size_t epoch_reached = 0;
    std::vector<ParameterBlob> blobs;

    const ParameterBlob& blob(const std::string& name) const;
};

ParameterBlob to_blob(std::string name, const neural::Matrix& m);
neural::Matrix to_matrix(const ParameterBlob& blob);

/// Layout: "PRFM" | u16 version | u64 header length | JSON header | f64 LE blobs.
/// The header carries kind, schema, fingerprint, config, and the blob manifest.
void write_checkpoint(const Checkpoint& checkpoint, const std::string& path);

/// Throws BadMagicError, VersionMismatchError, TruncatedFileError, FormatError,
/// or FingerprintMismatchError (embedded schema does not hash to the recorded fingerprint).
Checkpoint read_checkpoint(const std::string& path);

void save_model(const Profiler& model, const std::string& path);

/// Reconstructs any model kind. When `expected` is given, refuses checkpoints
/// trained against a different schema.
std::unique_ptr<Profiler> load_model(const std::string& path, const FacetSchema* expected = nullptr);
std::unique_ptr<Profiler> model_from_checkpoint(const Checkpoint& checkpoint);

/// Hex FNV-1a digest of a file's bytes.
std::string file_digest(const std::string& path);

}  // namespace profiling
