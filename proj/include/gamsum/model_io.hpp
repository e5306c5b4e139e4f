#ifndef GAMSUM_MODEL_IO_HPP
#define GAMSUM_MODEL_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include "gamsum/gam.hpp"
#include "gamsum/gaminet.hpp"

namespace gamsum {

enum class ModelKind { Ebm, Gaminet, Logistic };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& text);

// Versioned, human-readable model file. Floats are written as hex floats
// so load(save(m)) is bit-exact, field order is fixed so identical models
// produce identical bytes, and a trailing checksum guards the payload.
struct ModelFile {
    int format_version = 1;
    ModelKind kind = ModelKind::Ebm;
    std::vector<std::string> feature_names;
    std::string config_echo; // training configuration, one line
    AdditiveModel model;
    // gaminet only: the native subnetworks ride along with the grids
    std::optional<double> native_bias;
    std::vector<Subnetwork> subnetworks;
};

void save_model(const ModelFile& file, const std::string& path);
ModelFile load_model(const std::string& path);

std::string serialize_model(const ModelFile& file);
ModelFile parse_model(const std::string& text);

} // namespace gamsum

#endif
