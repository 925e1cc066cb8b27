#pragma once

// JSON model files and CSV output for the command-line tool.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmam/config.hpp"
#include "pmam/gig1.hpp"
#include "pmam/linalg.hpp"
#include "pmam/poisson.hpp"

namespace pmam::io {

enum class ModelKind { DtmcDense, CtmcDense, Mg1, Gim1, Qbd, Gig1, MapG1Rca };

std::string to_string(ModelKind kind);
ModelKind parse_kind(const std::string& text);

/// A state given either as a flat index or as (level, phase) with phases
/// numbered from 1.
struct StateRef {
    std::size_t first = 0;
    std::optional<std::size_t> phase;

    static StateRef parse(const std::string& text);
    std::size_t resolve(std::size_t block_size) const;
    bool operator==(const StateRef&) const = default;
};

struct ModelFile {
    ModelKind kind = ModelKind::DtmcDense;
    std::string name;
    std::optional<DenseMatrix> matrix;       // P or Q for the dense kinds
    std::optional<BlockSequences> blocks;    // block kinds
    std::size_t labels_block_size = 1;       // dense kinds: phases per level when labelling states
    std::optional<ForcingFunction> forcing;
    std::optional<StateRef> anchor;
    std::vector<std::size_t> censor_set;
    SolverConfig config;

    bool dense() const noexcept { return kind == ModelKind::DtmcDense || kind == ModelKind::CtmcDense; }
    std::size_t block_size() const;
};

/// Parses and validates; throws Error(InvalidModel, ...) on malformed input.
ModelFile parse_model(const nlohmann::json& doc);
ModelFile load_model(const std::string& path);
nlohmann::json to_json(const ModelFile& model);

/// "map-g1-neg" or "scalar-gig1".
ModelFile builtin_model(const std::string& name);

/// Field-by-field comparison; numbers compare bitwise.
bool same_model(const ModelFile& a, const ModelFile& b);

/// 12 significant digits.
std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(const std::vector<double>& values);
};

/// Comma separated, header first, LF line endings.
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace pmam::io
