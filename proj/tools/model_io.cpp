#include "model_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "pmam/censor.hpp"
#include "pmam/ctmc.hpp"
#include "pmam/error.hpp"
#include "pmam/examples.hpp"

namespace pmam::io {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidModel, msg); }

DenseMatrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) invalid(what + " must be a nonempty array of rows");
    std::vector<std::vector<double>> rows;
    for (const json& r : j) {
        if (!r.is_array()) invalid(what + " must be an array of rows");
        std::vector<double> row;
        for (const json& v : r) {
            if (!v.is_number()) invalid(what + " has a non-numeric entry");
            row.push_back(v.get<double>());
        }
        rows.push_back(std::move(row));
    }
    try {
        return DenseMatrix::from_rows(rows);
    } catch (const Error& e) {
        invalid(what + ": " + e.what());
    }
}

json matrix_to_json(const DenseMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (double v : m.row(i)) r.push_back(v);
        rows.push_back(std::move(r));
    }
    return rows;
}

int parse_index(const std::string& key, const std::string& what) {
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(key, &used);
    } catch (const std::exception&) {
        invalid(what + " key '" + key + "' is not an integer");
    }
    if (used != key.size()) invalid(what + " key '" + key + "' is not an integer");
    return value;
}

std::map<int, DenseMatrix> blocks_from_json(const json& j, const std::string& what) {
    if (!j.is_object()) invalid(what + " must be an object keyed by signed block index");
    std::map<int, DenseMatrix> out;
    for (const auto& [key, value] : j.items()) {
        const int idx = parse_index(key, what);
        out[idx] = matrix_from_json(value, what + "_" + key);
    }
    return out;
}

json blocks_to_json(const std::map<int, DenseMatrix>& blocks) {
    json out = json::object();
    for (const auto& [i, blk] : blocks) out[std::to_string(i)] = matrix_to_json(blk);
    return out;
}

SolverConfig config_from_json(const json& j) {
    SolverConfig cfg;
    if (j.is_null()) return cfg;
    if (!j.is_object()) invalid("config must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "truncation") {
            const std::string mode = value.get<std::string>();
            if (mode == "plain") cfg.truncation = TruncationMode::Plain;
            else if (mode == "augment") cfg.truncation = TruncationMode::Augment;
            else invalid("unknown truncation mode '" + mode + "'");
            continue;
        }
        if (!value.is_number()) invalid("config field '" + key + "' must be numeric");
        if (key == "epsilon") cfg.epsilon = value.get<double>();
        else if (key == "max_iterations") cfg.max_iterations = value.get<std::size_t>();
        else if (key == "levels") cfg.levels = value.get<std::size_t>();
        else if (key == "horizon") cfg.horizon = value.get<std::size_t>();
        else if (key == "summand_tolerance") cfg.summand_tolerance = value.get<double>();
        else if (key == "residual_tolerance") cfg.residual_tolerance = value.get<double>();
        else if (key == "tail_tolerance") cfg.tail_tolerance = value.get<double>();
        else if (key == "pivot_tolerance") cfg.pivot_tolerance = value.get<double>();
        else invalid("unknown config field '" + key + "'");
    }
    return cfg;
}

json config_to_json(const SolverConfig& cfg) {
    return json{{"epsilon", cfg.epsilon},
                {"max_iterations", cfg.max_iterations},
                {"levels", cfg.levels},
                {"horizon", cfg.horizon},
                {"summand_tolerance", cfg.summand_tolerance},
                {"residual_tolerance", cfg.residual_tolerance},
                {"tail_tolerance", cfg.tail_tolerance},
                {"pivot_tolerance", cfg.pivot_tolerance},
                {"truncation", cfg.truncation == TruncationMode::Plain ? "plain" : "augment"}};
}

void check_index_range(const std::map<int, DenseMatrix>& blocks, int lo, int hi, const std::string& what) {
    for (const auto& [i, blk] : blocks)
        if (i < lo || i > hi) invalid(what + "_" + std::to_string(i) + " is not allowed for this model kind");
}

bool same_config(const SolverConfig& a, const SolverConfig& b) {
    return a.epsilon == b.epsilon && a.max_iterations == b.max_iterations && a.levels == b.levels &&
           a.horizon == b.horizon && a.summand_tolerance == b.summand_tolerance &&
           a.residual_tolerance == b.residual_tolerance && a.tail_tolerance == b.tail_tolerance &&
           a.pivot_tolerance == b.pivot_tolerance && a.truncation == b.truncation;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::DtmcDense: return "dtmc-dense";
        case ModelKind::CtmcDense: return "ctmc-dense";
        case ModelKind::Mg1: return "mg1";
        case ModelKind::Gim1: return "gim1";
        case ModelKind::Qbd: return "qbd";
        case ModelKind::Gig1: return "gig1";
        case ModelKind::MapG1Rca: return "map-g1-rca";
    }
    return "dtmc-dense";
}

ModelKind parse_kind(const std::string& text) {
    for (ModelKind k : {ModelKind::DtmcDense, ModelKind::CtmcDense, ModelKind::Mg1, ModelKind::Gim1, ModelKind::Qbd,
                        ModelKind::Gig1, ModelKind::MapG1Rca})
        if (to_string(k) == text) return k;
    invalid("unknown model kind '" + text + "'");
}

StateRef StateRef::parse(const std::string& text) {
    StateRef ref;
    const auto comma = text.find(',');
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || s.front() == '-')
            throw Error(ErrorCode::InvalidArgument, "cannot read state '" + text + "'");
        return static_cast<std::size_t>(v);
    };
    if (comma == std::string::npos) {
        ref.first = number(text);
    } else {
        ref.first = number(text.substr(0, comma));
        ref.phase = number(text.substr(comma + 1));
        if (*ref.phase == 0) throw Error(ErrorCode::InvalidArgument, "phases are numbered from 1");
    }
    return ref;
}

std::size_t StateRef::resolve(std::size_t block_size) const {
    if (!phase) return first;
    if (*phase > block_size)
        throw Error(ErrorCode::InvalidArgument,
                    "phase " + std::to_string(*phase) + " exceeds block size " + std::to_string(block_size));
    return first * block_size + (*phase - 1);
}

std::size_t ModelFile::block_size() const { return dense() ? labels_block_size : blocks->m; }

ModelFile parse_model(const json& doc) {
    try {
        if (!doc.is_object()) invalid("model document must be an object");
        ModelFile model;
        model.kind = parse_kind(doc.at("kind").get<std::string>());
        model.name = doc.value("name", std::string());
        model.config = config_from_json(doc.value("config", json()));
        if (doc.contains("forcing")) {
            const json& f = doc.at("forcing");
            if (f.is_string()) {
                model.forcing = ForcingFunction::builtin(f.get<std::string>());
            } else if (f.is_array()) {
                model.forcing = ForcingFunction::table(f.get<std::vector<double>>());
            } else {
                invalid("forcing must be a builtin name or a table");
            }
        }
        if (doc.contains("anchor")) {
            const json& a = doc.at("anchor");
            StateRef ref;
            if (a.is_number_unsigned()) {
                ref.first = a.get<std::size_t>();
            } else if (a.is_array() && a.size() == 2) {
                ref.first = a.at(0).get<std::size_t>();
                ref.phase = a.at(1).get<std::size_t>();
                if (*ref.phase == 0) invalid("anchor phases are numbered from 1");
            } else if (a.is_string()) {
                ref = StateRef::parse(a.get<std::string>());
            } else {
                invalid("anchor must be an index, [level, phase] or \"level,phase\"");
            }
            model.anchor = ref;
        }
        if (doc.contains("censor_set")) model.censor_set = doc.at("censor_set").get<std::vector<std::size_t>>();

        if (model.dense()) {
            const char* field = model.kind == ModelKind::DtmcDense ? "matrix" : "generator";
            if (!doc.contains(field)) invalid(std::string("missing '") + field + "'");
            model.matrix = matrix_from_json(doc.at(field), field);
            if (model.kind == ModelKind::DtmcDense)
                validate_transition_matrix(*model.matrix, true);
            else
                validate_generator(*model.matrix);
            model.labels_block_size = doc.value("block_size", std::size_t{1});
            if (model.labels_block_size == 0) invalid("block_size must be positive");
            return model;
        }

        if (!doc.contains("A") || !doc.contains("B")) invalid("block models need 'A' and 'B'");
        std::map<int, DenseMatrix> a = blocks_from_json(doc.at("A"), "A");
        std::map<int, DenseMatrix> b = blocks_from_json(doc.at("B"), "B");
        if (model.kind == ModelKind::MapG1Rca) {
            model.blocks = build_map_g1_rca(std::move(b), std::move(a));
        } else {
            BlockSequences seq;
            seq.a = std::move(a);
            seq.b = std::move(b);
            seq.repeat_boundary = doc.value("repeat_boundary", false);
            if (seq.b.find(0) == seq.b.end()) invalid("missing B_0");
            seq.m = seq.b.at(0).rows();
            if (doc.contains("block_size") && doc.at("block_size").get<std::size_t>() != seq.m)
                invalid("block_size does not match the blocks");
            switch (model.kind) {
                case ModelKind::Mg1:
                    check_index_range(seq.a, -1, std::numeric_limits<int>::max(), "A");
                    break;
                case ModelKind::Gim1:
                    check_index_range(seq.a, std::numeric_limits<int>::min(), 1, "A");
                    check_index_range(seq.b, std::numeric_limits<int>::min(), 1, "B");
                    break;
                case ModelKind::Qbd:
                    check_index_range(seq.a, -1, 1, "A");
                    check_index_range(seq.b, -1, 1, "B");
                    break;
                case ModelKind::Gig1: {
                    if (!doc.contains("G")) invalid("gig1 models need the G blocks G_1..G_K");
                    const std::map<int, DenseMatrix> g = blocks_from_json(doc.at("G"), "G");
                    int expect = 1;
                    for (const auto& [k, blk] : g) {
                        if (k != expect++) invalid("G blocks must be numbered 1..K without gaps");
                        seq.g_list.push_back(blk);
                    }
                    break;
                }
                default:
                    break;
            }
            seq.validate();
            model.blocks = std::move(seq);
        }
        return model;
    } catch (const json::exception& e) {
        invalid(std::string("malformed model document: ") + e.what());
    }
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open model file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        invalid("cannot parse '" + path + "': " + e.what());
    }
    return parse_model(doc);
}

json to_json(const ModelFile& model) {
    json doc;
    doc["kind"] = to_string(model.kind);
    if (!model.name.empty()) doc["name"] = model.name;
    if (model.dense()) {
        doc[model.kind == ModelKind::DtmcDense ? "matrix" : "generator"] = matrix_to_json(*model.matrix);
        doc["block_size"] = model.labels_block_size;
    } else {
        const BlockSequences& seq = *model.blocks;
        doc["block_size"] = seq.m;
        doc["A"] = blocks_to_json(seq.a);
        doc["B"] = blocks_to_json(seq.b);
        if (model.kind != ModelKind::MapG1Rca) doc["repeat_boundary"] = seq.repeat_boundary;
        if (!seq.g_list.empty()) {
            json g = json::object();
            for (std::size_t k = 0; k < seq.g_list.size(); ++k) g[std::to_string(k + 1)] = matrix_to_json(seq.g_list[k]);
            doc["G"] = std::move(g);
        }
    }
    if (model.forcing) {
        if (model.forcing->kind() == ForcingFunction::Kind::Table)
            doc["forcing"] = model.forcing->table_values();
        else
            doc["forcing"] = model.forcing->name();
    }
    if (model.anchor) {
        if (model.anchor->phase)
            doc["anchor"] = json::array({model.anchor->first, *model.anchor->phase});
        else
            doc["anchor"] = model.anchor->first;
    }
    if (!model.censor_set.empty()) doc["censor_set"] = model.censor_set;
    doc["config"] = config_to_json(model.config);
    return doc;
}

ModelFile builtin_model(const std::string& name) {
    ModelFile model;
    if (name == "map-g1-neg") {
        model.kind = ModelKind::MapG1Rca;
        model.name = name;
        model.blocks = examples::map_g1_negative();
        model.forcing = ForcingFunction::builtin("level-times-phase");
        model.anchor = StateRef{0, 1};
    } else if (name == "scalar-gig1") {
        model.kind = ModelKind::MapG1Rca;
        model.name = name;
        model.blocks = examples::scalar_gig1();
        model.forcing = ForcingFunction::builtin("sqrt-level");
        model.anchor = StateRef{0, std::nullopt};
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown built-in example '" + name + "'");
    }
    return model;
}

bool same_model(const ModelFile& a, const ModelFile& b) {
    if (a.kind != b.kind || a.name != b.name || a.labels_block_size != b.labels_block_size) return false;
    if (a.anchor != b.anchor || a.censor_set != b.censor_set || !same_config(a.config, b.config)) return false;
    if (a.matrix.has_value() != b.matrix.has_value() || (a.matrix && !(*a.matrix == *b.matrix))) return false;
    if (a.forcing.has_value() != b.forcing.has_value()) return false;
    if (a.forcing && (a.forcing->kind() != b.forcing->kind() || a.forcing->table_values() != b.forcing->table_values()))
        return false;
    if (a.blocks.has_value() != b.blocks.has_value()) return false;
    if (a.blocks) {
        const BlockSequences& x = *a.blocks;
        const BlockSequences& y = *b.blocks;
        if (x.m != y.m || x.repeat_boundary != y.repeat_boundary || x.a != y.a || x.b != y.b || x.g_list != y.g_list)
            return false;
    }
    return true;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void CsvTable::add(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    rows.push_back(std::move(cells));
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ostringstream out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
        out << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "': " + std::strerror(errno));
    file << out.str();
    if (!file) throw Error(ErrorCode::InvalidArgument, "failed writing '" + path + "'");
}

}  // namespace pmam::io
