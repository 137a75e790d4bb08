#pragma once

#include <json.hpp>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ubayes/model.hpp"

namespace ubayes::io {

using nlohmann::json;

/// %.17g: enough digits to reproduce any double exactly on re-read.
inline std::string format_double(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    return buffer;
}

inline json to_json(const Vector& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i))));
    return rows;
}

inline Vector vector_from_json(const json& arr, const char* what) {
    if (!arr.is_array()) throw BadSpec(std::string(what) + ": expected a JSON array");
    Vector v(static_cast<Index>(arr.size()));
    Index i = 0;
    for (const auto& entry : arr) {
        if (!entry.is_number()) throw BadSpec(std::string(what) + ": expected numeric entries");
        v[i++] = entry.get<double>();
    }
    return v;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadSpec("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline bool looks_like_json(const std::string& text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '[' || c == '{';
    }
    return false;
}

/// First column of a CSV/whitespace table; a leading non-numeric header line
/// is skipped.
inline Vector vector_from_csv_text(const std::string& text, const char* what) {
    std::vector<double> values;
    std::istringstream lines(text);
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
        std::string cell = line.substr(0, line.find(','));
        const auto start = cell.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        cell = cell.substr(start);
        try {
            std::size_t used = 0;
            const double value = std::stod(cell, &used);
            values.push_back(value);
        } catch (const std::exception&) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw BadSpec(std::string(what) + ": unparsable CSV cell '" + cell + "'");
        }
        first = false;
    }
    if (values.empty()) throw BadSpec(std::string(what) + ": no numeric rows found");
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

/// Read a vector from a JSON array file ([...] or {"values": [...]}) or a
/// one-column CSV.
inline Vector read_vector(const std::string& path) {
    const std::string text = read_file(path);
    if (looks_like_json(text)) {
        const json j = json::parse(text);
        if (j.is_object()) {
            if (!j.contains("values")) throw BadSpec(path + ": JSON object lacks 'values'");
            return vector_from_json(j["values"], path.c_str());
        }
        return vector_from_json(j, path.c_str());
    }
    return vector_from_csv_text(text, path.c_str());
}

inline void write_vector_json(std::ostream& out, const Vector& v) {
    out << '[';
    for (Index i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        out << format_double(v[i]);
    }
    out << "]\n";
}

inline void write_vector_csv(std::ostream& out, const Vector& v, const std::string& header = "value") {
    out << header << '\n';
    for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

/**
 * Model file schema (JSON):
 *
 *   {"builtin": {"name": "binomial", "params": {"n": 3, "grid_size": 64}}}
 * or
 *   {
 *     "theta_nodes": [...] | "grid": {"kind": "gauss_legendre", "size": K},
 *     "prior": "uniform" | [w_1, ..., w_K],
 *     "sample_labels": ["a", "b", ...],
 *     "likelihood": [[...], ...]            // K rows of N entries
 *   }
 *
 * With a gauss_legendre grid, "uniform" means the continuous uniform prior
 * discretized by the rule; with explicit nodes it means equal mass per node.
 */
inline ModelSpace model_from_json(const json& j, int default_grid_size = 64) {
    if (j.contains("builtin")) {
        const json& b = j["builtin"];
        BuiltinSpec spec;
        spec.name = b.at("name").get<std::string>();
        int grid_size = default_grid_size;
        if (b.contains("params")) {
            const json& p = b["params"];
            if (p.contains("n")) spec.n = p["n"].get<int>();
            if (p.contains("grid_size")) grid_size = p["grid_size"].get<int>();
        }
        return builtin_model(spec, grid_size);
    }

    Vector nodes;
    Vector quad_weights;  // only set for generated grids
    if (j.contains("theta_nodes")) {
        nodes = vector_from_json(j["theta_nodes"], "theta_nodes");
    } else if (j.contains("grid")) {
        const json& g = j["grid"];
        const std::string kind = g.at("kind").get<std::string>();
        if (kind != "gauss_legendre")
            throw BadSpec("model: unknown grid kind '" + kind + "'");
        const int size = g.at("size").get<int>();
        const QuadratureRule rule = gauss_legendre_01(size);
        nodes = Eigen::Map<const Vector>(rule.nodes.data(), static_cast<Index>(rule.nodes.size()));
        quad_weights =
            Eigen::Map<const Vector>(rule.weights.data(), static_cast<Index>(rule.weights.size()));
    } else {
        throw BadSpec("model: need 'theta_nodes', 'grid', or 'builtin'");
    }

    Vector weights;
    if (!j.contains("prior")) throw BadSpec("model: missing 'prior'");
    if (j["prior"].is_string()) {
        if (j["prior"].get<std::string>() != "uniform")
            throw BadSpec("model: unknown prior '" + j["prior"].get<std::string>() + "'");
        weights = quad_weights.size() > 0
                      ? quad_weights
                      : Vector(Vector::Constant(nodes.size(), 1.0 / double(nodes.size())));
    } else {
        weights = vector_from_json(j["prior"], "prior");
    }

    if (!j.contains("sample_labels")) throw BadSpec("model: missing 'sample_labels'");
    std::vector<std::string> labels;
    for (const auto& entry : j["sample_labels"]) {
        if (entry.is_string())
            labels.push_back(entry.get<std::string>());
        else
            labels.push_back(entry.dump());
    }

    if (!j.contains("likelihood")) throw BadSpec("model: missing 'likelihood'");
    const json& rows = j["likelihood"];
    if (!rows.is_array() || rows.empty()) throw BadSpec("model: likelihood must be a nonempty array");
    const Index K = static_cast<Index>(rows.size());
    const Index N = static_cast<Index>(rows[0].size());
    Matrix likelihood(K, N);
    for (Index i = 0; i < K; ++i) {
        const Vector row = vector_from_json(rows[static_cast<std::size_t>(i)], "likelihood row");
        if (row.size() != N) throw BadSpec("model: ragged likelihood rows");
        likelihood.row(i) = row.transpose();
    }

    return build_model(ParameterGrid(std::move(nodes), std::move(weights)),
                       SampleSpace(std::move(labels)), std::move(likelihood));
}

inline ModelSpace read_model(const std::string& path, int default_grid_size = 64) {
    return model_from_json(json::parse(read_file(path)), default_grid_size);
}

/// Explicit (nodes + weights + likelihood) form; builtins round-trip as data.
inline json model_to_json(const ModelSpace& model) {
    json j;
    j["theta_nodes"] = to_json(model.grid().nodes());
    j["prior"] = to_json(model.grid().weights());
    j["sample_labels"] = model.samples().labels();
    j["likelihood"] = to_json(model.likelihood());
    return j;
}

}  // namespace ubayes::io
