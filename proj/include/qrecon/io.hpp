// Copyright 2026 The qrecon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrecon/born_engine.hpp"
#include "qrecon/error.hpp"
#include "qrecon/matrix_core.hpp"
#include "qrecon/question_lattice.hpp"
#include "qrecon/validation.hpp"

namespace qrecon::io {

using json = nlohmann::json;

/// Row-major nested arrays of [re, im] pairs.
inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json to_json(const RealMatrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json to_json(const ValidationReport& report) {
    json out = json::array();
    for (const auto& c : report.checks) {
        json entry = {{"name", c.name}, {"passed", c.passed}, {"deviation", c.deviation}, {"threshold", c.threshold}};
        if (c.informational) entry["informational"] = true;
        if (!c.detail.empty()) entry["detail"] = c.detail;
        out.push_back(std::move(entry));
    }
    return out;
}

inline json to_json(const Question& q) { return {{"label", q.label}, {"projector", to_json(q.matrix())}}; }

inline json to_json(const TransitionMatrix& t) {
    return {{"p", to_json(t.p)}, {"ranks_b", t.ranks_b}, {"ranks_c", t.ranks_c}};
}

inline json to_json(const SampleRecord& s) {
    json counts = json::object();
    for (std::size_t i = 0; i < s.counts.size(); ++i) counts[std::to_string(i)] = s.counts[i];
    return {{"counts", counts}, {"n_trials", s.n_trials}, {"seed", s.seed}};
}

inline std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline std::string index_path(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

inline Complex complex_from_json(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw Error(ErrorKind::ParseError, "field '" + path + "': expected a number or an [re, im] pair");
}

inline Matrix matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::ParseError, "field '" + path + "': expected a non-empty array of rows");
    const Index rows = static_cast<Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) {
        throw Error(ErrorKind::ParseError, "field '" + index_path(path, 0) + "': expected a non-empty row");
    }
    const Index cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        const std::string rpath = index_path(path, static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw Error(ErrorKind::ParseError, "field '" + rpath + "': expected " + std::to_string(cols) + " entries");
        }
        for (Index c = 0; c < cols; ++c) {
            m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)], index_path(rpath, static_cast<std::size_t>(c)));
        }
    }
    return m;
}

inline RealMatrix real_matrix_from_json(const json& j, const std::string& path) {
    const Matrix m = matrix_from_json(j, path);
    if (max_abs(Matrix(m.imag().cast<Complex>())) > 0.0) {
        throw Error(ErrorKind::ParseError, "field '" + path + "': expected real entries");
    }
    return m.real();
}

inline Question question_from_json(const json& j, const std::string& path, const Tolerances& tol) {
    if (!j.is_object() || !j.contains("projector")) {
        throw Error(ErrorKind::ValidationError, "field '" + join_path(path, "projector") + "' is missing");
    }
    const std::string label = j.value("label", std::string{});
    return {ProjectorMatrix(matrix_from_json(j["projector"], join_path(path, "projector")), tol), label};
}

/// Line and column of a byte offset, 1-based.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline json parse_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::ostringstream os;
        os << source << ":" << line << ":" << col << ": " << e.what();
        throw Error(ErrorKind::ParseError, os.str());
    }
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline json load_file(const std::filesystem::path& path) { return parse_text(read_text(path), path.string()); }

/// Replaces every {"file": "<relative path>"} object by the parsed file content.
inline json resolve_file_refs(const json& j, const std::filesystem::path& base, int depth = 0) {
    if (depth > 16) throw Error(ErrorKind::ParseError, "file references nested too deeply");
    if (j.is_object()) {
        if (j.size() == 1 && j.contains("file") && j["file"].is_string()) {
            const std::filesystem::path target = base / j["file"].get<std::string>();
            return resolve_file_refs(load_file(target), target.parent_path(), depth + 1);
        }
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = resolve_file_refs(it.value(), base, depth);
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& v : j) out.push_back(resolve_file_refs(v, base, depth));
        return out;
    }
    return j;
}

}  // namespace qrecon::io
