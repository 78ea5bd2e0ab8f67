/*
 * Copyright 2026 The seduq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SEDUQ_JSON_UTIL_HPP
#define SEDUQ_JSON_UTIL_HPP

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "seduq/common.hpp"

namespace seduq {

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

/// Row-major nested arrays; an empty matrix serializes as [].
inline nlohmann::json to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j,
                                        const std::string& what) {
    if (!j.is_array()) throw SchemaError(what + ": expected array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw SchemaError(what + ": expected numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j,
                                        const std::string& what) {
    if (!j.is_array()) throw SchemaError(what + ": expected array of rows");
    if (j.empty()) return Eigen::MatrixXd(0, 0);
    if (!j[0].is_array()) throw SchemaError(what + ": expected array of rows");
    std::size_t cols = j[0].size();
    Eigen::MatrixXd m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw SchemaError(what + ": ragged rows");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_number())
                throw SchemaError(what + ": expected numbers");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                j[i][k].get<double>();
        }
    }
    return m;
}

/// Fetches a required key or throws SchemaError naming it.
inline const nlohmann::json& require_key(const nlohmann::json& j,
                                         const std::string& key,
                                         const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end())
        throw SchemaError(ctx + ": missing key '" + key + "'");
    return *it;
}

} // namespace seduq

#endif // SEDUQ_JSON_UTIL_HPP
