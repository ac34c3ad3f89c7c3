#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "qfc/complex_matrix.hpp"
#include "qfc/errors.hpp"

namespace qfc {

/// Matrix exchange format: {"dim": d, "entries": [[[re, im], ...], ...]}
/// with d rows of d [re, im] pairs, row-major.
inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t r = 0; r < m.dim(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.dim(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        entries.push_back(std::move(row));
    }
    return nlohmann::json{{"dim", m.dim()}, {"entries", std::move(entries)}};
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
        throw ValidationError("matrix document must carry \"dim\" and \"entries\"");
    if (!j["dim"].is_number_unsigned() && !j["dim"].is_number_integer())
        throw ValidationError("matrix \"dim\" must be an integer");
    const auto dim_signed = j["dim"].get<long long>();
    if (dim_signed <= 0 || !is_power_of_two(static_cast<std::size_t>(dim_signed)))
        throw DimensionError("matrix \"dim\" must be a positive power of two, got " +
                             std::to_string(dim_signed));
    const auto dim = static_cast<std::size_t>(dim_signed);
    const auto& entries = j["entries"];
    if (!entries.is_array() || entries.size() != dim)
        throw ValidationError("matrix \"entries\" must hold exactly dim rows");
    ComplexMatrix m(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const auto& row = entries[r];
        if (!row.is_array() || row.size() != dim)
            throw ValidationError("matrix row " + std::to_string(r) +
                                  " must hold exactly dim entries");
        for (std::size_t c = 0; c < dim; ++c) {
            const auto& cell = row[c];
            if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
                !cell[1].is_number())
                throw ValidationError("matrix entry must be an [re, im] pair");
            m(r, c) = Complex{cell[0].get<double>(), cell[1].get<double>()};
        }
    }
    if (!m.all_finite()) throw ValidationError("matrix entries must be finite");
    return m;
}

inline ComplexMatrix load_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open matrix file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("matrix file '" + path + "' is not valid JSON: " + e.what());
    }
    return matrix_from_json(j);
}

} // namespace qfc
