#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "qfc/complex_matrix.hpp"
#include "qfc/densmat.hpp"
#include "qfc/errors.hpp"

namespace qfc {

/// A named unitary gate of small arity.
struct GateDef {
    std::string name;
    int arity = 1;
    ComplexMatrix matrix;
};

/// Block-diagonal controlled extension [[I, 0], [0, S]] of a gate S. The
/// control is the new, more significant qubit.
inline GateDef controlled(const GateDef& s) {
    const std::size_t d = s.matrix.dim();
    GateDef out;
    out.name = s.name + "c";
    out.arity = s.arity + 1;
    out.matrix = ComplexMatrix(2 * d);
    for (std::size_t i = 0; i < d; ++i) out.matrix(i, i) = Complex{1.0, 0.0};
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) out.matrix(d + r, d + c) = s.matrix(r, c);
    return out;
}

namespace detail {

inline std::vector<GateDef> make_catalog() {
    const double rs2 = 1.0 / std::sqrt(2.0);
    // sqrt(i) on the principal branch e^{i pi/4}
    const Complex sqrt_i{rs2, rs2};

    GateDef n{"N", 1, ComplexMatrix::from_rows({{Complex{0, 0}, Complex{1, 0}},
                                                {Complex{1, 0}, Complex{0, 0}}})};
    GateDef h{"H", 1, ComplexMatrix::from_rows({{Complex{rs2, 0}, Complex{rs2, 0}},
                                                {Complex{rs2, 0}, Complex{-rs2, 0}}})};
    GateDef v{"V", 1, ComplexMatrix::from_rows({{Complex{1, 0}, Complex{0, 0}},
                                                {Complex{0, 0}, Complex{0, 1}}})};
    GateDef w{"W", 1, ComplexMatrix::from_rows({{Complex{1, 0}, Complex{0, 0}},
                                                {Complex{0, 0}, sqrt_i}})};
    // X exchanges the basis states 01 and 10 (swap).
    GateDef x{"X", 2,
              ComplexMatrix::from_rows({{Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{0, 0}},
                                        {Complex{0, 0}, Complex{0, 0}, Complex{1, 0}, Complex{0, 0}},
                                        {Complex{0, 0}, Complex{1, 0}, Complex{0, 0}, Complex{0, 0}},
                                        {Complex{0, 0}, Complex{0, 0}, Complex{0, 0}, Complex{1, 0}}})};

    std::vector<GateDef> cat;
    cat.push_back(n);
    cat.push_back(h);
    cat.push_back(v);
    cat.push_back(w);
    cat.push_back(controlled(n));
    cat.push_back(controlled(h));
    cat.push_back(controlled(v));
    cat.push_back(controlled(w));
    cat.push_back(x);
    return cat;
}

} // namespace detail

/// The nine built-in gates: N, H, V, W, their controlled forms, and X.
inline const std::vector<GateDef>& gate_catalog() {
    static const std::vector<GateDef> catalog = detail::make_catalog();
    return catalog;
}

inline bool is_builtin_gate(std::string_view name) {
    for (const auto& g : gate_catalog())
        if (g.name == name) return true;
    return false;
}

inline const GateDef& builtin(std::string_view name) {
    for (const auto& g : gate_catalog())
        if (g.name == name) return g;
    throw UnknownGateError("unknown gate name '" + std::string(name) + "'");
}

/// apply_on_targets with the gate's arity checked against the target count.
inline DensityMatrix apply_on_targets(const GateDef& g, const std::vector<QubitIndex>& targets,
                                      const DensityMatrix& rho, bool validate = false) {
    if (targets.size() != static_cast<std::size_t>(g.arity))
        throw DimensionError("gate " + g.name + " expects " + std::to_string(g.arity) +
                             " targets, got " + std::to_string(targets.size()));
    return apply_on_targets(g.matrix, targets, rho, validate);
}

} // namespace qfc
