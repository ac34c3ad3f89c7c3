#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qfc/complex_matrix.hpp"
#include "qfc/errors.hpp"

namespace qfc {

/// Qubit position in a register. Position 0 is the leftmost (most
/// significant) tensor factor.
using QubitIndex = std::size_t;

struct Tolerances {
    double herm = 1e-9;
    double trace = 1e-9;
    double psd = 1e-9;
    double unit = 1e-9;
};

/// Entrywise matrix-equality tolerance used throughout the tests.
inline constexpr double kEntryTol = 1e-12;

/// Unnormalized density operator. The trace carries the probability of the
/// program edge holding it, so 0 <= Tr <= 1.
struct DensityMatrix {
    ComplexMatrix mat;
    int num_qubits = 0;

    /// Empty-register state: the 1x1 matrix [1].
    static DensityMatrix scalar_one() {
        DensityMatrix d;
        d.mat = ComplexMatrix(1);
        d.mat(0, 0) = Complex{1.0, 0.0};
        d.num_qubits = 0;
        return d;
    }

    double trace_real() const { return mat.trace().real(); }
};

inline DensityMatrix make_density(ComplexMatrix m) {
    DensityMatrix d;
    d.num_qubits = m.num_qubits();
    d.mat = std::move(m);
    return d;
}

/// Hermitian observable for expectation values.
struct Observable {
    ComplexMatrix mat;
};

// ---------------------------------------------------------------------------
// Validity checks
// ---------------------------------------------------------------------------

/// ||M - M^dagger||_F
inline double hermiticity_defect(const ComplexMatrix& m) {
    return (m - m.adjoint()).frobenius_norm();
}

/// ||U^dagger U - I||_F
inline double unitarity_defect(const ComplexMatrix& u) {
    return (u.adjoint() * u - ComplexMatrix::identity(u.dim())).frobenius_norm();
}

inline bool is_unitary(const ComplexMatrix& u, double tol = Tolerances{}.unit) {
    return unitarity_defect(u) <= tol;
}

/// Smallest eigenvalue of the Hermitian part (M + M^dagger)/2.
inline double smallest_eigenvalue(const ComplexMatrix& m) {
    const auto dim = static_cast<Eigen::Index>(m.dim());
    Eigen::MatrixXcd h(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c)
            h(r, c) = 0.5 * (m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) +
                             std::conj(m(static_cast<std::size_t>(c), static_cast<std::size_t>(r))));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

/// Throws ValidationError unless `m` is a valid sub-unit-trace density
/// matrix: finite, Hermitian, positive semidefinite, 0 <= Tr <= 1 + eps.
inline void validate_density(const ComplexMatrix& m, const Tolerances& tol = {}) {
    if (!m.all_finite()) throw ValidationError("density matrix has non-finite entries");
    const double hd = hermiticity_defect(m);
    if (hd > tol.herm)
        throw ValidationError("density matrix not Hermitian, defect " + std::to_string(hd));
    const double tr = m.trace().real();
    if (tr < -tol.trace || tr > 1.0 + tol.trace)
        throw ValidationError("density matrix trace " + std::to_string(tr) +
                              " outside [0, 1]");
    const double lam = smallest_eigenvalue(m);
    if (lam < -tol.psd * static_cast<double>(m.dim()))
        throw ValidationError("density matrix not PSD, smallest eigenvalue " +
                              std::to_string(lam));
}

// ---------------------------------------------------------------------------
// Index plumbing. Position p of an n-qubit register addresses bit n-1-p of a
// basis index, so position 0 is the most significant factor.
// ---------------------------------------------------------------------------

namespace detail {

inline int bit_at(std::size_t index, QubitIndex pos, int n) {
    return static_cast<int>((index >> (n - 1 - static_cast<int>(pos))) & 1U);
}

inline void require_qubit_in_range(QubitIndex q, int n, const char* op) {
    if (static_cast<int>(q) >= n)
        throw TargetError(std::string(op) + ": qubit index " + std::to_string(q) +
                          " out of range for " + std::to_string(n) + " qubits");
}

inline void require_permutation(const std::vector<QubitIndex>& perm, int n) {
    if (static_cast<int>(perm.size()) != n)
        throw TargetError("permutation size " + std::to_string(perm.size()) +
                          " does not match " + std::to_string(n) + " qubits");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (QubitIndex p : perm) {
        if (static_cast<int>(p) >= n || seen[p])
            throw TargetError("malformed permutation");
        seen[p] = true;
    }
}

/// Relabels basis index bits: bit at position i moves to position perm[i].
inline std::size_t permute_index(std::size_t index, const std::vector<QubitIndex>& perm, int n) {
    std::size_t out = 0;
    for (int i = 0; i < n; ++i)
        if (bit_at(index, static_cast<QubitIndex>(i), n))
            out |= std::size_t{1} << (n - 1 - static_cast<int>(perm[static_cast<std::size_t>(i)]));
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Density-operator calculus
// ---------------------------------------------------------------------------

/// rho -> U rho U^dagger. Trace, Hermiticity and spectrum preserving.
/// Unitarity of `u` is checked only when `validate` is set.
inline DensityMatrix conjugate_apply(const ComplexMatrix& u, const DensityMatrix& rho,
                                     bool validate = false) {
    u.require_same_dim(rho.mat, "conjugate_apply");
    if (validate && !is_unitary(u))
        throw ValidationError("conjugate_apply: matrix is not unitary");
    DensityMatrix out;
    out.num_qubits = rho.num_qubits;
    out.mat = u * rho.mat * u.adjoint();
    return out;
}

/// Reindexes tensor factors: the factor at position i moves to position
/// perm[i]. Trace, spectrum and Hermiticity are preserved.
inline DensityMatrix permute_qubits(const DensityMatrix& rho, const std::vector<QubitIndex>& perm) {
    const int n = rho.num_qubits;
    detail::require_permutation(perm, n);
    const std::size_t dim = rho.mat.dim();
    DensityMatrix out;
    out.num_qubits = n;
    out.mat = ComplexMatrix(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const std::size_t pr = detail::permute_index(r, perm, n);
        for (std::size_t c = 0; c < dim; ++c)
            out.mat(pr, detail::permute_index(c, perm, n)) = rho.mat(r, c);
    }
    return out;
}

inline std::vector<QubitIndex> inverse_permutation(const std::vector<QubitIndex>& perm) {
    std::vector<QubitIndex> inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
    return inv;
}

/// Applies a 2^k x 2^k gate matrix to the targeted qubits: the targets are
/// permuted to the leading positions, the gate is conjugated in as
/// tensor(gate, I), and the permutation is undone.
inline DensityMatrix apply_on_targets(const ComplexMatrix& gate_matrix,
                                      const std::vector<QubitIndex>& targets,
                                      const DensityMatrix& rho, bool validate = false) {
    const int n = rho.num_qubits;
    const int k = gate_matrix.num_qubits();
    if (gate_matrix.dim() != (std::size_t{1} << k) ||
        targets.size() != static_cast<std::size_t>(k))
        throw DimensionError("apply_on_targets: gate dim does not match target count");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        detail::require_qubit_in_range(targets[i], n, "apply_on_targets");
        for (std::size_t j = i + 1; j < targets.size(); ++j)
            if (targets[i] == targets[j])
                throw TargetError("apply_on_targets: duplicate target qubit " +
                                  std::to_string(targets[i]));
    }

    // perm[old position] = new position; targets move to the front.
    std::vector<QubitIndex> perm(static_cast<std::size_t>(n), static_cast<QubitIndex>(n));
    for (std::size_t j = 0; j < targets.size(); ++j) perm[targets[j]] = j;
    QubitIndex next = targets.size();
    for (int i = 0; i < n; ++i)
        if (perm[static_cast<std::size_t>(i)] == static_cast<QubitIndex>(n))
            perm[static_cast<std::size_t>(i)] = next++;

    const DensityMatrix fronted = permute_qubits(rho, perm);
    const ComplexMatrix embedded =
        (n == k) ? gate_matrix
                 : tensor(gate_matrix, ComplexMatrix::identity(std::size_t{1} << (n - k)));
    const DensityMatrix applied = conjugate_apply(embedded, fronted, validate);
    return permute_qubits(applied, inverse_permutation(perm));
}

/// Projective measurement of qubit `q` (Eq.-10-style block split). Returns
/// the outcome-0 and outcome-1 states at full dimension; their traces are
/// the outcome probabilities and sum to Tr(rho).
inline std::pair<DensityMatrix, DensityMatrix> measure_split(const DensityMatrix& rho,
                                                             QubitIndex q) {
    const int n = rho.num_qubits;
    if (n < 1) throw TargetError("measure_split: empty register");
    detail::require_qubit_in_range(q, n, "measure_split");
    const std::size_t dim = rho.mat.dim();
    DensityMatrix out0, out1;
    out0.num_qubits = out1.num_qubits = n;
    out0.mat = ComplexMatrix(dim);
    out1.mat = ComplexMatrix(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const int br = detail::bit_at(r, q, n);
        for (std::size_t c = 0; c < dim; ++c) {
            if (br != detail::bit_at(c, q, n)) continue;
            (br == 0 ? out0 : out1).mat(r, c) = rho.mat(r, c);
        }
    }
    return {std::move(out0), std::move(out1)};
}

/// Entrywise sum of branch states (the merge at a control-flow join).
inline DensityMatrix merge(const std::vector<DensityMatrix>& parts) {
    if (parts.empty()) throw DimensionError("merge: empty list");
    DensityMatrix out = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        parts[i].mat.require_same_dim(out.mat, "merge");
        out.mat = out.mat + parts[i].mat;
    }
    return out;
}

/// Traces out qubit `q`; the dimension halves and the trace is preserved.
inline DensityMatrix partial_trace(const DensityMatrix& rho, QubitIndex q) {
    const int n = rho.num_qubits;
    if (n < 1) throw TargetError("partial_trace: empty register");
    detail::require_qubit_in_range(q, n, "partial_trace");
    const std::size_t out_dim = rho.mat.dim() / 2;
    const int shift = n - 1 - static_cast<int>(q);
    const std::size_t low_mask = (std::size_t{1} << shift) - 1;
    auto insert_bit = [&](std::size_t idx, std::size_t b) {
        return ((idx & ~low_mask) << 1) | (b << shift) | (idx & low_mask);
    };
    DensityMatrix out;
    out.num_qubits = n - 1;
    out.mat = ComplexMatrix(out_dim);
    for (std::size_t r = 0; r < out_dim; ++r)
        for (std::size_t c = 0; c < out_dim; ++c)
            out.mat(r, c) = rho.mat(insert_bit(r, 0), insert_bit(c, 0)) +
                            rho.mat(insert_bit(r, 1), insert_bit(c, 1));
    return out;
}

/// rho -> rho (x) |0><0|, the new qubit appended as the least significant
/// factor. `max_qubits` is the configured register cap.
inline DensityMatrix extend_with_fresh_qubit(const DensityMatrix& rho, int max_qubits) {
    if (rho.num_qubits + 1 > max_qubits)
        throw QubitCapExceeded("register would exceed the cap of " +
                               std::to_string(max_qubits) + " qubits");
    ComplexMatrix zero_state(2);
    zero_state(0, 0) = Complex{1.0, 0.0};
    DensityMatrix out;
    out.num_qubits = rho.num_qubits + 1;
    out.mat = tensor(rho.mat, zero_state);
    return out;
}

enum class ExpectationMode { Raw, Normalized };

/// Tr(rho O). Raw mode is Eq. 5 verbatim and meaningful for sub-unit-trace
/// edge states; Normalized divides by Tr(rho).
inline double expectation(const DensityMatrix& rho, const Observable& o,
                          ExpectationMode mode = ExpectationMode::Raw) {
    rho.mat.require_same_dim(o.mat, "expectation");
    Complex t{0.0, 0.0};
    const std::size_t dim = rho.mat.dim();
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) t += rho.mat(r, c) * o.mat(c, r);
    if (mode == ExpectationMode::Normalized) {
        const double tr = rho.trace_real();
        if (tr <= 0.0)
            throw ValidationError("expectation: zero-trace state in normalized mode");
        return t.real() / tr;
    }
    return t.real();
}

} // namespace qfc
