#pragma once

// Shared test helpers: seeded generators and brute-force oracles kept
// independent of the library code paths they check.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <vector>

#include "qfc/complex_matrix.hpp"
#include "qfc/densmat.hpp"
#include "qfc/rng.hpp"

namespace qfc_test {

using qfc::Complex;
using qfc::ComplexMatrix;
using qfc::DensityMatrix;

inline double uniform(qfc::SplitMix64& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.next_double();
}

/// Random matrix with re/im entries in [-1, 1].
inline ComplexMatrix random_matrix(std::size_t dim, qfc::SplitMix64& rng) {
    ComplexMatrix m(dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            m(r, c) = Complex{uniform(rng, -1, 1), uniform(rng, -1, 1)};
    return m;
}

/// Random valid density matrix: A A^dagger scaled to the requested trace.
inline DensityMatrix random_density(int num_qubits, qfc::SplitMix64& rng, double trace = 1.0) {
    const std::size_t dim = std::size_t{1} << num_qubits;
    const ComplexMatrix a = random_matrix(dim, rng);
    ComplexMatrix rho = a * a.adjoint();
    const double t = rho.trace().real();
    rho = Complex{trace / t, 0.0} * rho;
    return qfc::make_density(rho);
}

/// Random unitary via Gram-Schmidt on random columns.
inline ComplexMatrix random_unitary(std::size_t dim, qfc::SplitMix64& rng) {
    std::vector<std::vector<Complex>> cols(dim, std::vector<Complex>(dim));
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t r = 0; r < dim; ++r)
            cols[c][r] = Complex{uniform(rng, -1, 1), uniform(rng, -1, 1)};
        for (std::size_t p = 0; p < c; ++p) {
            Complex overlap{0, 0};
            for (std::size_t r = 0; r < dim; ++r) overlap += std::conj(cols[p][r]) * cols[c][r];
            for (std::size_t r = 0; r < dim; ++r) cols[c][r] -= overlap * cols[p][r];
        }
        double norm = 0;
        for (std::size_t r = 0; r < dim; ++r) norm += std::norm(cols[c][r]);
        norm = std::sqrt(norm);
        for (std::size_t r = 0; r < dim; ++r) cols[c][r] /= norm;
    }
    ComplexMatrix u(dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) u(r, c) = cols[c][r];
    return u;
}

/// Kronecker oracle via direct index arithmetic, independent of tensor().
inline ComplexMatrix oracle_kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t da = a.dim(), db = b.dim();
    ComplexMatrix out(da * db);
    for (std::size_t r = 0; r < da * db; ++r)
        for (std::size_t c = 0; c < da * db; ++c)
            out(r, c) = a(r / db, c / db) * b(r % db, c % db);
    return out;
}

/// Basis-state projector |index><index| on `num_qubits` qubits.
inline DensityMatrix basis_state(int num_qubits, std::size_t index) {
    ComplexMatrix m(std::size_t{1} << num_qubits);
    m(index, index) = Complex{1.0, 0.0};
    return qfc::make_density(m);
}

/// Sorted eigenvalues of the Hermitian part, for spectrum comparisons.
inline std::vector<double> spectrum(const ComplexMatrix& m) {
    const auto dim = static_cast<Eigen::Index>(m.dim());
    Eigen::MatrixXcd h(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c)
            h(r, c) = 0.5 * (m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) +
                             std::conj(m(static_cast<std::size_t>(c), static_cast<std::size_t>(r))));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    std::vector<double> out(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + dim);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace qfc_test
