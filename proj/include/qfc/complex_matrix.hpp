#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qfc/errors.hpp"

namespace qfc {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

/// floor(log2(v)) for a power-of-two v.
inline int log2_exact(std::size_t v) {
    int n = 0;
    while ((std::size_t{1} << n) < v) ++n;
    return n;
}

/// Dense square complex matrix, dimension a power of two, row-major storage.
/// Carrier of gates, unitaries and density operators.
class ComplexMatrix {
public:
    using EigenMap = Eigen::Map<
        Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstEigenMap = Eigen::Map<
        const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    /// 1x1 zero matrix.
    ComplexMatrix() : dim_(1), data_(1, Complex{0.0, 0.0}) {}

    /// Zero-filled dim x dim matrix; dim must be a power of two.
    explicit ComplexMatrix(std::size_t dim) : dim_(dim), data_() {
        check_dim(dim);
        data_.assign(dim * dim, Complex{0.0, 0.0});
    }

    static ComplexMatrix identity(std::size_t dim) {
        ComplexMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = Complex{1.0, 0.0};
        return m;
    }

    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
        ComplexMatrix m(rows.size());
        std::size_t r = 0;
        for (const auto& row : rows) {
            if (row.size() != m.dim_)
                throw DimensionError("from_rows: ragged row of length " +
                                     std::to_string(row.size()));
            std::size_t c = 0;
            for (const auto& z : row) m(r, c++) = z;
            ++r;
        }
        return m;
    }

    std::size_t dim() const { return dim_; }
    int num_qubits() const { return log2_exact(dim_); }

    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

    const std::vector<Complex>& data() const { return data_; }

    Complex trace() const {
        Complex t{0.0, 0.0};
        for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
        return t;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(dim_);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& z : data_) s += std::norm(z);
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (const auto& z : data_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    /// Largest |entry| difference against another matrix of the same dim.
    double max_abs_diff(const ComplexMatrix& other) const {
        require_same_dim(other, "max_abs_diff");
        double m = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i)
            m = std::max(m, std::abs(data_[i] - other.data_[i]));
        return m;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        a.require_same_dim(b, "operator*");
        ComplexMatrix out(a.dim_);
        ConstEigenMap ma(a.data_.data(), static_cast<Eigen::Index>(a.dim_),
                         static_cast<Eigen::Index>(a.dim_));
        ConstEigenMap mb(b.data_.data(), static_cast<Eigen::Index>(b.dim_),
                         static_cast<Eigen::Index>(b.dim_));
        EigenMap mo(out.data_.data(), static_cast<Eigen::Index>(out.dim_),
                    static_cast<Eigen::Index>(out.dim_));
        mo.noalias() = ma * mb;
        return out;
    }

    friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
        a.require_same_dim(b, "operator+");
        ComplexMatrix out = a;
        for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
        return out;
    }

    friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
        a.require_same_dim(b, "operator-");
        ComplexMatrix out = a;
        for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
        return out;
    }

    friend ComplexMatrix operator*(Complex s, const ComplexMatrix& a) {
        ComplexMatrix out = a;
        for (auto& z : out.data_) z *= s;
        return out;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& a, Complex s) { return s * a; }

    void require_same_dim(const ComplexMatrix& other, const char* op) const {
        if (dim_ != other.dim_)
            throw DimensionError(std::string(op) + ": dimension mismatch " +
                                 std::to_string(dim_) + " vs " + std::to_string(other.dim_));
    }

private:
    static void check_dim(std::size_t dim) {
        if (!is_power_of_two(dim))
            throw DimensionError("matrix dimension " + std::to_string(dim) +
                                 " is not a power of two");
    }

    std::size_t dim_;
    std::vector<Complex> data_;
};

/// Kronecker product; `a` is the more significant factor.
inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t da = a.dim(), db = b.dim();
    ComplexMatrix out(da * db);
    for (std::size_t ra = 0; ra < da; ++ra)
        for (std::size_t ca = 0; ca < da; ++ca) {
            const Complex f = a(ra, ca);
            if (f == Complex{0.0, 0.0}) continue;
            for (std::size_t rb = 0; rb < db; ++rb)
                for (std::size_t cb = 0; cb < db; ++cb)
                    out(ra * db + rb, ca * db + cb) = f * b(rb, cb);
        }
    return out;
}

} // namespace qfc
