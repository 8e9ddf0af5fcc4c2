#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ssc/error.hpp"

namespace ssc {

using index_t = std::int32_t;
using DenseVector = std::vector<double>;

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Compressed sparse row matrix with sorted, deduplicated column indices
/// per row. Immutable by convention once assembled.
struct SparseMatrix {
    index_t nrows = 0;
    index_t ncols = 0;
    std::vector<index_t> row_offsets;  // size nrows+1, nondecreasing
    std::vector<index_t> col_indices;  // sorted and unique within each row
    std::vector<double> values;

    index_t nnz() const { return static_cast<index_t>(values.size()); }

    /// Entry (i, j), zero if not stored.
    double coeff(index_t i, index_t j) const {
        const auto lo = col_indices.begin() + row_offsets[i];
        const auto hi = col_indices.begin() + row_offsets[i + 1];
        const auto it = std::lower_bound(lo, hi, j);
        if (it == hi || *it != j) return 0.0;
        return values[static_cast<std::size_t>(it - col_indices.begin())];
    }

    double max_diagonal() const {
        double d = 0.0;
        for (index_t i = 0; i < nrows; ++i) d = std::max(d, coeff(i, i));
        return d;
    }
};

/// Builds a CSR matrix from triplets; duplicate (row, col) entries are summed.
inline SparseMatrix assemble(const std::vector<Triplet>& triplets, index_t nrows,
                             index_t ncols) {
    if (nrows < 0 || ncols < 0) throw StructureError("assemble: negative dimensions");
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
            throw StructureError("assemble: triplet index out of range");
    }
    SparseMatrix A;
    A.nrows = nrows;
    A.ncols = ncols;
    A.row_offsets.assign(static_cast<std::size_t>(nrows) + 1, 0);

    std::vector<index_t> counts(static_cast<std::size_t>(nrows), 0);
    for (const auto& t : triplets) ++counts[static_cast<std::size_t>(t.row)];
    std::vector<std::size_t> start(static_cast<std::size_t>(nrows) + 1, 0);
    for (index_t i = 0; i < nrows; ++i)
        start[static_cast<std::size_t>(i) + 1] =
            start[static_cast<std::size_t>(i)] + static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]);

    std::vector<std::pair<index_t, double>> bucketed(triplets.size());
    std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
    for (const auto& t : triplets)
        bucketed[cursor[static_cast<std::size_t>(t.row)]++] = {t.col, t.value};

    A.col_indices.reserve(triplets.size());
    A.values.reserve(triplets.size());
    for (index_t i = 0; i < nrows; ++i) {
        const auto lo = bucketed.begin() + static_cast<std::ptrdiff_t>(start[static_cast<std::size_t>(i)]);
        const auto hi = bucketed.begin() + static_cast<std::ptrdiff_t>(start[static_cast<std::size_t>(i) + 1]);
        std::sort(lo, hi, [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = lo; it != hi;) {
            const index_t col = it->first;
            double sum = 0.0;
            for (; it != hi && it->first == col; ++it) sum += it->second;
            A.col_indices.push_back(col);
            A.values.push_back(sum);
        }
        A.row_offsets[static_cast<std::size_t>(i) + 1] = static_cast<index_t>(A.col_indices.size());
    }
    return A;
}

/// Checks stored symmetry: value(i,j) == value(j,i) for all entries.
inline void validate_symmetric(const SparseMatrix& A, double tol = 0.0) {
    if (A.nrows != A.ncols) throw StructureError("validate_symmetric: matrix not square");
    for (index_t i = 0; i < A.nrows; ++i) {
        for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            const index_t j = A.col_indices[static_cast<std::size_t>(k)];
            const double v = A.values[static_cast<std::size_t>(k)];
            const double w = A.coeff(j, i);
            if (std::abs(v - w) > tol * std::max(1.0, std::abs(v)))
                throw StructureError("validate_symmetric: asymmetric entry");
        }
    }
}

inline void spmv_into(const SparseMatrix& A, const double* x, double* y) {
    for (index_t i = 0; i < A.nrows; ++i) {
        double sum = 0.0;
        for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            sum += A.values[static_cast<std::size_t>(k)] * x[A.col_indices[static_cast<std::size_t>(k)]];
        y[i] = sum;
    }
}

/// y = A * x
inline DenseVector spmv(const SparseMatrix& A, const DenseVector& x) {
    if (static_cast<index_t>(x.size()) != A.ncols)
        throw DimensionError("spmv: dimension mismatch");
    DenseVector y(static_cast<std::size_t>(A.nrows));
    spmv_into(A, x.data(), y.data());
    return y;
}

/// y = A^T * x
inline DenseVector spmv_transpose(const SparseMatrix& A, const DenseVector& x) {
    if (static_cast<index_t>(x.size()) != A.nrows)
        throw DimensionError("spmv_transpose: dimension mismatch");
    DenseVector y(static_cast<std::size_t>(A.ncols), 0.0);
    for (index_t i = 0; i < A.nrows; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        if (xi == 0.0) continue;
        for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            y[static_cast<std::size_t>(A.col_indices[static_cast<std::size_t>(k)])] +=
                A.values[static_cast<std::size_t>(k)] * xi;
    }
    return y;
}

inline double dot(const DenseVector& x, const DenseVector& y) {
    if (x.size() != y.size()) throw DimensionError("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline void axpy_into(double alpha, const DenseVector& x, DenseVector& y) {
    if (x.size() != y.size()) throw DimensionError("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// Returns y + alpha * x.
inline DenseVector axpy(double alpha, const DenseVector& x, const DenseVector& y) {
    if (x.size() != y.size()) throw DimensionError("axpy: dimension mismatch");
    DenseVector z = y;
    axpy_into(alpha, x, z);
    return z;
}

inline double norm2(const DenseVector& x) { return std::sqrt(dot(x, x)); }

/// Submatrix A(rows, cols). Index sets must be sorted and in range.
inline SparseMatrix extract_block(const SparseMatrix& A, std::span<const index_t> rows,
                                  std::span<const index_t> cols) {
    auto check = [](std::span<const index_t> s, index_t bound, const char* what) {
        index_t prev = -1;
        for (index_t v : s) {
            if (v < 0 || v >= bound) throw StructureError(std::string("extract_block: ") + what + " index out of range");
            if (v <= prev) throw StructureError(std::string("extract_block: ") + what + " indices not sorted");
            prev = v;
        }
    };
    check(rows, A.nrows, "row");
    check(cols, A.ncols, "column");

    SparseMatrix B;
    B.nrows = static_cast<index_t>(rows.size());
    B.ncols = static_cast<index_t>(cols.size());
    B.row_offsets.assign(rows.size() + 1, 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const index_t g = rows[r];
        for (index_t k = A.row_offsets[g]; k < A.row_offsets[g + 1]; ++k) {
            const index_t c = A.col_indices[static_cast<std::size_t>(k)];
            const auto it = std::lower_bound(cols.begin(), cols.end(), c);
            if (it != cols.end() && *it == c) {
                B.col_indices.push_back(static_cast<index_t>(it - cols.begin()));
                B.values.push_back(A.values[static_cast<std::size_t>(k)]);
            }
        }
        B.row_offsets[r + 1] = static_cast<index_t>(B.col_indices.size());
    }
    return B;
}

/// Sparse Cholesky-type factorization of an SPD matrix, reusable for
/// repeated solves. Uses a fill-reducing ordering computed once per matrix.
class SpdFactor {
public:
    SpdFactor() = default;

    explicit SpdFactor(const SparseMatrix& A) : n_(A.nrows) {
        if (A.nrows != A.ncols) throw StructureError("factor_spd: matrix not square");
        if (n_ == 0) return;
        Eigen::SparseMatrix<double> M(A.nrows, A.ncols);
        {
            std::vector<Eigen::Triplet<double>> ts;
            ts.reserve(static_cast<std::size_t>(A.nnz()));
            for (index_t i = 0; i < A.nrows; ++i)
                for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
                    ts.emplace_back(i, A.col_indices[static_cast<std::size_t>(k)],
                                    A.values[static_cast<std::size_t>(k)]);
            M.setFromTriplets(ts.begin(), ts.end());
        }
        ldlt_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
        ldlt_->compute(M);
        if (ldlt_->info() != Eigen::Success)
            throw DefinitenessError("factor_spd: factorization failed");
        const double threshold = 1e-14 * A.max_diagonal();
        const auto& D = ldlt_->vectorD();
        for (index_t i = 0; i < n_; ++i) {
            if (!(D[i] > threshold))
                throw DefinitenessError("factor_spd: nonpositive pivot, matrix not SPD");
        }
    }

    index_t size() const { return n_; }

    void solve_into(const double* b, double* x) const {
        if (n_ == 0) return;
        Eigen::Map<const Eigen::VectorXd> bm(b, n_);
        Eigen::Map<Eigen::VectorXd> xm(x, n_);
        xm = ldlt_->solve(bm);
    }

    DenseVector solve(const DenseVector& b) const {
        if (static_cast<index_t>(b.size()) != n_)
            throw DimensionError("solve: dimension mismatch");
        DenseVector x(b.size());
        solve_into(b.data(), x.data());
        return x;
    }

private:
    index_t n_ = 0;
    std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

inline SpdFactor factor_spd(const SparseMatrix& A) { return SpdFactor(A); }

inline DenseVector solve(const SpdFactor& f, const DenseVector& b) { return f.solve(b); }

/// Writes the matrix in MatrixMarket coordinate text format.
inline void write_matrix_market(const SparseMatrix& A, std::ostream& os) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << A.nrows << " " << A.ncols << " " << A.nnz() << "\n";
    char buf[64];
    for (index_t i = 0; i < A.nrows; ++i) {
        for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k) {
            std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i + 1,
                          A.col_indices[static_cast<std::size_t>(k)] + 1,
                          A.values[static_cast<std::size_t>(k)]);
            os << buf;
        }
    }
}

}  // namespace ssc
