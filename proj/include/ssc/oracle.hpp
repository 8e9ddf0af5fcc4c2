#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/splitting.hpp"

// Brute-force reference implementations used by verification code and tests.
// Everything here is deliberately naive and shares no solver code with the
// main modules: dense Gaussian elimination, dense Cholesky, and a Jacobi
// eigensolver, so agreement with the sparse path is evidence rather than
// tautology.

namespace ssc::oracle {

constexpr index_t kDenseCap = 2000;
constexpr long long kSubsetCap = 100000;

struct DenseMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<double> data;  // row-major

    DenseMatrix() = default;
    DenseMatrix(index_t r, index_t c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(index_t i, index_t j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(index_t i, index_t j) const {
        return data[static_cast<std::size_t>(i) * cols + j];
    }
};

inline DenseMatrix to_dense(const SparseMatrix& A) {
    DenseMatrix D(A.nrows, A.ncols);
    for (index_t i = 0; i < A.nrows; ++i)
        for (index_t k = A.row_offsets[i]; k < A.row_offsets[i + 1]; ++k)
            D(i, A.col_indices[static_cast<std::size_t>(k)]) = A.values[static_cast<std::size_t>(k)];
    return D;
}

inline DenseVector matvec(const DenseMatrix& A, const DenseVector& x) {
    if (static_cast<index_t>(x.size()) != A.cols) throw DimensionError("oracle matvec: dimension mismatch");
    DenseVector y(static_cast<std::size_t>(A.rows), 0.0);
    for (index_t i = 0; i < A.rows; ++i) {
        double s = 0.0;
        for (index_t j = 0; j < A.cols; ++j) s += A(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

inline DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.cols != B.rows) throw DimensionError("oracle matmul: dimension mismatch");
    DenseMatrix C(A.rows, B.cols);
    for (index_t i = 0; i < A.rows; ++i)
        for (index_t k = 0; k < A.cols; ++k) {
            const double v = A(i, k);
            if (v == 0.0) continue;
            for (index_t j = 0; j < B.cols; ++j) C(i, j) += v * B(k, j);
        }
    return C;
}

inline DenseMatrix transpose(const DenseMatrix& A) {
    DenseMatrix T(A.cols, A.rows);
    for (index_t i = 0; i < A.rows; ++i)
        for (index_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

inline double quadratic_form(const DenseMatrix& A, const DenseVector& v) {
    return dot(v, matvec(A, v));
}

/// Gaussian elimination with partial pivoting. Throws SingularError when the
/// matrix is singular to working precision.
inline DenseVector dense_solve(DenseMatrix A, DenseVector b) {
    if (A.rows != A.cols) throw DimensionError("dense_solve: matrix not square");
    if (static_cast<index_t>(b.size()) != A.rows) throw DimensionError("dense_solve: rhs mismatch");
    if (A.rows > kDenseCap) throw CapError("dense_solve: size cap exceeded");
    const index_t n = A.rows;
    double scale = 0.0;
    for (double v : A.data) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw SingularError("dense_solve: zero matrix");

    std::vector<index_t> perm(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;

    for (index_t k = 0; k < n; ++k) {
        index_t piv = k;
        double best = std::abs(A(k, k));
        for (index_t i = k + 1; i < n; ++i) {
            const double v = std::abs(A(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= 1e-14 * scale) throw SingularError("dense_solve: singular to working precision");
        if (piv != k) {
            for (index_t j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
            std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(piv)]);
        }
        const double inv = 1.0 / A(k, k);
        for (index_t i = k + 1; i < n; ++i) {
            const double m = A(i, k) * inv;
            if (m == 0.0) continue;
            A(i, k) = 0.0;
            for (index_t j = k + 1; j < n; ++j) A(i, j) -= m * A(k, j);
            b[static_cast<std::size_t>(i)] -= m * b[static_cast<std::size_t>(k)];
        }
    }
    DenseVector x(static_cast<std::size_t>(n));
    for (index_t i = n - 1; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        for (index_t j = i + 1; j < n; ++j) s -= A(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s / A(i, i);
    }
    return x;
}

/// Dense inverse by elimination on the identity.
inline DenseMatrix dense_inverse(const DenseMatrix& A) {
    const index_t n = A.rows;
    DenseMatrix inv(n, n);
    DenseVector e(static_cast<std::size_t>(n), 0.0);
    for (index_t j = 0; j < n; ++j) {
        e.assign(static_cast<std::size_t>(n), 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        const DenseVector col = dense_solve(A, e);
        for (index_t i = 0; i < n; ++i) inv(i, j) = col[static_cast<std::size_t>(i)];
    }
    return inv;
}

/// Dense lower Cholesky factor of an SPD matrix.
inline DenseMatrix dense_cholesky(const DenseMatrix& A) {
    if (A.rows != A.cols) throw DimensionError("dense_cholesky: matrix not square");
    const index_t n = A.rows;
    DenseMatrix L(n, n);
    for (index_t j = 0; j < n; ++j) {
        double d = A(j, j);
        for (index_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > 0.0)) throw DefinitenessError("dense_cholesky: nonpositive pivot");
        L(j, j) = std::sqrt(d);
        for (index_t i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (index_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
inline std::vector<double> jacobi_eigenvalues(DenseMatrix A, int max_sweeps = 60) {
    if (A.rows != A.cols) throw DimensionError("jacobi_eigenvalues: matrix not square");
    const index_t n = A.rows;
    double scale = 0.0;
    for (double v : A.data) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return std::vector<double>(static_cast<std::size_t>(n), 0.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (index_t i = 0; i < n; ++i)
            for (index_t j = i + 1; j < n; ++j) off = std::max(off, std::abs(A(i, j)));
        if (off <= 1e-14 * scale) break;
        for (index_t p = 0; p < n; ++p) {
            for (index_t q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= 1e-16 * scale) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (index_t k = 0; k < n; ++k) {
                    const double akp = A(k, p);
                    const double akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (index_t k = 0; k < n; ++k) {
                    const double apk = A(p, k);
                    const double aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = A(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

/// Dense additive Schwarz operator and its exact spectrum in the energy
/// inner product.
struct DenseSchwarz {
    DenseMatrix Q;  // sum_i w_i R_i A_i^{-1} R_i^T
    DenseMatrix P;  // Q * A
    std::vector<double> eigenvalues;
    double lambda_min = 0.0;
    double lambda_max = 0.0;

    double kappa() const { return lambda_max / lambda_min; }
};

inline DenseSchwarz dense_schwarz_operator(const Splitting& s, const SparseMatrix& A) {
    const index_t N = A.nrows;
    if (N > kDenseCap) throw CapError("dense_schwarz_operator: size cap exceeded");
    const DenseMatrix Ad = to_dense(A);

    DenseSchwarz out;
    out.Q = DenseMatrix(N, N);
    for (int i = 1; i <= s.n; ++i) {
        const auto& dofs = s.sub(i).dofs;
        const index_t m = static_cast<index_t>(dofs.size());
        DenseMatrix Ai(m, m);
        for (index_t r = 0; r < m; ++r)
            for (index_t c = 0; c < m; ++c)
                Ai(r, c) = Ad(dofs[static_cast<std::size_t>(r)], dofs[static_cast<std::size_t>(c)]);
        const DenseMatrix Ainv = dense_inverse(Ai);
        const double w = s.weights[static_cast<std::size_t>(i)];
        for (index_t r = 0; r < m; ++r)
            for (index_t c = 0; c < m; ++c)
                out.Q(dofs[static_cast<std::size_t>(r)], dofs[static_cast<std::size_t>(c)]) +=
                    w * Ainv(r, c);
    }
    if (s.coarse_dim() > 0) {
        const DenseMatrix R0d = to_dense(s.R0);
        const DenseMatrix A0d = matmul(transpose(R0d), matmul(Ad, R0d));
        const DenseMatrix A0inv = dense_inverse(A0d);
        const DenseMatrix C = matmul(R0d, matmul(A0inv, transpose(R0d)));
        for (std::size_t idx = 0; idx < out.Q.data.size(); ++idx)
            out.Q.data[idx] += s.weights[0] * C.data[idx];
    }
    out.P = matmul(out.Q, Ad);

    // Eigenvalues of P (self-adjoint in the A-inner product) equal those of
    // the symmetric matrix L^T Q L where A = L L^T.
    const DenseMatrix L = dense_cholesky(Ad);
    const DenseMatrix M = matmul(transpose(L), matmul(out.Q, L));
    out.eigenvalues = jacobi_eigenvalues(M);
    out.lambda_min = out.eigenvalues.front();
    out.lambda_max = out.eigenvalues.back();
    return out;
}

/// Per-subproblem correction directions t_i = w_i R_i A_i^{-1} R_i^T (A e),
/// computed densely and independently of the sparse solver path.
inline std::vector<DenseVector> dense_corrections(const Splitting& s, const SparseMatrix& A,
                                                  const DenseVector& e) {
    const index_t N = A.nrows;
    if (N > kDenseCap) throw CapError("dense_corrections: size cap exceeded");
    const DenseMatrix Ad = to_dense(A);
    const DenseVector z = matvec(Ad, e);

    std::vector<DenseVector> t(static_cast<std::size_t>(s.n) + 1,
                               DenseVector(static_cast<std::size_t>(N), 0.0));
    if (s.coarse_dim() > 0) {
        const DenseMatrix R0d = to_dense(s.R0);
        const DenseMatrix A0d = matmul(transpose(R0d), matmul(Ad, R0d));
        const DenseVector r0 = matvec(transpose(R0d), z);
        const DenseVector d0 = dense_solve(A0d, r0);
        const DenseVector up = matvec(R0d, d0);
        for (index_t g = 0; g < N; ++g)
            t[0][static_cast<std::size_t>(g)] = s.weights[0] * up[static_cast<std::size_t>(g)];
    }
    for (int i = 1; i <= s.n; ++i) {
        const auto& dofs = s.sub(i).dofs;
        const index_t m = static_cast<index_t>(dofs.size());
        DenseMatrix Ai(m, m);
        DenseVector ri(static_cast<std::size_t>(m));
        for (index_t r = 0; r < m; ++r) {
            ri[static_cast<std::size_t>(r)] = z[static_cast<std::size_t>(dofs[static_cast<std::size_t>(r)])];
            for (index_t c = 0; c < m; ++c)
                Ai(r, c) = Ad(dofs[static_cast<std::size_t>(r)], dofs[static_cast<std::size_t>(c)]);
        }
        const DenseVector di = dense_solve(Ai, ri);
        const double w = s.weights[static_cast<std::size_t>(i)];
        for (index_t r = 0; r < m; ++r)
            t[static_cast<std::size_t>(i)][static_cast<std::size_t>(dofs[static_cast<std::size_t>(r)])] =
                w * di[static_cast<std::size_t>(r)];
    }
    return t;
}

/// Exact expectation of the squared energy error after one update step,
/// enumerating all size-p subsets of {0..n}.
inline double exhaustive_expectation(const Splitting& s, const SparseMatrix& A,
                                     const DenseVector& e, int p, double xi) {
    const int nn = s.n + 1;
    if (p < 1 || p > nn) throw ArgumentError("exhaustive_expectation: p out of range");
    long long subsets = 1;
    for (int i = 0; i < p; ++i) {
        subsets = subsets * (nn - i) / (i + 1);
        if (subsets > kSubsetCap) throw CapError("exhaustive_expectation: combinatorial cap exceeded");
    }
    const auto t = dense_corrections(s, A, e);
    const DenseMatrix Ad = to_dense(A);

    std::vector<int> comb(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) comb[static_cast<std::size_t>(i)] = i;
    double total = 0.0;
    long long count = 0;
    DenseVector v(e.size());
    for (;;) {
        v = e;
        for (int idx : comb) axpy_into(-xi, t[static_cast<std::size_t>(idx)], v);
        total += quadratic_form(Ad, v);
        ++count;
        // next combination in lexicographic order
        int i = p - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == nn - p + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < p; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    return total / static_cast<double>(count);
}

/// Squared splitting norm a(P^{-1} v, v) evaluated with the dense operator.
inline double splitting_norm_sq(const DenseSchwarz& ds, const SparseMatrix& A,
                                const DenseVector& v) {
    const DenseVector pinv_v = dense_solve(ds.P, v);
    return dot(spmv(A, v), pinv_v);
}

}  // namespace ssc::oracle
