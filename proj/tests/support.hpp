#pragma once

// Shared helpers and independent reference computations for the test suite.
// Reference paths here deliberately avoid the library's assembly, solver, and
// quadrature code.

#include <array>
#include <cmath>
#include <vector>

#include "ssc/fem.hpp"
#include "ssc/oracle.hpp"
#include "ssc/rng.hpp"
#include "ssc/sparse.hpp"

namespace testsupport {

using ssc::DenseVector;
using ssc::index_t;
using ssc::oracle::DenseMatrix;

// Q1 element stiffness on a square for unit coefficient, from the closed-form
// integrals of the bilinear gradients (h-independent in 2D):
// 2/3 on the diagonal, -1/6 between edge-adjacent nodes, -1/3 across the
// diagonal. Local node order (0,0),(1,0),(0,1),(1,1).
inline std::array<std::array<double, 4>, 4> q1_element_stiffness() {
    const double d = 2.0 / 3.0, e = -1.0 / 6.0, o = -1.0 / 3.0;
    return {{{d, e, e, o}, {e, d, o, e}, {e, o, d, e}, {o, e, e, d}}};
}

/// Dense finite-element reference assembly with 3x3 Gauss quadrature (one
/// order higher than the library) and its own shape-function evaluation.
inline std::pair<DenseMatrix, DenseVector> dense_fem_reference(const ssc::GridSpec& grid,
                                                               const ssc::ScalarField& a,
                                                               const ssc::ScalarField& f) {
    const int n1 = grid.n1;
    const double h = grid.h();
    const index_t N = grid.num_fine();
    DenseMatrix A(N, N);
    DenseVector b(static_cast<std::size_t>(N), 0.0);

    const double s = std::sqrt(3.0 / 5.0);
    const std::array<double, 3> gp = {0.5 - 0.5 * s, 0.5, 0.5 + 0.5 * s};
    const std::array<double, 3> gw = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

    auto phi = [](int p, double xi, double eta) {
        const double sx = (p & 1) ? xi : 1.0 - xi;
        const double sy = (p & 2) ? eta : 1.0 - eta;
        return sx * sy;
    };
    auto dphi = [](int p, double xi, double eta) -> std::array<double, 2> {
        const double sx = (p & 1) ? xi : 1.0 - xi;
        const double sy = (p & 2) ? eta : 1.0 - eta;
        return {((p & 1) ? 1.0 : -1.0) * sy, ((p & 2) ? 1.0 : -1.0) * sx};
    };

    for (int ey = 0; ey < n1; ++ey) {
        for (int ex = 0; ex < n1; ++ex) {
            index_t ids[4];
            for (int p = 0; p < 4; ++p) {
                const int ix = ex + (p & 1);
                const int iy = ey + ((p >> 1) & 1);
                ids[p] = (ix >= 1 && ix <= n1 - 1 && iy >= 1 && iy <= n1 - 1)
                             ? grid.fine_index(ix, iy)
                             : -1;
            }
            for (int gx = 0; gx < 3; ++gx) {
                for (int gy = 0; gy < 3; ++gy) {
                    const double w = gw[static_cast<std::size_t>(gx)] * gw[static_cast<std::size_t>(gy)];
                    const double xq = (ex + gp[static_cast<std::size_t>(gx)]) * h;
                    const double yq = (ey + gp[static_cast<std::size_t>(gy)]) * h;
                    const double aq = a(xq, yq);
                    const double fq = f(xq, yq);
                    for (int p = 0; p < 4; ++p) {
                        if (ids[p] < 0) continue;
                        const auto dp = dphi(p, gp[static_cast<std::size_t>(gx)], gp[static_cast<std::size_t>(gy)]);
                        b[static_cast<std::size_t>(ids[p])] +=
                            w * fq * phi(p, gp[static_cast<std::size_t>(gx)], gp[static_cast<std::size_t>(gy)]) * h * h;
                        for (int q = 0; q < 4; ++q) {
                            if (ids[q] < 0) continue;
                            const auto dq = dphi(q, gp[static_cast<std::size_t>(gx)], gp[static_cast<std::size_t>(gy)]);
                            A(ids[p], ids[q]) += w * aq * (dp[0] * dq[0] + dp[1] * dq[1]);
                        }
                    }
                }
            }
        }
    }
    return {std::move(A), std::move(b)};
}

/// Diagonally dominant random sparse SPD matrix.
inline ssc::SparseMatrix random_spd(int n, ssc::Rng& rng, double density = 0.1) {
    std::vector<ssc::Triplet> ts;
    std::vector<double> rowsum(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform01() < density) {
                const double v = rng.uniform(-1.0, 1.0);
                ts.push_back({i, j, v});
                ts.push_back({j, i, v});
                rowsum[static_cast<std::size_t>(i)] += std::abs(v);
                rowsum[static_cast<std::size_t>(j)] += std::abs(v);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        ts.push_back({i, i, rowsum[static_cast<std::size_t>(i)] + rng.uniform(0.5, 1.5)});
    return ssc::assemble(ts, n, n);
}

inline DenseVector random_vector(std::size_t n, ssc::Rng& rng, double lo = -1.0,
                                 double hi = 1.0) {
    DenseVector v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

/// Compensated (Kahan) summation dot product.
inline double kahan_dot(const DenseVector& x, const DenseVector& y) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double term = x[i] * y[i] - comp;
        const double next = sum + term;
        comp = (next - sum) - term;
        sum = next;
    }
    return sum;
}

inline double energy_norm_sq(const ssc::SparseMatrix& A, const DenseVector& v) {
    return ssc::dot(v, ssc::spmv(A, v));
}

}  // namespace testsupport
