#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "ssc/error.hpp"
#include "ssc/sparse.hpp"

namespace ssc {

/// Nested uniform grids on the unit square: a fine grid with n1 cells per
/// direction and a coarse grid with n0 cells per direction, n0 | n1.
struct GridSpec {
    int n1 = 0;  // fine subdivisions per direction, h = 1/n1
    int n0 = 0;  // coarse subdivisions per direction, h0 = 1/n0

    GridSpec() = default;
    GridSpec(int fine, int coarse) : n1(fine), n0(coarse) {
        if (coarse < 1 || fine < 2) throw ArgumentError("GridSpec: need n0 >= 1, n1 >= 2");
        if (fine % coarse != 0) throw ArgumentError("GridSpec: n0 must divide n1");
        if (fine / coarse < 2) throw ArgumentError("GridSpec: refinement factor k must exceed 1");
    }

    int k() const { return n1 / n0; }
    double h() const { return 1.0 / n1; }
    double h0() const { return 1.0 / n0; }
    int fine_per_dir() const { return n1 - 1; }
    int coarse_per_dir() const { return n0 - 1; }
    index_t num_fine() const { return static_cast<index_t>(n1 - 1) * (n1 - 1); }
    index_t num_coarse() const { return static_cast<index_t>(n0 - 1) * (n0 - 1); }

    /// Row-major index of the interior fine node (ix, iy), 1 <= ix, iy <= n1-1.
    index_t fine_index(int ix, int iy) const {
        return static_cast<index_t>(iy - 1) * (n1 - 1) + (ix - 1);
    }
    std::array<int, 2> fine_coords(index_t idx) const {
        return {static_cast<int>(idx % (n1 - 1)) + 1, static_cast<int>(idx / (n1 - 1)) + 1};
    }
    index_t coarse_index(int ix, int iy) const {
        return static_cast<index_t>(iy - 1) * (n0 - 1) + (ix - 1);
    }
};

using ScalarField = std::function<double(double, double)>;

/// Discretized model problem: stiffness matrix, load vector, grid, and
/// human-readable descriptors of the coefficient and right-hand side.
struct FemProblem {
    SparseMatrix A;
    DenseVector b;
    GridSpec grid;
    std::string coefficient_desc;
    std::string rhs_desc;
};

/// Assembles the bilinear (Q1) finite element discretization of
///   -div(a grad u) = f  on the unit square, u = 0 on the boundary,
/// with element integrals evaluated by 2x2 Gauss quadrature (exact for
/// constant a). Rows/columns of boundary nodes are eliminated.
inline FemProblem assemble_poisson(const GridSpec& grid, const ScalarField& a,
                                   const ScalarField& f,
                                   std::string coefficient_desc = "a",
                                   std::string rhs_desc = "f") {
    const int n1 = grid.n1;
    const double h = grid.h();
    const index_t N = grid.num_fine();

    // 2x2 Gauss points on [0,1], weight 1/4 each.
    const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
    const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
    const std::array<double, 2> gp = {g0, g1};

    // Reference basis on [0,1]^2, local node order (0,0),(1,0),(0,1),(1,1).
    auto shape = [](int p, double xi, double eta) {
        const double sx = (p & 1) ? xi : 1.0 - xi;
        const double sy = (p & 2) ? eta : 1.0 - eta;
        return sx * sy;
    };
    auto dshape = [](int p, double xi, double eta) -> std::array<double, 2> {
        const double sx = (p & 1) ? xi : 1.0 - xi;
        const double sy = (p & 2) ? eta : 1.0 - eta;
        const double dx = (p & 1) ? 1.0 : -1.0;
        const double dy = (p & 2) ? 1.0 : -1.0;
        return {dx * sy, sx * dy};
    };

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(n1) * n1 * 16);
    DenseVector b(static_cast<std::size_t>(N), 0.0);

    for (int ey = 0; ey < n1; ++ey) {
        for (int ex = 0; ex < n1; ++ex) {
            const double x0 = ex * h;
            const double y0 = ey * h;
            double ke[4][4] = {};
            double fe[4] = {};
            for (double gx : gp) {
                for (double gy : gp) {
                    const double xq = x0 + h * gx;
                    const double yq = y0 + h * gy;
                    const double aq = a(xq, yq);
                    if (!(aq > 0.0))
                        throw EllipticityError("assemble_poisson: coefficient nonpositive at quadrature point");
                    const double fq = f(xq, yq);
                    for (int p = 0; p < 4; ++p) {
                        const auto dp = dshape(p, gx, gy);
                        fe[p] += 0.25 * fq * shape(p, gx, gy) * h * h;
                        for (int q = 0; q < 4; ++q) {
                            const auto dq = dshape(q, gx, gy);
                            // Gradients scale with 1/h, area with h^2.
                            ke[p][q] += 0.25 * aq * (dp[0] * dq[0] + dp[1] * dq[1]);
                        }
                    }
                }
            }
            // Local node p -> fine grid node (ex + (p&1), ey + ((p>>1)&1)).
            index_t ids[4];
            for (int p = 0; p < 4; ++p) {
                const int ix = ex + (p & 1);
                const int iy = ey + ((p >> 1) & 1);
                const bool interior = ix >= 1 && ix <= n1 - 1 && iy >= 1 && iy <= n1 - 1;
                ids[p] = interior ? grid.fine_index(ix, iy) : -1;
            }
            for (int p = 0; p < 4; ++p) {
                if (ids[p] < 0) continue;
                b[static_cast<std::size_t>(ids[p])] += fe[p];
                for (int q = 0; q < 4; ++q) {
                    if (ids[q] < 0) continue;
                    triplets.push_back({ids[p], ids[q], ke[p][q]});
                }
            }
        }
    }

    FemProblem problem;
    problem.A = assemble(triplets, N, N);
    problem.b = std::move(b);
    problem.grid = grid;
    problem.coefficient_desc = std::move(coefficient_desc);
    problem.rhs_desc = std::move(rhs_desc);
    return problem;
}

/// Unit-coefficient, unit-load instance of the model problem.
inline FemProblem assemble_unit_poisson(const GridSpec& grid, bool zero_rhs = false) {
    const double fval = zero_rhs ? 0.0 : 1.0;
    return assemble_poisson(
        grid, [](double, double) { return 1.0; },
        [fval](double, double) { return fval; }, "a=1", zero_rhs ? "f=0" : "f=1");
}

/// Bilinear interpolation matrix from coarse interior nodes to fine interior
/// nodes; columns are coarse nodal hat functions sampled at fine nodes.
inline SparseMatrix coarse_prolongation(const GridSpec& grid) {
    const int k = grid.k();
    const index_t N = grid.num_fine();
    const index_t M0 = grid.num_coarse();
    auto hat = [](double t) { return std::max(0.0, 1.0 - std::abs(t)); };

    std::vector<Triplet> triplets;
    for (int iy = 1; iy <= grid.n1 - 1; ++iy) {
        for (int ix = 1; ix <= grid.n1 - 1; ++ix) {
            const index_t row = grid.fine_index(ix, iy);
            // Coarse cells containing this node touch coarse node indices
            // floor(ix/k) and floor(ix/k)+1 per direction.
            const int cx0 = ix / k;
            const int cy0 = iy / k;
            for (int cy = cy0; cy <= cy0 + 1; ++cy) {
                if (cy < 1 || cy > grid.n0 - 1) continue;
                const double wy = hat(static_cast<double>(iy) / k - cy);
                if (wy == 0.0) continue;
                for (int cx = cx0; cx <= cx0 + 1; ++cx) {
                    if (cx < 1 || cx > grid.n0 - 1) continue;
                    const double wx = hat(static_cast<double>(ix) / k - cx);
                    if (wx == 0.0) continue;
                    triplets.push_back({row, grid.coarse_index(cx, cy), wx * wy});
                }
            }
        }
    }
    return assemble(triplets, N, M0);
}

/// Galerkin coarse operator R0^T A R0.
inline SparseMatrix coarse_operator(const SparseMatrix& A, const SparseMatrix& R0) {
    if (A.nrows != A.ncols || A.nrows != R0.nrows)
        throw DimensionError("coarse_operator: dimension mismatch");
    const index_t M0 = R0.ncols;
    // Dense accumulator; coarse dimensions stay small (M0 ~ n).
    std::vector<double> acc(static_cast<std::size_t>(M0) * static_cast<std::size_t>(M0), 0.0);
    for (index_t g = 0; g < A.nrows; ++g) {
        for (index_t ka = A.row_offsets[g]; ka < A.row_offsets[g + 1]; ++ka) {
            const index_t hcol = A.col_indices[static_cast<std::size_t>(ka)];
            const double v = A.values[static_cast<std::size_t>(ka)];
            for (index_t kr = R0.row_offsets[g]; kr < R0.row_offsets[g + 1]; ++kr) {
                const index_t c1 = R0.col_indices[static_cast<std::size_t>(kr)];
                const double w1 = R0.values[static_cast<std::size_t>(kr)] * v;
                for (index_t kc = R0.row_offsets[hcol]; kc < R0.row_offsets[hcol + 1]; ++kc) {
                    const index_t c2 = R0.col_indices[static_cast<std::size_t>(kc)];
                    acc[static_cast<std::size_t>(c1) * M0 + c2] +=
                        w1 * R0.values[static_cast<std::size_t>(kc)];
                }
            }
        }
    }
    std::vector<Triplet> triplets;
    for (index_t i = 0; i < M0; ++i)
        for (index_t j = 0; j < M0; ++j) {
            const double v = acc[static_cast<std::size_t>(i) * M0 + j];
            if (v != 0.0) triplets.push_back({i, j, v});
        }
    return assemble(triplets, M0, M0);
}

}  // namespace ssc
