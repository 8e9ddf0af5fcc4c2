#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/fem.hpp"
#include "ssc/rng.hpp"
#include "ssc/sparse.hpp"

namespace ssc {

/// One overlapping subdomain: its coarse cell, the rectangle of fine interior
/// nodes it owns (inclusive bounds), the sorted global dof set, and the
/// factorization of the local stiffness block.
struct Subdomain {
    int id = 0;  // 1..n
    int cx = 0, cy = 0;
    int x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    std::vector<index_t> dofs;
    SpdFactor factor;

    int size() const { return static_cast<int>(dofs.size()); }
};

/// Weights for the subspace solves. Either uniform values (one for the
/// subdomains, one for the coarse space) or an explicit per-index vector.
struct WeightSpec {
    double subdomain = 1.0;
    double coarse = 1.0;
    std::vector<double> per_index;  // optional, size n+1, index 0 = coarse

    std::vector<double> resolve(int n) const {
        std::vector<double> w;
        if (!per_index.empty()) {
            if (static_cast<int>(per_index.size()) != n + 1)
                throw ArgumentError("WeightSpec: per-index weights must have size n+1");
            w = per_index;
        } else {
            w.assign(static_cast<std::size_t>(n) + 1, subdomain);
            w[0] = coarse;
        }
        for (double v : w)
            if (!(v > 0.0)) throw ArgumentError("WeightSpec: weights must be positive");
        return w;
    }
};

/// Overlapping domain-decomposition splitting with coarse space: subdomain
/// dof sets and factors, coarse prolongation and Galerkin operator, the
/// neighbor graph, and weights.
struct Splitting {
    GridSpec grid;
    int n = 0;       // subdomain count, n0^2
    int layers = 0;  // fine-cell layers added per direction
    double delta = 0.0;
    std::vector<double> weights;       // size n+1, index 0 = coarse
    std::vector<Subdomain> subdomains; // id i stored at index i-1
    SparseMatrix R0;                   // N x M0 prolongation
    SparseMatrix A0;                   // M0 x M0 Galerkin coarse operator
    SpdFactor coarse_factor;
    std::vector<std::vector<int>> neighbors;        // ids, sorted, per subdomain
    std::vector<std::vector<index_t>> coarse_support;  // coarse columns meeting each subdomain
    int max_neighbors = 0;

    const Subdomain& sub(int i) const { return subdomains[static_cast<std::size_t>(i - 1)]; }
    const std::vector<int>& neighbors_of(int i) const {
        return neighbors[static_cast<std::size_t>(i - 1)];
    }
    index_t coarse_dim() const { return R0.ncols; }
};

/// Builds the overlapping splitting: each coarse cell expanded by `layers`
/// fine-cell layers per direction, clipped at the physical boundary; the dof
/// set is the fine interior nodes strictly inside the expanded region.
inline Splitting build_splitting(const GridSpec& grid, int layers, const SparseMatrix& A,
                                 const WeightSpec& wspec = {}) {
    const int k = grid.k();
    if (layers <= 0 || layers >= k)
        throw OverlapError("build_splitting: need 0 < layers < k");
    if (A.nrows != grid.num_fine() || A.ncols != grid.num_fine())
        throw DimensionError("build_splitting: matrix does not match grid");

    Splitting s;
    s.grid = grid;
    s.n = grid.n0 * grid.n0;
    s.layers = layers;
    s.delta = static_cast<double>(layers) / k;
    s.weights = wspec.resolve(s.n);

    s.subdomains.resize(static_cast<std::size_t>(s.n));
    for (int cy = 0; cy < grid.n0; ++cy) {
        for (int cx = 0; cx < grid.n0; ++cx) {
            Subdomain& d = s.subdomains[static_cast<std::size_t>(cy * grid.n0 + cx)];
            d.id = cy * grid.n0 + cx + 1;
            d.cx = cx;
            d.cy = cy;
            const int cell_xlo = std::max(0, cx * k - layers);
            const int cell_xhi = std::min(grid.n1, (cx + 1) * k + layers);
            const int cell_ylo = std::max(0, cy * k - layers);
            const int cell_yhi = std::min(grid.n1, (cy + 1) * k + layers);
            d.x_lo = std::max(1, cell_xlo + 1);
            d.x_hi = std::min(grid.n1 - 1, cell_xhi - 1);
            d.y_lo = std::max(1, cell_ylo + 1);
            d.y_hi = std::min(grid.n1 - 1, cell_yhi - 1);
            d.dofs.reserve(static_cast<std::size_t>(d.x_hi - d.x_lo + 1) *
                           static_cast<std::size_t>(d.y_hi - d.y_lo + 1));
            for (int iy = d.y_lo; iy <= d.y_hi; ++iy)
                for (int ix = d.x_lo; ix <= d.x_hi; ++ix)
                    d.dofs.push_back(grid.fine_index(ix, iy));
            const SparseMatrix Ai = extract_block(A, d.dofs, d.dofs);
            d.factor = SpdFactor(Ai);
        }
    }

    // Neighbor graph from nonempty dof-rectangle intersections.
    s.neighbors.assign(static_cast<std::size_t>(s.n), {});
    for (int i = 0; i < s.n; ++i) {
        for (int j = i + 1; j < s.n; ++j) {
            const Subdomain& a = s.subdomains[static_cast<std::size_t>(i)];
            const Subdomain& b = s.subdomains[static_cast<std::size_t>(j)];
            const bool meet = a.x_lo <= b.x_hi && b.x_lo <= a.x_hi && a.y_lo <= b.y_hi &&
                              b.y_lo <= a.y_hi;
            if (meet) {
                s.neighbors[static_cast<std::size_t>(i)].push_back(j + 1);
                s.neighbors[static_cast<std::size_t>(j)].push_back(i + 1);
            }
        }
    }
    for (auto& nb : s.neighbors) {
        std::sort(nb.begin(), nb.end());
        s.max_neighbors = std::max(s.max_neighbors, static_cast<int>(nb.size()));
    }

    // Coarse space and its Galerkin operator.
    s.R0 = coarse_prolongation(grid);
    if (grid.num_coarse() > 0) {
        s.A0 = coarse_operator(A, s.R0);
        s.coarse_factor = SpdFactor(s.A0);
    } else {
        s.A0 = SparseMatrix{0, 0, {0}, {}, {}};
    }

    // Coarse basis functions whose support intersects each subdomain.
    s.coarse_support.assign(static_cast<std::size_t>(s.n), {});
    for (int i = 0; i < s.n; ++i) {
        const Subdomain& d = s.subdomains[static_cast<std::size_t>(i)];
        for (int CY = 1; CY <= grid.n0 - 1; ++CY) {
            if ((CY - 1) * k >= d.y_hi || (CY + 1) * k <= d.y_lo) continue;
            for (int CX = 1; CX <= grid.n0 - 1; ++CX) {
                if ((CX - 1) * k >= d.x_hi || (CX + 1) * k <= d.x_lo) continue;
                s.coarse_support[static_cast<std::size_t>(i)].push_back(
                    grid.coarse_index(CX, CY));
            }
        }
    }
    return s;
}

/// Extracts the coupling block A(J_{i'}, J_i) between two subdomains
/// (index 0 addresses the coarse space via R0 columns and is not supported
/// here; coarse coupling acts through R0 directly).
inline SparseMatrix coupling_block(const Splitting& s, const SparseMatrix& A, int i_from,
                                   int i_to) {
    return extract_block(A, s.sub(i_to).dofs, s.sub(i_from).dofs);
}

inline void gather(const DenseVector& global, const std::vector<index_t>& idx,
                   DenseVector& local) {
    local.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
        local[k] = global[static_cast<std::size_t>(idx[k])];
}

inline void scatter_add(const DenseVector& local, const std::vector<index_t>& idx,
                        double scale, DenseVector& global) {
    for (std::size_t k = 0; k < idx.size(); ++k)
        global[static_cast<std::size_t>(idx[k])] += scale * local[k];
}

/// Local subproblem solve d_i = A_i^{-1} r|_{J_i} for i >= 1; for i = 0 the
/// coarse path d_0 = A_0^{-1} R_0^T r. The input residual is global.
inline DenseVector local_solve(const Splitting& s, int i, const DenseVector& r) {
    if (static_cast<index_t>(r.size()) != s.grid.num_fine())
        throw DimensionError("local_solve: residual has wrong dimension");
    if (i == 0) {
        if (s.coarse_dim() == 0) return {};
        return s.coarse_factor.solve(spmv_transpose(s.R0, r));
    }
    if (i < 1 || i > s.n) throw ArgumentError("local_solve: subdomain index out of range");
    DenseVector ri;
    gather(r, s.sub(i).dofs, ri);
    return s.sub(i).factor.solve(ri);
}

/// Applies the weighted additive Schwarz operator
///   P x = sum_i w_i R_i A_i^{-1} R_i^T (A x),
/// with the i = 0 term routed through the coarse space. Summation order is
/// fixed (ascending i) for reproducibility.
inline DenseVector apply_schwarz_operator(const Splitting& s, const SparseMatrix& A,
                                          const DenseVector& x) {
    const DenseVector z = spmv(A, x);
    DenseVector acc(x.size(), 0.0);
    if (s.coarse_dim() > 0) {
        const DenseVector d0 = s.coarse_factor.solve(spmv_transpose(s.R0, z));
        const DenseVector up = spmv(s.R0, d0);
        axpy_into(s.weights[0], up, acc);
    }
    DenseVector ri, di;
    for (int i = 1; i <= s.n; ++i) {
        gather(z, s.sub(i).dofs, ri);
        di.resize(ri.size());
        s.sub(i).factor.solve_into(ri.data(), di.data());
        scatter_add(di, s.sub(i).dofs, s.weights[static_cast<std::size_t>(i)], acc);
    }
    return acc;
}

/// Eigenvalues of a symmetric tridiagonal matrix by bisection on Sturm
/// sequence counts. diag has size m, offdiag size m-1. Ascending order.
inline std::vector<double> tridiag_eigenvalues(const std::vector<double>& diag,
                                               const std::vector<double>& offdiag) {
    const int m = static_cast<int>(diag.size());
    if (m == 0) return {};
    double lo = diag[0], hi = diag[0];
    for (int i = 0; i < m; ++i) {
        const double left = i > 0 ? std::abs(offdiag[static_cast<std::size_t>(i - 1)]) : 0.0;
        const double right = i < m - 1 ? std::abs(offdiag[static_cast<std::size_t>(i)]) : 0.0;
        lo = std::min(lo, diag[static_cast<std::size_t>(i)] - left - right);
        hi = std::max(hi, diag[static_cast<std::size_t>(i)] + left + right);
    }
    const double pad = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    lo -= pad;
    hi += pad;

    // Number of eigenvalues strictly below x (negative pivots of T - xI).
    auto count_below = [&](double x) {
        int cnt = 0;
        double q = diag[0] - x;
        if (q < 0) ++cnt;
        for (int i = 1; i < m; ++i) {
            const double e = offdiag[static_cast<std::size_t>(i - 1)];
            if (q == 0.0) q = 1e-300;
            q = diag[static_cast<std::size_t>(i)] - x - e * e / q;
            if (q < 0) ++cnt;
        }
        return cnt;
    };

    std::vector<double> eig(static_cast<std::size_t>(m));
    for (int kk = 0; kk < m; ++kk) {
        double a = lo, b = hi;
        for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
            const double mid = 0.5 * (a + b);
            if (count_below(mid) >= kk + 1)
                b = mid;
            else
                a = mid;
        }
        eig[static_cast<std::size_t>(kk)] = 0.5 * (a + b);
    }
    return eig;
}

struct SpectralBounds {
    double lambda_min_est = 0.0;
    double lambda_max_est = 0.0;
    // Optional user-supplied safe bounds enclosing the true spectrum.
    std::optional<double> lambda_lower;
    std::optional<double> lambda_upper;

    double kappa_est() const { return lambda_max_est / lambda_min_est; }
    double kappa_bar() const {
        const double up = lambda_upper.value_or(lambda_max_est);
        const double low = lambda_lower.value_or(lambda_min_est);
        return up / low;
    }
};

/// Estimates the extreme eigenvalues of the additive Schwarz operator by
/// Lanczos iteration in the energy inner product a(u,v) = u^T A v, with full
/// reorthogonalization. Terminates early on stagnation of the extreme Ritz
/// values or on invariant-subspace deflation.
inline SpectralBounds estimate_spectral_bounds(const Splitting& s, const SparseMatrix& A,
                                               int iterations, std::uint64_t seed) {
    const index_t N = A.nrows;
    const int maxit = std::min<int>(iterations, N);
    if (maxit < 1) throw ArgumentError("estimate_spectral_bounds: need at least one iteration");

    for (int attempt = 0; attempt < 3; ++attempt) {
        Rng rng = Rng(seed).derive(stream_tag("lanczos"), static_cast<std::uint64_t>(attempt));
        DenseVector v(static_cast<std::size_t>(N));
        for (auto& e : v) e = rng.uniform(-1.0, 1.0);
        {
            const DenseVector av = spmv(A, v);
            const double nrm = std::sqrt(std::max(0.0, dot(av, v)));
            if (!(nrm > 0.0) || !std::isfinite(nrm)) continue;
            for (auto& e : v) e /= nrm;
        }

        std::vector<DenseVector> basis{v};
        std::vector<double> alpha, beta;
        double prev_min = 0.0, prev_max = 0.0;
        bool valid = true;

        for (int j = 0; j < maxit; ++j) {
            DenseVector p = apply_schwarz_operator(s, A, basis.back());
            // Full Gram-Schmidt in the A-inner product, two passes; the
            // coefficient against v_j is the tridiagonal diagonal entry.
            DenseVector y = spmv(A, p);
            double aj = 0.0;
            for (std::size_t i = 0; i < basis.size(); ++i) {
                const double g = dot(y, basis[i]);
                if (i + 1 == basis.size()) aj = g;
                axpy_into(-g, basis[i], p);
            }
            y = spmv(A, p);
            for (std::size_t i = 0; i < basis.size(); ++i)
                axpy_into(-dot(y, basis[i]), basis[i], p);
            alpha.push_back(aj);

            y = spmv(A, p);
            const double bsq = dot(y, p);
            const double bj = std::sqrt(std::max(0.0, bsq));
            if (!std::isfinite(bj) || !std::isfinite(aj)) {
                valid = false;
                break;
            }

            const auto ritz = tridiag_eigenvalues(alpha, beta);
            const double rmin = ritz.front();
            const double rmax = ritz.back();
            const bool deflated = bj <= 1e-12 * std::max(1.0, rmax);
            const bool stagnated =
                j >= 4 && std::abs(rmin - prev_min) <= 1e-11 * std::max(1.0, std::abs(rmin)) &&
                std::abs(rmax - prev_max) <= 1e-11 * std::max(1.0, std::abs(rmax));
            prev_min = rmin;
            prev_max = rmax;
            if (deflated || stagnated || j == maxit - 1) break;

            beta.push_back(bj);
            for (auto& e : p) e /= bj;
            basis.push_back(std::move(p));
        }

        if (!valid || alpha.empty()) continue;
        const auto ritz = tridiag_eigenvalues(alpha, beta);
        if (!(ritz.front() > 0.0)) continue;
        SpectralBounds out;
        out.lambda_min_est = ritz.front();
        out.lambda_max_est = ritz.back();
        return out;
    }
    throw EstimationError("estimate_spectral_bounds: no valid estimate after 3 restarts");
}

/// Structured text summary of a splitting (and optional spectral estimates).
inline std::string summary(const Splitting& s, const SpectralBounds* bounds = nullptr) {
    int m_min = s.subdomains.empty() ? 0 : s.subdomains.front().size();
    int m_max = 0;
    long long m_sum = 0;
    for (const auto& d : s.subdomains) {
        m_min = std::min(m_min, d.size());
        m_max = std::max(m_max, d.size());
        m_sum += d.size();
    }
    char buf[512];
    std::string out;
    std::snprintf(buf, sizeof(buf), "subdomains = %d\n", s.n);
    out += buf;
    std::snprintf(buf, sizeof(buf), "grid = n0 %d, n1 %d, k %d\n", s.grid.n0, s.grid.n1,
                  s.grid.k());
    out += buf;
    std::snprintf(buf, sizeof(buf), "overlap = %d layers, delta %.6g\n", s.layers, s.delta);
    out += buf;
    std::snprintf(buf, sizeof(buf), "fine_dofs = %d\ncoarse_dofs = %d\n",
                  static_cast<int>(s.grid.num_fine()), static_cast<int>(s.coarse_dim()));
    out += buf;
    std::snprintf(buf, sizeof(buf), "subdomain_dofs = min %d, mean %.1f, max %d\n", m_min,
                  s.n > 0 ? static_cast<double>(m_sum) / s.n : 0.0, m_max);
    out += buf;
    std::snprintf(buf, sizeof(buf), "max_neighbors = %d\n", s.max_neighbors);
    out += buf;
    if (bounds) {
        std::snprintf(buf, sizeof(buf),
                      "lambda_min_est = %.6g\nlambda_max_est = %.6g\nkappa_est = %.6g\n",
                      bounds->lambda_min_est, bounds->lambda_max_est, bounds->kappa_est());
        out += buf;
    }
    return out;
}

}  // namespace ssc
