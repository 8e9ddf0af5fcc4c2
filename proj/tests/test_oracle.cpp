#include <catch2/catch_amalgamated.hpp>

#include "ssc/oracle.hpp"
#include "support.hpp"

using namespace ssc;
using testsupport::random_spd;
using testsupport::random_vector;

TEST_CASE("dense solve basics", "[oracle]") {
    oracle::DenseMatrix I(3, 3);
    for (index_t i = 0; i < 3; ++i) I(i, i) = 1.0;
    Rng rng(71);
    const DenseVector b = random_vector(3, rng);
    REQUIRE(oracle::dense_solve(I, b) == b);

    oracle::DenseMatrix D(5, 5);
    DenseVector diag(5);
    for (index_t i = 0; i < 5; ++i) {
        D(i, i) = static_cast<double>(i + 1);
        diag[static_cast<std::size_t>(i)] = static_cast<double>(i + 1);
    }
    const DenseVector x = oracle::dense_solve(D, diag);
    for (double v : x) REQUIRE(v == Catch::Approx(1.0));

    oracle::DenseMatrix S(2, 2);
    S(0, 0) = 1.0;
    S(0, 1) = 2.0;
    S(1, 0) = 2.0;
    S(1, 1) = 4.0;
    REQUIRE_THROWS_AS(oracle::dense_solve(S, {1.0, 1.0}), SingularError);
}

TEST_CASE("dense and sparse solvers agree", "[oracle]") {
    Rng rng(72);
    const SparseMatrix A = random_spd(50, rng, 0.15);
    const DenseVector b = random_vector(50, rng);
    const DenseVector xs = solve(factor_spd(A), b);
    const DenseVector xd = oracle::dense_solve(oracle::to_dense(A), b);
    for (std::size_t i = 0; i < 50; ++i)
        REQUIRE(xs[i] == Catch::Approx(xd[i]).epsilon(1e-9).margin(1e-12));
}

TEST_CASE("jacobi eigenvalues on known matrices", "[oracle]") {
    oracle::DenseMatrix M(2, 2);
    M(0, 0) = 2.0;
    M(0, 1) = 1.0;
    M(1, 0) = 1.0;
    M(1, 1) = 2.0;
    const auto eig = oracle::jacobi_eigenvalues(M);
    REQUIRE(eig[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(eig[1] == Catch::Approx(3.0).margin(1e-12));

    // Symmetric tridiagonal Laplacian eigenvalues.
    const int n = 6;
    oracle::DenseMatrix T(n, n);
    for (index_t i = 0; i < n; ++i) {
        T(i, i) = 2.0;
        if (i + 1 < n) {
            T(i, i + 1) = -1.0;
            T(i + 1, i) = -1.0;
        }
    }
    const auto eigt = oracle::jacobi_eigenvalues(T);
    for (int k = 1; k <= n; ++k)
        REQUIRE(eigt[static_cast<std::size_t>(k - 1)] ==
                Catch::Approx(2.0 - 2.0 * std::cos(k * M_PI / (n + 1))).margin(1e-11));
}

TEST_CASE("dense schwarz operator on the degenerate splitting is the identity", "[oracle]") {
    const FemProblem p = assemble_unit_poisson(GridSpec(8, 1));
    const Splitting s = build_splitting(p.grid, 1, p.A);
    const auto ds = oracle::dense_schwarz_operator(s, p.A);
    for (index_t i = 0; i < ds.P.rows; ++i)
        for (index_t j = 0; j < ds.P.cols; ++j)
            REQUIRE(ds.P(i, j) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-10));
    REQUIRE(ds.lambda_min == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(ds.lambda_max == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("dense schwarz spectrum is positive for built splittings", "[oracle]") {
    for (int n0 : {2, 4}) {
        const FemProblem p = assemble_unit_poisson(GridSpec(4 * n0, n0));
        const Splitting s = build_splitting(p.grid, 1, p.A);
        const auto ds = oracle::dense_schwarz_operator(s, p.A);
        REQUIRE(ds.lambda_min > 0.0);
        REQUIRE(ds.lambda_max >= ds.lambda_min);
    }
}

TEST_CASE("exhaustive expectation degenerate cases", "[oracle]") {
    const FemProblem p = assemble_unit_poisson(GridSpec(8, 2));
    const Splitting s = build_splitting(p.grid, 1, p.A);
    const DenseVector e = oracle::dense_solve(oracle::to_dense(p.A), p.b);
    const double e0 = testsupport::energy_norm_sq(p.A, e);

    // xi = 0: nothing changes.
    REQUIRE(oracle::exhaustive_expectation(s, p.A, e, 2, 0.0) ==
            Catch::Approx(e0).epsilon(1e-12));

    // p = n+1: single deterministic term, the full update.
    const auto t = oracle::dense_corrections(s, p.A, e);
    DenseVector v = e;
    const double xi = 0.2;
    for (const auto& ti : t) axpy_into(-xi, ti, v);
    REQUIRE(oracle::exhaustive_expectation(s, p.A, e, s.n + 1, xi) ==
            Catch::Approx(testsupport::energy_norm_sq(p.A, v)).epsilon(1e-12));

    REQUIRE_THROWS_AS(oracle::exhaustive_expectation(s, p.A, e, 0, 0.1), ArgumentError);
}

TEST_CASE("combinatorial cap triggers", "[oracle]") {
    const FemProblem p = assemble_unit_poisson(GridSpec(16, 8));
    const Splitting s = build_splitting(p.grid, 1, p.A);  // 64 subdomains
    const DenseVector e(static_cast<std::size_t>(p.A.nrows), 1.0);
    REQUIRE_THROWS_AS(oracle::exhaustive_expectation(s, p.A, e, 20, 0.1), CapError);
}

TEST_CASE("splitting norm properties", "[oracle]") {
    // Degenerate splitting: the splitting norm is the energy norm.
    {
        const FemProblem p = assemble_unit_poisson(GridSpec(8, 1));
        const Splitting s = build_splitting(p.grid, 1, p.A);
        const auto ds = oracle::dense_schwarz_operator(s, p.A);
        Rng rng(73);
        const DenseVector v = random_vector(49, rng);
        REQUIRE(oracle::splitting_norm_sq(ds, p.A, v) ==
                Catch::Approx(testsupport::energy_norm_sq(p.A, v)).epsilon(1e-9));
    }
    // General splitting: sandwiched by the spectral bounds, quadratic in v.
    {
        const FemProblem p = assemble_unit_poisson(GridSpec(8, 2));
        const Splitting s = build_splitting(p.grid, 1, p.A);
        const auto ds = oracle::dense_schwarz_operator(s, p.A);
        Rng rng(74);
        for (int t = 0; t < 20; ++t) {
            const DenseVector v = random_vector(49, rng);
            const double norm = oracle::splitting_norm_sq(ds, p.A, v);
            const double energy = testsupport::energy_norm_sq(p.A, v);
            REQUIRE(norm >= energy / ds.lambda_max * (1.0 - 1e-9));
            REQUIRE(norm <= energy / ds.lambda_min * (1.0 + 1e-9));

            DenseVector v2 = v;
            for (auto& x : v2) x *= 2.0;
            REQUIRE(oracle::splitting_norm_sq(ds, p.A, v2) ==
                    Catch::Approx(4.0 * norm).epsilon(1e-10));
        }
    }
}

TEST_CASE("size caps are enforced", "[oracle]") {
    oracle::DenseMatrix big(oracle::kDenseCap + 1, oracle::kDenseCap + 1);
    DenseVector b(static_cast<std::size_t>(oracle::kDenseCap) + 1, 1.0);
    REQUIRE_THROWS_AS(oracle::dense_solve(big, b), CapError);
}
