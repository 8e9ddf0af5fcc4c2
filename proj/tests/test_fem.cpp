#include <catch2/catch_amalgamated.hpp>

#include "ssc/fem.hpp"
#include "ssc/oracle.hpp"
#include "support.hpp"

using namespace ssc;

namespace {
const ScalarField one = [](double, double) { return 1.0; };
}

TEST_CASE("grid validation", "[fem]") {
    REQUIRE_THROWS_AS(GridSpec(9, 2), ArgumentError);   // n0 does not divide n1
    REQUIRE_THROWS_AS(GridSpec(4, 4), ArgumentError);   // refinement factor 1
    REQUIRE_NOTHROW(GridSpec(4, 2));
    const GridSpec g(8, 2);
    REQUIRE(g.k() == 4);
    REQUIRE(g.num_fine() == 49);
    REQUIRE(g.num_coarse() == 1);
}

TEST_CASE("single-interior-node discretization", "[fem]") {
    const FemProblem p = assemble_poisson(GridSpec(2, 1), one, one);
    REQUIRE(p.A.nrows == 1);
    REQUIRE(p.A.coeff(0, 0) == Catch::Approx(8.0 / 3.0).epsilon(1e-14));
    REQUIRE(p.b[0] == Catch::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("interior row sums vanish for unit coefficient", "[fem]") {
    const FemProblem p = assemble_unit_poisson(GridSpec(8, 2));
    const GridSpec& g = p.grid;
    for (int iy = 2; iy <= 6; ++iy) {
        for (int ix = 2; ix <= 6; ++ix) {
            const index_t row = g.fine_index(ix, iy);
            double sum = 0.0;
            for (index_t k = p.A.row_offsets[row]; k < p.A.row_offsets[row + 1]; ++k)
                sum += p.A.values[static_cast<std::size_t>(k)];
            REQUIRE(sum == Catch::Approx(0.0).margin(1e-13));
        }
    }
}

TEST_CASE("nine-point stencil for unit coefficient", "[fem]") {
    const GridSpec g(8, 2);
    const FemProblem p = assemble_unit_poisson(g);
    // Confirmed against the independent quadrature reference below before
    // freezing the constants.
    const index_t center = g.fine_index(4, 4);
    REQUIRE(p.A.coeff(center, center) == Catch::Approx(8.0 / 3.0).epsilon(1e-14));
    REQUIRE(p.A.coeff(center, g.fine_index(5, 4)) == Catch::Approx(-1.0 / 3.0).epsilon(1e-14));
    REQUIRE(p.A.coeff(center, g.fine_index(4, 5)) == Catch::Approx(-1.0 / 3.0).epsilon(1e-14));
    REQUIRE(p.A.coeff(center, g.fine_index(5, 5)) == Catch::Approx(-1.0 / 3.0).epsilon(1e-14));
    REQUIRE(p.A.coeff(center, g.fine_index(3, 3)) == Catch::Approx(-1.0 / 3.0).epsilon(1e-14));

    const auto [Aref, bref] = testsupport::dense_fem_reference(g, one, one);
    for (index_t i = 0; i < p.A.nrows; ++i)
        for (index_t j = 0; j < p.A.ncols; ++j)
            REQUIRE(p.A.coeff(i, j) == Catch::Approx(Aref(i, j)).margin(1e-14));
    for (std::size_t i = 0; i < p.b.size(); ++i)
        REQUIRE(p.b[i] == Catch::Approx(bref[i]).margin(1e-16));
}

TEST_CASE("solution agrees with dense solve and obeys the maximum principle", "[fem]") {
    const FemProblem p = assemble_unit_poisson(GridSpec(8, 2));
    const DenseVector x = solve(factor_spd(p.A), p.b);
    const DenseVector xd = oracle::dense_solve(oracle::to_dense(p.A), p.b);
    double mx = 0.0, mxd = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx = std::max(mx, x[i]);
        mxd = std::max(mxd, xd[i]);
        REQUIRE(x[i] >= -1e-12);  // f >= 0 forces a nonnegative solution
    }
    REQUIRE(mx == Catch::Approx(mxd).epsilon(1e-9));
}

TEST_CASE("nonpositive coefficient is rejected", "[fem]") {
    const ScalarField bad = [](double x, double) { return x < 0.5 ? 1.0 : -1.0; };
    REQUIRE_THROWS_AS(assemble_poisson(GridSpec(4, 2), bad, one), EllipticityError);
}

TEST_CASE("variable coefficient assembly matches the reference", "[fem]") {
    const ScalarField a = [](double x, double y) { return 1.0 + x + 2.0 * y * y; };
    const ScalarField f = [](double x, double y) { return std::sin(3.0 * x) + y; };
    const GridSpec g(6, 3);
    const FemProblem p = assemble_poisson(g, a, f);
    // The library integrates with 2x2 Gauss; the reference uses 3x3. For this
    // coefficient the quadratures differ below 1e-4 on element level, so
    // compare loosely but entrywise.
    const auto [Aref, bref] = testsupport::dense_fem_reference(g, a, f);
    for (index_t i = 0; i < p.A.nrows; ++i)
        for (index_t j = 0; j < p.A.ncols; ++j)
            REQUIRE(p.A.coeff(i, j) == Catch::Approx(Aref(i, j)).margin(2e-3));
    validate_symmetric(p.A, 1e-12);
}

TEST_CASE("prolongation rows interpolate", "[fem]") {
    const GridSpec g(4, 2);  // k = 2: odd fine nodes sit on coarse edge midpoints
    const SparseMatrix R0 = coarse_prolongation(g);
    REQUIRE(R0.nrows == 9);
    REQUIRE(R0.ncols == 1);

    // Fine node (2,2) coincides with the single coarse node.
    const index_t coincident = g.fine_index(2, 2);
    REQUIRE(R0.row_offsets[coincident + 1] - R0.row_offsets[coincident] == 1);
    REQUIRE(R0.coeff(coincident, 0) == 1.0);

    // Fine node (1,2) is the midpoint of a coarse edge: one visible coarse
    // node at weight 1/2 (its partner is a boundary node and is eliminated).
    REQUIRE(R0.coeff(g.fine_index(1, 2), 0) == Catch::Approx(0.5));
    REQUIRE(R0.coeff(g.fine_index(2, 1), 0) == Catch::Approx(0.5));

    // Tensor-product reference: hat((ix - k*CX)/k) per direction.
    auto hat = [](double t) { return std::max(0.0, 1.0 - std::abs(t)); };
    for (int iy = 1; iy <= 3; ++iy)
        for (int ix = 1; ix <= 3; ++ix)
            REQUIRE(R0.coeff(g.fine_index(ix, iy), 0) ==
                    Catch::Approx(hat((ix - 2.0) / 2.0) * hat((iy - 2.0) / 2.0)).margin(1e-15));
}

TEST_CASE("prolongation row on a true edge midpoint has two half weights", "[fem]") {
    const GridSpec g(8, 4);  // coarse nodes at every second fine node
    const SparseMatrix R0 = coarse_prolongation(g);
    // Fine node (3,2): midpoint between interior coarse nodes (1,1) and (2,1).
    const index_t row = g.fine_index(3, 2);
    REQUIRE(R0.row_offsets[row + 1] - R0.row_offsets[row] == 2);
    REQUIRE(R0.coeff(row, g.coarse_index(1, 1)) == Catch::Approx(0.5));
    REQUIRE(R0.coeff(row, g.coarse_index(2, 1)) == Catch::Approx(0.5));
}

TEST_CASE("prolongation matches the dense tensor reference", "[fem]") {
    const GridSpec g(4, 2);
    const SparseMatrix R0 = coarse_prolongation(g);
    auto hat = [](double t) { return std::max(0.0, 1.0 - std::abs(t)); };
    for (int iy = 1; iy <= g.n1 - 1; ++iy) {
        for (int ix = 1; ix <= g.n1 - 1; ++ix) {
            for (int cy = 1; cy <= g.n0 - 1; ++cy) {
                for (int cx = 1; cx <= g.n0 - 1; ++cx) {
                    const double want = hat(static_cast<double>(ix) / g.k() - cx) *
                                        hat(static_cast<double>(iy) / g.k() - cy);
                    REQUIRE(R0.coeff(g.fine_index(ix, iy), g.coarse_index(cx, cy)) ==
                            Catch::Approx(want).margin(1e-15));
                }
            }
        }
    }
}

TEST_CASE("partition of unity away from the boundary", "[fem]") {
    const GridSpec g(12, 3);
    const SparseMatrix R0 = coarse_prolongation(g);
    for (int iy = g.k(); iy <= g.n1 - g.k(); ++iy) {
        for (int ix = g.k(); ix <= g.n1 - g.k(); ++ix) {
            const index_t row = g.fine_index(ix, iy);
            double sum = 0.0;
            for (index_t k = R0.row_offsets[row]; k < R0.row_offsets[row + 1]; ++k)
                sum += R0.values[static_cast<std::size_t>(k)];
            REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("coarse operator basics", "[fem]") {
    const FemProblem p = assemble_unit_poisson(GridSpec(4, 2));
    // Identity prolongation returns the matrix itself.
    std::vector<Triplet> id;
    for (index_t i = 0; i < p.A.nrows; ++i) id.push_back({i, i, 1.0});
    const SparseMatrix A0 = coarse_operator(p.A, assemble(id, p.A.nrows, p.A.nrows));
    REQUIRE(A0.values == p.A.values);
    REQUIRE(A0.col_indices == p.A.col_indices);

    // Single-column prolongation yields the positive quadratic form.
    Rng rng(33);
    const DenseVector v = testsupport::random_vector(static_cast<std::size_t>(p.A.nrows), rng);
    std::vector<Triplet> col;
    for (index_t i = 0; i < p.A.nrows; ++i) col.push_back({i, 0, v[static_cast<std::size_t>(i)]});
    const SparseMatrix Q = coarse_operator(p.A, assemble(col, p.A.nrows, 1));
    REQUIRE(Q.coeff(0, 0) == Catch::Approx(dot(v, spmv(p.A, v))).epsilon(1e-13));
    REQUIRE(Q.coeff(0, 0) > 0.0);
}

TEST_CASE("coarse operator matches the dense triple product", "[fem]") {
    const GridSpec g(4, 2);
    const FemProblem p = assemble_unit_poisson(g);
    const SparseMatrix R0 = coarse_prolongation(g);
    const SparseMatrix A0 = coarse_operator(p.A, R0);

    const auto Ad = oracle::to_dense(p.A);
    const auto R0d = oracle::to_dense(R0);
    const auto ref = oracle::matmul(oracle::transpose(R0d), oracle::matmul(Ad, R0d));
    for (index_t i = 0; i < A0.nrows; ++i)
        for (index_t j = 0; j < A0.ncols; ++j)
            REQUIRE(A0.coeff(i, j) == Catch::Approx(ref(i, j)).epsilon(1e-13).margin(1e-300));
}

TEST_CASE("Galerkin consistency", "[fem]") {
    const GridSpec g(8, 4);
    const FemProblem p = assemble_unit_poisson(g);
    const SparseMatrix R0 = coarse_prolongation(g);
    const SparseMatrix A0 = coarse_operator(p.A, R0);
    Rng rng(34);
    for (int t = 0; t < 10; ++t) {
        const DenseVector y = testsupport::random_vector(static_cast<std::size_t>(A0.nrows), rng);
        const double coarse_form = dot(y, spmv(A0, y));
        const DenseVector up = spmv(R0, y);
        const double fine_form = dot(up, spmv(p.A, up));
        REQUIRE(coarse_form == Catch::Approx(fine_form).epsilon(1e-13));
    }
}
