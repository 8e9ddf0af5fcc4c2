#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "ssc/sparse.hpp"
#include "support.hpp"

using namespace ssc;
using testsupport::random_spd;
using testsupport::random_vector;

TEST_CASE("assemble sums duplicate entries", "[sparse]") {
    const SparseMatrix A = assemble({{0, 0, 1.0}, {0, 0, 2.0}}, 1, 1);
    REQUIRE(A.nnz() == 1);
    REQUIRE(A.coeff(0, 0) == 3.0);
}

TEST_CASE("assemble of empty triplet list gives empty rows", "[sparse]") {
    const SparseMatrix A = assemble({}, 2, 2);
    REQUIRE(A.nrows == 2);
    REQUIRE(A.nnz() == 0);
    REQUIRE(A.row_offsets == std::vector<index_t>{0, 0, 0});
}

TEST_CASE("assemble rejects out-of-range indices", "[sparse]") {
    REQUIRE_THROWS_AS(assemble({{2, 0, 1.0}}, 2, 2), StructureError);
    REQUIRE_THROWS_AS(assemble({{0, -1, 1.0}}, 2, 2), StructureError);
}

TEST_CASE("assemble from element stencils matches dense reference assembly", "[sparse]") {
    // 3x3 interior grid: accumulate the closed-form Q1 element stiffness over
    // all 16 elements and compare against the dense reference entrywise.
    const GridSpec grid(4, 2);
    const auto ke = testsupport::q1_element_stiffness();
    std::vector<Triplet> ts;
    for (int ey = 0; ey < 4; ++ey) {
        for (int ex = 0; ex < 4; ++ex) {
            index_t ids[4];
            for (int p = 0; p < 4; ++p) {
                const int ix = ex + (p & 1);
                const int iy = ey + ((p >> 1) & 1);
                ids[p] = (ix >= 1 && ix <= 3 && iy >= 1 && iy <= 3) ? grid.fine_index(ix, iy) : -1;
            }
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q)
                    if (ids[p] >= 0 && ids[q] >= 0) ts.push_back({ids[p], ids[q], ke[p][q]});
        }
    }
    const SparseMatrix A = assemble(ts, 9, 9);
    const auto [Aref, bref] = testsupport::dense_fem_reference(
        grid, [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
    for (index_t i = 0; i < 9; ++i)
        for (index_t j = 0; j < 9; ++j)
            REQUIRE(A.coeff(i, j) == Catch::Approx(Aref(i, j)).margin(1e-13));
}

TEST_CASE("spmv basics", "[sparse]") {
    Rng rng(11);
    const SparseMatrix I3 = assemble({{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}}, 3, 3);
    const DenseVector x = random_vector(3, rng);
    REQUIRE(spmv(I3, x) == x);

    const SparseMatrix A = random_spd(5, rng, 0.6);
    REQUIRE(spmv(A, DenseVector(5, 0.0)) == DenseVector(5, 0.0));
    REQUIRE_THROWS_AS(spmv(A, DenseVector(4, 1.0)), DimensionError);
}

TEST_CASE("spmv agrees with dense product", "[sparse]") {
    Rng rng(12);
    const SparseMatrix A = random_spd(5, rng, 0.6);
    const auto Ad = oracle::to_dense(A);
    const DenseVector x = random_vector(5, rng);
    const DenseVector y = spmv(A, x);
    const DenseVector yd = oracle::matvec(Ad, x);
    for (std::size_t i = 0; i < 5; ++i)
        REQUIRE(y[i] == Catch::Approx(yd[i]).epsilon(1e-14).margin(1e-300));
}

TEST_CASE("dot and axpy", "[sparse]") {
    Rng rng(13);
    const DenseVector x = random_vector(100, rng);
    const DenseVector zero(100, 0.0);
    REQUIRE(dot(x, zero) == 0.0);

    const DenseVector y = random_vector(100, rng);
    REQUIRE(axpy(0.0, x, y) == y);
    REQUIRE_THROWS_AS(dot(x, DenseVector(9, 0.0)), DimensionError);
    REQUIRE_THROWS_AS(axpy(1.0, x, DenseVector(9, 0.0)), DimensionError);

    const double reference = testsupport::kahan_dot(x, y);
    REQUIRE(dot(x, y) == Catch::Approx(reference).epsilon(1e-13));
}

TEST_CASE("factor and solve on simple matrices", "[sparse]") {
    Rng rng(14);
    const SparseMatrix I3 = assemble({{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}}, 3, 3);
    const DenseVector b = random_vector(3, rng);
    REQUIRE(solve(factor_spd(I3), b) == b);

    const SparseMatrix D = assemble({{0, 0, 2.0}, {1, 1, 4.0}}, 2, 2);
    const DenseVector x = solve(factor_spd(D), {2.0, 8.0});
    REQUIRE(x[0] == Catch::Approx(1.0));
    REQUIRE(x[1] == Catch::Approx(2.0));
}

TEST_CASE("sparse solve matches dense elimination on a Poisson system", "[sparse]") {
    const GridSpec grid(8, 2);
    const FemProblem p = assemble_unit_poisson(grid);
    REQUIRE(p.A.nrows == 49);
    const DenseVector ones(49, 1.0);
    const DenseVector x = solve(factor_spd(p.A), ones);
    const DenseVector xd = oracle::dense_solve(oracle::to_dense(p.A), ones);
    for (std::size_t i = 0; i < 49; ++i) REQUIRE(x[i] == Catch::Approx(xd[i]).epsilon(1e-9));

    const DenseVector back = spmv(p.A, x);
    REQUIRE(norm2(axpy(-1.0, ones, back)) <= 1e-10 * norm2(ones));
}

TEST_CASE("factorization rejects indefinite matrices", "[sparse]") {
    const SparseMatrix M =
        assemble({{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}}, 2, 2);
    REQUIRE_THROWS_AS(factor_spd(M), DefinitenessError);
    const SparseMatrix D = assemble({{0, 0, 1.0}, {1, 1, -1.0}}, 2, 2);
    REQUIRE_THROWS_AS(factor_spd(D), DefinitenessError);
}

TEST_CASE("random SPD matrices are positive on random vectors", "[sparse]") {
    Rng rng(15);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 10 + static_cast<int>(rng.below(40));
        const SparseMatrix A = random_spd(n, rng, 0.2);
        for (int t = 0; t < 100; ++t) {
            DenseVector v = random_vector(static_cast<std::size_t>(n), rng);
            if (norm2(v) == 0.0) continue;
            REQUIRE(dot(v, spmv(A, v)) > 0.0);
        }
    }
}

TEST_CASE("factor/solve round trip", "[sparse]") {
    Rng rng(16);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 20 + static_cast<int>(rng.below(180));
        const SparseMatrix A = random_spd(n, rng, 0.05);
        const SpdFactor f = factor_spd(A);
        const DenseVector y = random_vector(static_cast<std::size_t>(n), rng);
        const DenseVector back = solve(f, spmv(A, y));
        REQUIRE(norm2(axpy(-1.0, y, back)) <= 1e-9 * norm2(y));
    }
}

TEST_CASE("extract_block basics", "[sparse]") {
    Rng rng(17);
    const SparseMatrix A = random_spd(5, rng, 0.6);
    std::vector<index_t> full = {0, 1, 2, 3, 4};
    const SparseMatrix B = extract_block(A, full, full);
    REQUIRE(B.values == A.values);
    REQUIRE(B.col_indices == A.col_indices);

    // Nodes far apart in a Poisson matrix do not interact.
    const FemProblem p = assemble_unit_poisson(GridSpec(8, 2));
    std::vector<index_t> left = {0, 1};
    std::vector<index_t> right = {47, 48};
    const SparseMatrix Z = extract_block(p.A, left, right);
    REQUIRE(Z.nnz() == 0);

    REQUIRE_THROWS_AS(extract_block(A, std::vector<index_t>{3, 1}, full), StructureError);
    REQUIRE_THROWS_AS(extract_block(A, std::vector<index_t>{0, 9}, full), StructureError);
}

TEST_CASE("extract_block agrees with dense slicing", "[sparse]") {
    Rng rng(18);
    const SparseMatrix A = random_spd(5, rng, 0.7);
    const auto Ad = oracle::to_dense(A);
    const std::vector<index_t> rows = {0, 2, 4};
    const std::vector<index_t> cols = {1, 2, 3};
    const SparseMatrix B = extract_block(A, rows, cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            REQUIRE(B.coeff(static_cast<index_t>(r), static_cast<index_t>(c)) ==
                    Ad(rows[r], cols[c]));
}

TEST_CASE("extract_block composes", "[sparse]") {
    Rng rng(19);
    const SparseMatrix A = random_spd(12, rng, 0.3);
    const std::vector<index_t> outer = {1, 3, 4, 7, 9, 11};
    const std::vector<index_t> inner_rel = {0, 2, 5};  // relative to outer
    std::vector<index_t> composed;
    for (index_t k : inner_rel) composed.push_back(outer[static_cast<std::size_t>(k)]);

    const SparseMatrix two_step =
        extract_block(extract_block(A, outer, outer), inner_rel, inner_rel);
    const SparseMatrix direct = extract_block(A, composed, composed);
    REQUIRE(two_step.values == direct.values);
    REQUIRE(two_step.col_indices == direct.col_indices);
    REQUIRE(two_step.row_offsets == direct.row_offsets);
}

TEST_CASE("symmetry validation", "[sparse]") {
    const FemProblem p = assemble_unit_poisson(GridSpec(8, 2));
    REQUIRE_NOTHROW(validate_symmetric(p.A));
    const SparseMatrix M = assemble({{0, 1, 1.0}}, 2, 2);
    REQUIRE_THROWS_AS(validate_symmetric(M), StructureError);
}

TEST_CASE("matrix market dump", "[sparse]") {
    const SparseMatrix D = assemble({{0, 0, 2.0}, {1, 1, 4.0}}, 2, 2);
    std::ostringstream os;
    write_matrix_market(D, os);
    const std::string text = os.str();
    REQUIRE(text.find("%%MatrixMarket matrix coordinate real general\n") == 0);
    REQUIRE(text.find("2 2 2\n") != std::string::npos);
    REQUIRE(text.find("1 1 2\n") != std::string::npos);
    REQUIRE(text.find("2 2 4\n") != std::string::npos);
}
