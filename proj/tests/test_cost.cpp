#include <catch2/catch_amalgamated.hpp>

#include "ssc/cost.hpp"
#include "ssc/rng.hpp"

using namespace ssc;

namespace {

CostConstants constants(double cs, double cu, double c0, double cc, double M, double n,
                        double lbar = 8, double L = 1) {
    CostConstants c;
    c.solve_per_unknown = cs;
    c.update_per_unknown = cu;
    c.connection_setup = c0;
    c.transmit_per_unit = cc;
    c.subproblem_dim = M;
    c.n = n;
    c.max_neighbors = lbar;
    c.servers = L;
    return c;
}

}  // namespace

TEST_CASE("zero constants give zero budgets", "[cost]") {
    const CostConstants c = constants(0, 0, 0, 0, 0, 1, 0, 1);
    REQUIRE(cycle_time_master_slave(c) == 0.0);
    REQUIRE(cycle_time_local(c) == 0.0);
    REQUIRE(cycle_time_server_client(c) == 0.0);
}

TEST_CASE("hand-evaluated budgets", "[cost]") {
    REQUIRE(cycle_time_master_slave(constants(1, 1, 1, 1, 3, 4)) == 46.0);
    REQUIRE(cycle_time_local(constants(10, 1, 1, 1, 400, 400, 8)) == 12416.0);
    REQUIRE(cycle_time_server_client(constants(10, 1, 1, 1, 400, 400, 8, 20)) == 28900.0);
}

TEST_CASE("solve-dominated asymptote", "[cost]") {
    const double cs = 1e12;
    const CostConstants c = constants(cs, 1, 1, 1, 3, 4);
    REQUIRE(cycle_time_master_slave(c) / (cs * 4.0) == Catch::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("server-client with one server matches the master-slave structure", "[cost]") {
    // Setup terms coincide: 2(n/1)C0c + 2*1*C0c = 2(n+1)C0c.
    const CostConstants setup_only = constants(0, 0, 3, 0, 7, 12, 8, 1);
    REQUIRE(cycle_time_server_client(setup_only) == cycle_time_master_slave(setup_only));
    // Update terms coincide: Cu (M+1) n / 1 = Cu n (M+1).
    const CostConstants update_only = constants(0, 5, 0, 0, 7, 12, 8, 1);
    REQUIRE(cycle_time_server_client(update_only) == cycle_time_master_slave(update_only));
}

TEST_CASE("doubling alternative and comparison", "[cost]") {
    // Large solve constant: doubling is the expensive option.
    const CostConstants heavy = constants(100, 1, 1, 1, 400, 400, 8);
    const auto cmp = compare_local_strategies(heavy);
    REQUIRE(cmp.doubling > cmp.redundant);
    REQUIRE(cmp.redundancy_cheaper);
    REQUIRE(cmp.doubling - cmp.redundant ==
            Catch::Approx(100.0 * 2 * 400 - 100.0 * 400));  // solve term doubles

    // Tiny solve constant: the extra neighbor traffic of redundancy never
    // pays off through the solve term, but both budgets stay close.
    const CostConstants light = constants(0, 1, 1, 1, 400, 400, 8);
    const auto cmp2 = compare_local_strategies(light);
    REQUIRE(cmp2.redundant <= cmp2.doubling + 1e-12);
}

TEST_CASE("budgets are monotone in every constant", "[cost]") {
    Rng rng(61);
    for (int t = 0; t < 100; ++t) {
        CostConstants c = constants(rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10),
                                    rng.uniform(0, 10), rng.uniform(1, 500), rng.uniform(1, 500),
                                    rng.uniform(1, 8), 1 + rng.below(5));
        if (c.servers > c.n) c.servers = 1;
        const double ms = cycle_time_master_slave(c);
        const double lc = cycle_time_local(c);
        const double scv = cycle_time_server_client(c);

        CostConstants bumped = c;
        double* fields[] = {&bumped.solve_per_unknown, &bumped.update_per_unknown,
                            &bumped.connection_setup, &bumped.transmit_per_unit,
                            &bumped.subproblem_dim, &bumped.n, &bumped.max_neighbors};
        for (double* f : fields) {
            const double saved = *f;
            *f = saved + rng.uniform(0.1, 5.0);
            REQUIRE(cycle_time_master_slave(bumped) >= ms - 1e-12);
            REQUIRE(cycle_time_local(bumped) >= lc - 1e-12);
            REQUIRE(cycle_time_server_client(bumped) >= scv - 1e-12);
            *f = saved;
        }
    }
}

TEST_CASE("server-client budget decreases with more servers", "[cost]") {
    Rng rng(62);
    for (int t = 0; t < 20; ++t) {
        CostConstants c = constants(rng.uniform(0.1, 10), rng.uniform(0.1, 10),
                                    rng.uniform(0.1, 10), rng.uniform(0.1, 10),
                                    rng.uniform(50, 500), 400, 8, 1);
        // T(L) = K/L + 2 C0c L + const; decreasing until sqrt(K / (2 C0c)).
        const double K = c.n * (2.0 * (c.connection_setup + c.transmit_per_unit * c.subproblem_dim) +
                                c.update_per_unknown * (c.subproblem_dim + 1.0));
        const int l_star = static_cast<int>(std::sqrt(K / (2.0 * c.connection_setup)));
        double prev = std::numeric_limits<double>::infinity();
        for (int L = 1; L <= std::min(l_star, 400); ++L) {
            c.servers = L;
            const double cur = cycle_time_server_client(c);
            REQUIRE(cur <= prev + 1e-9);
            prev = cur;
        }
    }
}

TEST_CASE("invalid constants are rejected", "[cost]") {
    CostConstants c = constants(1, 1, 1, 1, 3, 4);
    c.servers = 0;
    REQUIRE_THROWS_AS(cycle_time_master_slave(c), ArgumentError);
    c.servers = 10;
    REQUIRE_THROWS_AS(cycle_time_server_client(c), ArgumentError);  // L > n
    c = constants(-1, 1, 1, 1, 3, 4);
    REQUIRE_THROWS_AS(cycle_time_local(c), ArgumentError);
}
