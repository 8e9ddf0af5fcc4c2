#pragma once

#include <algorithm>
#include <cmath>

#include "ssc/error.hpp"

namespace ssc {

/// Constants of the per-cycle runtime model. All times are abstract units;
/// send and receive phases share one constant per role.
struct CostConstants {
    double solve_per_unknown = 0.0;   // C_s
    double update_per_unknown = 0.0;  // C_u
    double connection_setup = 0.0;    // C_0c
    double transmit_per_unit = 0.0;   // C_c
    double subproblem_dim = 0.0;      // M (coarse dimension ~ n)
    double n = 0.0;                   // subdomain count
    double max_neighbors = 0.0;       // l-bar
    double servers = 1.0;             // L, server-client model only

    void validate() const {
        if (solve_per_unknown < 0 || update_per_unknown < 0 || connection_setup < 0 ||
            transmit_per_unit < 0 || subproblem_dim < 0 || n < 0 || max_neighbors < 0)
            throw ArgumentError("CostConstants: constants must be nonnegative");
        if (servers < 1) throw ArgumentError("CostConstants: servers must be >= 1");
    }
};

/// Master-slave budget: one-to-all and all-to-one communication of all
/// subproblem data, parallel solve, serial update at the master.
inline double cycle_time_master_slave(const CostConstants& c) {
    c.validate();
    return 2.0 * (c.n + 1.0) * c.connection_setup +
           c.transmit_per_unit * c.n * (c.subproblem_dim + 1.0) +
           c.solve_per_unknown * std::max(c.subproblem_dim, c.n) +
           c.update_per_unknown * c.n * (c.subproblem_dim + 1.0);
}

/// Local-communication budget: neighbor sweeps for bulk data, small arrays to
/// and from the coarse server, parallel solve, local update.
inline double cycle_time_local(const CostConstants& c) {
    c.validate();
    return 2.0 * c.max_neighbors * (c.connection_setup + c.transmit_per_unit * c.subproblem_dim) +
           2.0 * c.n * (c.connection_setup + c.transmit_per_unit) +
           c.solve_per_unknown * std::max(c.subproblem_dim, c.n) +
           c.update_per_unknown * c.subproblem_dim;
}

/// Alternative without redundancy: a designated neighbor solves the failed
/// node's subproblem in addition to its own, doubling the solve term.
inline double cycle_time_local_doubling(const CostConstants& c) {
    c.validate();
    return 2.0 * c.max_neighbors * (c.connection_setup + c.transmit_per_unit * c.subproblem_dim) +
           2.0 * c.n * (c.connection_setup + c.transmit_per_unit) +
           2.0 * c.solve_per_unknown * c.subproblem_dim +
           c.update_per_unknown * c.subproblem_dim;
}

/// Server-client budget: L reliable servers each feeding ~n/L clients, with
/// coarse data exchanged across the server network.
inline double cycle_time_server_client(const CostConstants& c) {
    c.validate();
    if (c.servers > c.n) throw ArgumentError("cycle_time_server_client: more servers than subdomains");
    const double L = c.servers;
    return 2.0 * (c.n / L) * (c.connection_setup + c.transmit_per_unit * c.subproblem_dim) +
           2.0 * L * (c.connection_setup + c.transmit_per_unit * c.n / L) +
           c.solve_per_unknown * std::max(c.subproblem_dim, c.n) +
           c.update_per_unknown * (c.subproblem_dim + 1.0) * c.n / L;
}

struct LocalStrategyComparison {
    double redundant = 0.0;
    double doubling = 0.0;
    bool redundancy_cheaper = false;
};

/// Reports which local fault-handling strategy has the smaller budget.
inline LocalStrategyComparison compare_local_strategies(const CostConstants& c) {
    LocalStrategyComparison cmp;
    cmp.redundant = cycle_time_local(c);
    cmp.doubling = cycle_time_local_doubling(c);
    cmp.redundancy_cheaper = cmp.redundant <= cmp.doubling;
    return cmp;
}

}  // namespace ssc
