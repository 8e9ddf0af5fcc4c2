#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "ssc/config.hpp"
#include "ssc/cost.hpp"
#include "ssc/error.hpp"
#include "ssc/faults.hpp"
#include "ssc/fem.hpp"
#include "ssc/schwarz.hpp"
#include "ssc/splitting.hpp"

namespace ssc {

inline std::uint64_t subseed(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                             std::uint64_t b = 0) {
    return Rng(seed).derive(tag, a).derive(b).next_u64();
}

/// A built problem instance reusable across runs: the discretized model
/// problem and its splitting.
struct Experiment {
    ExperimentConfig config;
    FemProblem problem;
    Splitting splitting;
};

inline Experiment build_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    Experiment e;
    e.config = cfg;
    const GridSpec grid(cfg.n1, cfg.n0);
    e.problem = assemble_unit_poisson(grid, cfg.zero_rhs);
    WeightSpec w;
    w.subdomain = cfg.weight_subdomain;
    w.coarse = cfg.weight_coarse;
    e.splitting = build_splitting(grid, cfg.layers, e.problem.A, w);
    return e;
}

/// Realizes the configured fault process over `horizon` cycles; null when the
/// configuration is fault-free.
inline std::shared_ptr<const FaultScenario> build_scenario(const ExperimentConfig& cfg,
                                                           const Splitting& s,
                                                           std::uint64_t seed, int horizon) {
    using F = ExperimentConfig::Faults;
    switch (cfg.fault_model) {
        case F::None:
            return nullptr;
        case F::MasterSlaveConstant:
            return std::make_shared<FaultScenario>(
                make_master_slave_constant(s.n, cfg.r_f, horizon, seed));
        case F::MasterSlaveInterval:
            return std::make_shared<FaultScenario>(
                make_master_slave_interval(s.n, cfg.r_f, cfg.delta_f, horizon, seed));
        case F::LocalComm: {
            const RedundancyGroups groups = build_groups(s, cfg.l);
            const WeibullParams up{cfg.k1, cfg.lambda1};
            const WeibullParams repair{cfg.k2, cfg.lambda2};
            return std::make_shared<FaultScenario>(
                make_local_comm(groups, s.n, up, repair, horizon,
                                subseed(seed, stream_tag("schedule"), 0),
                                subseed(seed, stream_tag("draw"), 0), cfg.l1_alternation));
        }
        case F::Trace: {
            std::ifstream f(cfg.trace_path);
            if (!f) throw ConfigError("run: cannot open trace " + cfg.trace_path);
            auto sc = std::make_shared<FaultScenario>(read_scenario(f));
            if (sc->n != s.n) throw ConfigError("run: trace subdomain count mismatch");
            return sc;
        }
    }
    return nullptr;
}

struct RunOutcome {
    RunReport report;
    std::shared_ptr<const FaultScenario> scenario;  // null for fault-free runs
};

inline RunOutcome run_experiment(const Experiment& e, std::uint64_t seed) {
    const ExperimentConfig& cfg = e.config;
    RunOutcome out;
    out.scenario = build_scenario(cfg, e.splitting, seed, cfg.max_steps);
    const CycleSource cycles = out.scenario ? scenario_source(out.scenario)
                                            : full_set_source(e.splitting.n);
    Relaxation relax = cfg.relaxation == Relaxation::Kind::SteepestDescent
                           ? Relaxation::steepest()
                           : Relaxation::fixed(cfg.xi);
    AccelSettings accel{cfg.lambda_upper, cfg.lambda_lower, cfg.p_lower};
    Termination term{cfg.eps0, cfg.max_steps};
    const IndicatorTerms indicator =
        cfg.refresh_indicator ? IndicatorTerms::Refreshed : IndicatorTerms::Stale;
    out.report = run_solver(e.problem, e.splitting, cycles, cfg.method, relax, accel, term,
                            indicator);
    out.report.seed = seed;
    out.report.config_hash = cfg.hash();
    out.report.config_echo = cfg.canonical();
    return out;
}

// ---------------------------------------------------------------------------
// Iteration-count tables

struct TableCell {
    int iterations = 0;
    bool converged = false;
    double mean = 0.0;
    double sd = 0.0;
};

namespace detail {

inline void finish_cell(TableCell& cell, const std::vector<int>& counts) {
    double sum = 0.0;
    for (int c : counts) sum += c;
    cell.mean = sum / static_cast<double>(counts.size());
    double ss = 0.0;
    for (int c : counts) ss += (c - cell.mean) * (c - cell.mean);
    cell.sd = counts.size() > 1 ? std::sqrt(ss / static_cast<double>(counts.size() - 1)) : 0.0;
}

}  // namespace detail

/// Iteration counts for three method variants across constant failure rates
/// on the master-slave model.
struct Table1Result {
    std::vector<double> rates;
    std::vector<std::string> methods;
    std::vector<std::vector<TableCell>> cells;  // [method][rate]
    int repeats = 1;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

inline Table1Result run_table1(const FemProblem& problem, const Splitting& s,
                               std::uint64_t seed, int repeats = 1, double eps0 = 1e-6,
                               int max_steps = 200) {
    if (repeats < 1) throw ArgumentError("run_table1: repeats must be >= 1");
    Table1Result t;
    t.rates = {0.0, 0.04, 0.08, 0.12, 0.16, 0.2};
    t.methods = {"one-step steepest", "one-step fixed xi=0.4",
                 "accelerated xi=0.3 eta=0.577"};
    t.repeats = repeats;
    t.seed = seed;
    t.cells.assign(t.methods.size(), std::vector<TableCell>(t.rates.size()));

    const Termination term{eps0, max_steps};
    const AccelSettings accel{3.33, 0.9, 0};
    for (std::size_t mi = 0; mi < t.methods.size(); ++mi) {
        for (std::size_t ri = 0; ri < t.rates.size(); ++ri) {
            std::vector<int> counts;
            for (int rep = 0; rep < repeats; ++rep) {
                const std::uint64_t sc_seed =
                    subseed(seed, stream_tag("table1"), mi * 100 + ri, static_cast<std::uint64_t>(rep));
                auto sc = std::make_shared<FaultScenario>(
                    make_master_slave_constant(s.n, t.rates[ri], max_steps, sc_seed));
                const CycleSource cycles = scenario_source(sc);
                RunReport rep_out;
                if (mi == 0)
                    rep_out = run_solver(problem, s, cycles, Method::OneStep,
                                         Relaxation::steepest(), accel, term);
                else if (mi == 1)
                    rep_out = run_solver(problem, s, cycles, Method::OneStep,
                                         Relaxation::fixed(0.4), accel, term);
                else
                    rep_out = run_solver(problem, s, cycles, Method::Accelerated,
                                         Relaxation::steepest(), accel, term);
                counts.push_back(rep_out.iterations);
                if (rep == 0) {
                    t.cells[mi][ri].iterations = rep_out.iterations;
                    t.cells[mi][ri].converged = rep_out.converged;
                }
            }
            detail::finish_cell(t.cells[mi][ri], counts);
        }
    }
    return t;
}

/// Iteration counts for the local-communication model across redundancy
/// levels l = 1..8 under four Weibull fault scenarios, plus the fault-free
/// baseline. Node schedules are shared across l within a scenario.
struct Table2Result {
    TableCell baseline;
    std::vector<std::array<double, 2>> scenarios;  // (lambda1, lambda2)
    std::vector<double> realized_rates;            // first-repeat realized rate
    std::vector<std::vector<TableCell>> cells;     // [scenario][l-1]
    int repeats = 1;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

inline Table2Result run_table2(const FemProblem& problem, const Splitting& s,
                               std::uint64_t seed, int repeats = 1, double eps0 = 1e-8,
                               int max_steps = 100) {
    if (repeats < 1) throw ArgumentError("run_table2: repeats must be >= 1");
    Table2Result t;
    t.scenarios = {{{18.0, 3.0}}, {{38.0, 7.0}}, {{70.0, 1.0}}, {{600.0, 20.0}}};
    t.repeats = repeats;
    t.seed = seed;
    t.realized_rates.assign(t.scenarios.size(), 0.0);
    t.cells.assign(t.scenarios.size(), std::vector<TableCell>(8));

    const Termination term{eps0, max_steps};
    const AccelSettings accel{};
    {
        std::vector<int> counts;
        for (int rep = 0; rep < repeats; ++rep) {
            const RunReport r = run_solver(problem, s, full_set_source(s.n), Method::OneStep,
                                           Relaxation::steepest(), accel, term);
            counts.push_back(r.iterations);
            if (rep == 0) {
                t.baseline.iterations = r.iterations;
                t.baseline.converged = r.converged;
            }
        }
        detail::finish_cell(t.baseline, counts);
    }

    std::vector<RedundancyGroups> groups;
    groups.reserve(8);
    for (int l = 1; l <= 8; ++l) groups.push_back(build_groups(s, l));

    for (std::size_t si = 0; si < t.scenarios.size(); ++si) {
        const WeibullParams up{0.5, t.scenarios[si][0]};
        const WeibullParams repair{1.0, t.scenarios[si][1]};
        for (int l = 1; l <= 8; ++l) {
            std::vector<int> counts;
            for (int rep = 0; rep < repeats; ++rep) {
                const std::uint64_t sched_seed =
                    subseed(seed, stream_tag("table2-sched"), si, static_cast<std::uint64_t>(rep));
                const std::uint64_t draw_seed =
                    subseed(seed, stream_tag("table2-draw"), si * 100 + static_cast<std::size_t>(l),
                            static_cast<std::uint64_t>(rep));
                auto sc = std::make_shared<FaultScenario>(
                    make_local_comm(groups[static_cast<std::size_t>(l - 1)], s.n, up, repair,
                                    max_steps, sched_seed, draw_seed));
                if (rep == 0 && l == 1) t.realized_rates[si] = sc->realized_rate;
                const RunReport r = run_solver(problem, s, scenario_source(sc), Method::OneStep,
                                               Relaxation::steepest(), accel, term);
                counts.push_back(r.iterations);
                if (rep == 0) {
                    t.cells[si][static_cast<std::size_t>(l - 1)].iterations = r.iterations;
                    t.cells[si][static_cast<std::size_t>(l - 1)].converged = r.converged;
                }
            }
            detail::finish_cell(t.cells[si][static_cast<std::size_t>(l - 1)], counts);
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// CSV and text rendering

inline void write_provenance(std::ostream& os, std::uint64_t config_hash, std::uint64_t seed,
                             int repeats) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# config_hash=%016llx seed=%llu repeats=%d\n",
                  static_cast<unsigned long long>(config_hash),
                  static_cast<unsigned long long>(seed), repeats);
    os << buf;
}

inline void write_csv(const Table1Result& t, std::ostream& os) {
    write_provenance(os, t.config_hash, t.seed, t.repeats);
    os << "method,r_f,iterations,converged,mean,sd\n";
    char buf[256];
    for (std::size_t mi = 0; mi < t.methods.size(); ++mi) {
        for (std::size_t ri = 0; ri < t.rates.size(); ++ri) {
            const TableCell& c = t.cells[mi][ri];
            std::snprintf(buf, sizeof(buf), "%s,%.17g,%d,%d,%.17g,%.17g\n",
                          t.methods[mi].c_str(), t.rates[ri], c.iterations, c.converged ? 1 : 0,
                          c.mean, c.sd);
            os << buf;
        }
    }
}

inline void write_csv(const Table2Result& t, std::ostream& os) {
    write_provenance(os, t.config_hash, t.seed, t.repeats);
    os << "scenario,lambda1,lambda2,l,iterations,converged,mean,sd\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "baseline,0,0,0,%d,%d,%.17g,%.17g\n", t.baseline.iterations,
                  t.baseline.converged ? 1 : 0, t.baseline.mean, t.baseline.sd);
    os << buf;
    for (std::size_t si = 0; si < t.scenarios.size(); ++si) {
        for (int l = 1; l <= 8; ++l) {
            const TableCell& c = t.cells[si][static_cast<std::size_t>(l - 1)];
            std::snprintf(buf, sizeof(buf), "weibull,%.17g,%.17g,%d,%d,%d,%.17g,%.17g\n",
                          t.scenarios[si][0], t.scenarios[si][1], l, c.iterations,
                          c.converged ? 1 : 0, c.mean, c.sd);
            os << buf;
        }
    }
}

inline std::string cell_text(const TableCell& c, int max_steps) {
    char buf[32];
    if (!c.converged)
        std::snprintf(buf, sizeof(buf), ">%d", max_steps);
    else
        std::snprintf(buf, sizeof(buf), "%d", c.iterations);
    return buf;
}

inline std::string to_text(const Table1Result& t, int max_steps = 200) {
    std::string out = "iterations to termination, master-slave constant failure rates\n";
    char buf[256];
    std::string header = "method";
    header.resize(30, ' ');
    for (double r : t.rates) {
        std::snprintf(buf, sizeof(buf), " r_f=%-5.2f", r);
        header += buf;
    }
    out += header + "\n";
    for (std::size_t mi = 0; mi < t.methods.size(); ++mi) {
        std::string row = t.methods[mi];
        row.resize(30, ' ');
        for (std::size_t ri = 0; ri < t.rates.size(); ++ri) {
            std::snprintf(buf, sizeof(buf), " %9s",
                          cell_text(t.cells[mi][ri], max_steps).c_str());
            row += buf;
        }
        out += row + "\n";
    }
    return out;
}

inline std::string to_text(const Table2Result& t, int max_steps = 100) {
    std::string out = "iterations to termination, local-communication Weibull faults\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "no-fault baseline: %s\n",
                  cell_text(t.baseline, max_steps).c_str());
    out += buf;
    std::string header = "lambda1 lambda2";
    header.resize(18, ' ');
    for (int l = 1; l <= 8; ++l) {
        std::snprintf(buf, sizeof(buf), "  l=%d ", l);
        header += buf;
    }
    out += header + "\n";
    for (std::size_t si = 0; si < t.scenarios.size(); ++si) {
        std::snprintf(buf, sizeof(buf), "%7g %7g  ", t.scenarios[si][0], t.scenarios[si][1]);
        std::string row = buf;
        for (int l = 1; l <= 8; ++l) {
            std::snprintf(buf, sizeof(buf), "%5s ",
                          cell_text(t.cells[si][static_cast<std::size_t>(l - 1)], max_steps).c_str());
            row += buf;
        }
        out += row + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum and cost drivers

struct SpectrumResult {
    SpectralBounds bounds;
    std::string text;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

inline SpectrumResult run_spectrum(const Experiment& e, std::uint64_t seed) {
    SpectrumResult out;
    out.bounds = estimate_spectral_bounds(e.splitting, e.problem.A,
                                          e.config.lanczos_iterations, seed);
    out.text = summary(e.splitting, &out.bounds);
    out.seed = seed;
    out.config_hash = e.config.hash();
    return out;
}

inline CostConstants load_cost_constants(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cost: cannot open " + path);
    CostConstants c;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("cost: expected key = value at line " + std::to_string(lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const double val = detail::parse_double(detail::trim(line.substr(eq + 1)), key);
        if (key == "solve_per_unknown") c.solve_per_unknown = val;
        else if (key == "update_per_unknown") c.update_per_unknown = val;
        else if (key == "connection_setup") c.connection_setup = val;
        else if (key == "transmit_per_unit") c.transmit_per_unit = val;
        else if (key == "subproblem_dim") c.subproblem_dim = val;
        else if (key == "n") c.n = val;
        else if (key == "max_neighbors") c.max_neighbors = val;
        else if (key == "servers") c.servers = val;
        else throw ConfigError("cost: unknown key " + key);
    }
    c.validate();
    return c;
}

inline void write_cost_csv(const CostConstants& c, std::ostream& os) {
    char buf[128];
    os << "architecture,cycle_time\n";
    std::snprintf(buf, sizeof(buf), "master-slave,%.17g\n", cycle_time_master_slave(c));
    os << buf;
    std::snprintf(buf, sizeof(buf), "local-communication,%.17g\n", cycle_time_local(c));
    os << buf;
    std::snprintf(buf, sizeof(buf), "local-doubling,%.17g\n", cycle_time_local_doubling(c));
    os << buf;
    std::snprintf(buf, sizeof(buf), "server-client,%.17g\n", cycle_time_server_client(c));
    os << buf;
}

inline std::string cost_table_text(const CostConstants& c) {
    char buf[512];
    const auto cmp = compare_local_strategies(c);
    std::snprintf(buf, sizeof(buf),
                  "per-cycle time budgets\n"
                  "  master-slave         %.6g\n"
                  "  local-communication  %.6g\n"
                  "  local-doubling       %.6g\n"
                  "  server-client (L=%g) %.6g\n"
                  "cheaper local strategy: %s\n",
                  cycle_time_master_slave(c), cmp.redundant, cmp.doubling, c.servers,
                  cycle_time_server_client(c),
                  cmp.redundancy_cheaper ? "redundant storage" : "subproblem doubling");
    return buf;
}

}  // namespace ssc
