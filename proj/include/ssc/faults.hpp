#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/rng.hpp"
#include "ssc/schwarz.hpp"
#include "ssc/splitting.hpp"

namespace ssc {

// ---------------------------------------------------------------------------
// Weibull fault processes

struct WeibullParams {
    double shape = 1.0;  // k
    double scale = 1.0;  // lambda, in cycles

    double mean() const { return scale * std::tgamma(1.0 + 1.0 / shape); }
};

/// Inverse-CDF sample t = scale * (-ln U)^(1/shape) with U uniform on (0,1].
inline double sample_weibull(const WeibullParams& p, Rng& rng) {
    if (!(p.shape > 0.0) || !(p.scale > 0.0))
        throw ArgumentError("sample_weibull: parameters must be positive");
    const double u = rng.uniform01_open_low();
    return p.scale * std::pow(-std::log(u), 1.0 / p.shape);
}

/// Alternating up/down renewal schedule of one node, discretized to whole
/// cycles. Down intervals are half-open [start, end) in experiment time and
/// may begin before cycle 0 (the process is initialized from a discarded
/// warm-up prefix, so the state at cycle 0 is approximately stationary).
struct NodeSchedule {
    int node = 0;
    std::vector<std::pair<int, int>> down_intervals;

    bool down_at(int m) const {
        for (const auto& [a, b] : down_intervals) {
            if (m < a) return false;
            if (m < b) return true;
        }
        return false;
    }
    /// Cycles elapsed since the containing failure began; -1 when up.
    int streak_offset(int m) const {
        for (const auto& [a, b] : down_intervals)
            if (m >= a && m < b) return m - a;
        return -1;
    }
};

/// Independent per-node alternating renewal processes with Weibull up and
/// down durations rounded up to whole cycles (minimum one). Returns the
/// schedules and the realized average per-cycle failure rate over the
/// horizon.
inline std::pair<std::vector<NodeSchedule>, double> generate_schedules(
    int n, const WeibullParams& up, const WeibullParams& down, int horizon,
    std::uint64_t seed) {
    if (horizon < 1) throw ArgumentError("generate_schedules: horizon must be >= 1");
    const double warm_span = 10.0 * (up.mean() + down.mean());
    const int warm = static_cast<int>(std::ceil(warm_span));

    std::vector<NodeSchedule> schedules;
    schedules.reserve(static_cast<std::size_t>(n));
    long long down_cycles = 0;
    for (int node = 1; node <= n; ++node) {
        Rng rng = Rng(seed).derive(stream_tag("weibull"), static_cast<std::uint64_t>(node));
        NodeSchedule sched;
        sched.node = node;
        long long t = 0;
        bool failed = false;
        while (t < static_cast<long long>(warm) + horizon) {
            const double draw = sample_weibull(failed ? down : up, rng);
            const long long dur = std::max<long long>(1, static_cast<long long>(std::ceil(draw)));
            if (failed) {
                const long long a = t - warm;
                const long long b = t + dur - warm;
                if (b > 0 && a < horizon)
                    sched.down_intervals.emplace_back(static_cast<int>(a), static_cast<int>(b));
            }
            t += dur;
            failed = !failed;
        }
        for (const auto& [a, b] : sched.down_intervals)
            down_cycles += std::min(b, horizon) - std::max(a, 0);
        schedules.push_back(std::move(sched));
    }
    const double rate =
        static_cast<double>(down_cycles) / (static_cast<double>(n) * horizon);
    return {std::move(schedules), rate};
}

// ---------------------------------------------------------------------------
// Redundancy groups

/// Neighbor set J of a node holding copies of its data; one member per cycle
/// substitutes for the failed owner (or the owner's solve is skipped).
struct RedundancyGroup {
    int owner = 0;
    std::vector<int> members;  // selection order: nearest first, then by index
    int partner = 0;           // lowest-index member, 0 when none
};

struct RedundancyGroups {
    int l = 0;  // requested redundancy
    std::vector<RedundancyGroup> groups;  // owner i at index i-1
    std::vector<int> clamped;             // owners with fewer than l neighbors
};

/// Deterministic group selection: the l nearest neighbors in the subdomain
/// grid (ties by ascending index); nodes with fewer neighbors are clamped and
/// recorded.
inline RedundancyGroups build_groups(const Splitting& s, int l) {
    if (l < 1) throw ArgumentError("build_groups: l must be >= 1");
    RedundancyGroups out;
    out.l = l;
    out.groups.resize(static_cast<std::size_t>(s.n));
    for (int i = 1; i <= s.n; ++i) {
        RedundancyGroup& g = out.groups[static_cast<std::size_t>(i - 1)];
        g.owner = i;
        std::vector<int> cand = s.neighbors_of(i);
        const auto& me = s.sub(i);
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            const auto& sa = s.sub(a);
            const auto& sb = s.sub(b);
            const int da = (sa.cx - me.cx) * (sa.cx - me.cx) + (sa.cy - me.cy) * (sa.cy - me.cy);
            const int db = (sb.cx - me.cx) * (sb.cx - me.cx) + (sb.cy - me.cy) * (sb.cy - me.cy);
            return da != db ? da < db : a < b;
        });
        const int take = std::min<int>(l, static_cast<int>(cand.size()));
        g.members.assign(cand.begin(), cand.begin() + take);
        if (take < l) out.clamped.push_back(i);
        g.partner = g.members.empty() ? 0 : *std::min_element(g.members.begin(), g.members.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-cycle executed sets

/// Master-slave model: random one-to-one assignment makes the surviving set a
/// uniform subset of {0..n} of size n+1-f_m. The coarse index 0 is assigned
/// to a slave like any other and may fail.
inline std::vector<int> master_slave_cycle(int n, int f_m, Rng& rng) {
    if (f_m < 0 || f_m > n + 1) throw ArgumentError("master_slave_cycle: f_m out of range");
    const int p = n + 1 - f_m;
    std::vector<int> pool(static_cast<std::size_t>(n) + 1);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < p; ++i) {
        const auto j = static_cast<std::size_t>(i) +
                       static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n + 1 - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + p);
    std::sort(out.begin(), out.end());
    return out;
}

struct LocalCycleResult {
    std::vector<int> executed;  // sorted subproblem indices, always contains 0
    std::vector<std::pair<int, int>> reassignments;  // (failed owner, substitute)
    int skipped_by_draw = 0;    // draw landed on the owner itself
    int lost_requests = 0;      // chosen substitute down or already claimed
    int unreachable = 0;        // whole group down
};

/// Local-communication model: every up node solves its own subproblem unless
/// it substitutes for a failed neighbor. For each down node (ascending), one
/// index is drawn uniformly from {owner} + J; landing on the owner skips its
/// solve, otherwise the drawn neighbor switches to the owner's subproblem.
/// A node honors only the first switch request per cycle. The coarse
/// subproblem runs on the reliable server and always executes.
///
/// With alternation enabled and |J| = 1, the single partner alternates
/// between its own subproblem (first down cycle) and the owner's, driven by
/// the failure streak offset instead of a random draw.
inline LocalCycleResult local_comm_cycle(const std::vector<char>& down,
                                         const RedundancyGroups& groups, Rng& rng,
                                         const std::vector<int>* streak_offset = nullptr,
                                         bool l1_alternation = false) {
    const int n = static_cast<int>(groups.groups.size());
    if (static_cast<int>(down.size()) != n + 1)
        throw DimensionError("local_comm_cycle: down flags must have size n+1");
    LocalCycleResult res;
    // assignment[j] = subproblem executed by up node j
    std::vector<int> assignment(static_cast<std::size_t>(n) + 1, -1);
    for (int j = 1; j <= n; ++j)
        if (!down[static_cast<std::size_t>(j)]) assignment[static_cast<std::size_t>(j)] = j;

    for (int i = 1; i <= n; ++i) {
        if (!down[static_cast<std::size_t>(i)]) continue;
        const auto& g = groups.groups[static_cast<std::size_t>(i - 1)];
        const int li = static_cast<int>(g.members.size());
        if (li == 0) {
            ++res.unreachable;
            continue;
        }
        bool all_down = true;
        for (int j : g.members)
            if (!down[static_cast<std::size_t>(j)]) all_down = false;
        if (all_down) ++res.unreachable;

        int s_draw;
        if (l1_alternation && li == 1 && streak_offset) {
            s_draw = (*streak_offset)[static_cast<std::size_t>(i)] % 2 == 0 ? 0 : 1;
        } else {
            s_draw = static_cast<int>(rng.below(static_cast<std::uint64_t>(li) + 1));
        }
        if (s_draw == 0) {
            ++res.skipped_by_draw;
            continue;
        }
        const int j = g.members[static_cast<std::size_t>(s_draw - 1)];
        if (down[static_cast<std::size_t>(j)] || assignment[static_cast<std::size_t>(j)] != j) {
            ++res.lost_requests;
            continue;
        }
        assignment[static_cast<std::size_t>(j)] = i;
        res.reassignments.emplace_back(i, j);
    }

    res.executed.push_back(0);
    for (int j = 1; j <= n; ++j)
        if (assignment[static_cast<std::size_t>(j)] >= 0)
            res.executed.push_back(assignment[static_cast<std::size_t>(j)]);
    std::sort(res.executed.begin(), res.executed.end());
    return res;
}

// ---------------------------------------------------------------------------
// Reduction bounds for partitioned sampling

/// Partition of {0..n} with per-part executed counts and the induced
/// min/max execution rates.
struct PartitionRates {
    std::vector<std::vector<int>> parts;
    std::vector<int> executed_counts;

    PartitionRates(std::vector<std::vector<int>> parts_, std::vector<int> counts_, int n)
        : parts(std::move(parts_)), executed_counts(std::move(counts_)) {
        if (parts.size() != executed_counts.size())
            throw DimensionError("PartitionRates: parts/counts size mismatch");
        std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
        for (std::size_t s = 0; s < parts.size(); ++s) {
            if (parts[s].empty()) throw StructureError("PartitionRates: empty part");
            for (int i : parts[s]) {
                if (i < 0 || i > n) throw StructureError("PartitionRates: index out of range");
                if (seen[static_cast<std::size_t>(i)])
                    throw StructureError("PartitionRates: parts not disjoint");
                seen[static_cast<std::size_t>(i)] = 1;
            }
            if (executed_counts[s] < 0 ||
                executed_counts[s] > static_cast<int>(parts[s].size()))
                throw StructureError("PartitionRates: executed count out of range");
        }
        for (char c : seen)
            if (!c) throw StructureError("PartitionRates: parts do not cover {0..n}");
    }

    double rate_min() const {
        double r = 1.0;
        for (std::size_t s = 0; s < parts.size(); ++s)
            r = std::min(r, static_cast<double>(executed_counts[s]) /
                                static_cast<double>(parts[s].size()));
        return r;
    }
    double rate_max() const {
        double r = 0.0;
        for (std::size_t s = 0; s < parts.size(); ++s)
            r = std::max(r, static_cast<double>(executed_counts[s]) /
                                static_cast<double>(parts[s].size()));
        return r;
    }
};

struct PartitionBound {
    double xi_opt = 0.0;
    double factor = 0.0;
};

/// Guaranteed expected squared-error reduction for partition-wise uniform
/// sampling: with xi = r_min/(r_max*lambda_max) the factor is
/// 1 - r_min^2/(r_max*kappa).
inline PartitionBound corollary_bound(const PartitionRates& rates, double lambda_max,
                                      double kappa) {
    if (!(lambda_max > 0.0) || !(kappa > 0.0))
        throw ArgumentError("corollary_bound: spectral data must be positive");
    PartitionBound out;
    const double rlo = rates.rate_min();
    const double rhi = rates.rate_max();
    if (!(rhi > 0.0)) throw ArgumentError("corollary_bound: no part executes anything");
    out.xi_opt = rlo / (rhi * lambda_max);
    out.factor = 1.0 - rlo * rlo / (rhi * kappa);
    return out;
}

/// Min/max execution rates for the steady multi-fault partition: the coarse
/// server, S-2 fully formed redundancy groups of size l+1 executing l solves
/// each, and the remainder with f_new fresh faults.
inline std::pair<double, double> multi_fault_rates(int n, int l, int S, int f_new) {
    if (S < 2 || l < 1) throw ArgumentError("multi_fault_rates: need S >= 2, l >= 1");
    const int occupied = (S - 2) * (l + 1);
    if (occupied > n) throw ArgumentError("multi_fault_rates: infeasible geometry");
    const int rest = n - occupied;
    if (f_new < 0 || f_new > rest)
        throw ArgumentError("multi_fault_rates: f_new out of range");
    double rlo = 1.0;  // coarse part executes with rate 1
    if (S > 2) rlo = std::min(rlo, static_cast<double>(l) / (l + 1));
    if (rest > 0)
        rlo = std::min(rlo, static_cast<double>(rest - f_new) / static_cast<double>(rest));
    return {rlo, 1.0};
}

// ---------------------------------------------------------------------------
// Fault scenarios

enum class FaultModel { MasterSlaveConstant, MasterSlaveInterval, LocalComm };

inline const char* to_string(FaultModel m) {
    switch (m) {
        case FaultModel::MasterSlaveConstant: return "master-slave-constant";
        case FaultModel::MasterSlaveInterval: return "master-slave-interval";
        case FaultModel::LocalComm: return "local-comm";
    }
    return "?";
}

/// A fully realized fault process: per-cycle down-node lists and executed
/// index sets, plus the generating parameters. Replaying a serialized
/// scenario reproduces the executed sets exactly.
struct FaultScenario {
    FaultModel model = FaultModel::MasterSlaveConstant;
    int n = 0;
    int horizon = 0;
    std::uint64_t seed = 0;
    std::uint64_t schedule_seed = 0;
    double r_f = 0.0;
    int delta_f = 0;
    WeibullParams up{}, repair{};
    int l = 0;
    bool l1_alternation = false;

    std::vector<std::vector<int>> down_nodes;
    std::vector<std::vector<int>> executed;
    double realized_rate = 0.0;
    int clamped_groups = 0;
    int unreachable_events = 0;

    double target_rate() const { return r_f; }
};

/// Constant failure rate r_f: every cycle executes a uniform random subset of
/// size floor((1-r_f)(n+1)).
inline FaultScenario make_master_slave_constant(int n, double r_f, int horizon,
                                                std::uint64_t seed) {
    if (r_f < 0.0 || r_f > 1.0) throw ArgumentError("master-slave scenario: r_f outside [0,1]");
    FaultScenario sc;
    sc.model = FaultModel::MasterSlaveConstant;
    sc.n = n;
    sc.horizon = horizon;
    sc.seed = seed;
    sc.r_f = r_f;
    const int p_star = static_cast<int>(std::floor((1.0 - r_f) * (n + 1)));
    const int f_star = n + 1 - p_star;
    long long fsum = 0;
    for (int m = 0; m < horizon; ++m) {
        Rng rng = Rng(seed).derive(stream_tag("msfault"), static_cast<std::uint64_t>(m));
        auto I = master_slave_cycle(n, f_star, rng);
        std::vector<int> dn;
        dn.reserve(static_cast<std::size_t>(f_star));
        std::size_t pos = 0;
        for (int i = 0; i <= n; ++i) {
            if (pos < I.size() && I[pos] == i)
                ++pos;
            else
                dn.push_back(i);
        }
        fsum += f_star;
        sc.executed.push_back(std::move(I));
        sc.down_nodes.push_back(std::move(dn));
    }
    sc.realized_rate = horizon > 0 ? static_cast<double>(fsum) / (static_cast<double>(horizon) * (n + 1)) : 0.0;
    return sc;
}

/// Per-cycle fault counts uniform on [f*-delta_f, f*+delta_f], the same rate
/// r_f in expectation.
inline FaultScenario make_master_slave_interval(int n, double r_f, int delta_f, int horizon,
                                                std::uint64_t seed) {
    if (r_f < 0.0 || r_f > 1.0) throw ArgumentError("master-slave scenario: r_f outside [0,1]");
    if (delta_f < 0) throw ArgumentError("master-slave scenario: delta_f must be >= 0");
    FaultScenario sc;
    sc.model = FaultModel::MasterSlaveInterval;
    sc.n = n;
    sc.horizon = horizon;
    sc.seed = seed;
    sc.r_f = r_f;
    sc.delta_f = delta_f;
    const int f_star = n + 1 - static_cast<int>(std::floor((1.0 - r_f) * (n + 1)));
    long long fsum = 0;
    for (int m = 0; m < horizon; ++m) {
        Rng rng = Rng(seed).derive(stream_tag("msfault"), static_cast<std::uint64_t>(m));
        const int lo = std::max(0, f_star - delta_f);
        const int hi = std::min(n + 1, f_star + delta_f);
        const int f_m = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
        auto I = master_slave_cycle(n, f_m, rng);
        std::vector<int> dn;
        std::size_t pos = 0;
        for (int i = 0; i <= n; ++i) {
            if (pos < I.size() && I[pos] == i)
                ++pos;
            else
                dn.push_back(i);
        }
        fsum += f_m;
        sc.executed.push_back(std::move(I));
        sc.down_nodes.push_back(std::move(dn));
    }
    sc.realized_rate = horizon > 0 ? static_cast<double>(fsum) / (static_cast<double>(horizon) * (n + 1)) : 0.0;
    return sc;
}

/// Weibull-driven local-communication scenario over prebuilt redundancy
/// groups. Schedules derive from schedule_seed (shared across redundancy
/// levels for comparability), substitution draws from seed.
inline FaultScenario make_local_comm(const RedundancyGroups& groups, int n,
                                     const WeibullParams& up, const WeibullParams& repair,
                                     int horizon, std::uint64_t schedule_seed,
                                     std::uint64_t seed, bool l1_alternation = false) {
    FaultScenario sc;
    sc.model = FaultModel::LocalComm;
    sc.n = n;
    sc.horizon = horizon;
    sc.seed = seed;
    sc.schedule_seed = schedule_seed;
    sc.up = up;
    sc.repair = repair;
    sc.l = groups.l;
    sc.l1_alternation = l1_alternation;
    sc.clamped_groups = static_cast<int>(groups.clamped.size());

    auto [schedules, rate] = generate_schedules(n, up, repair, horizon, schedule_seed);
    sc.realized_rate = rate;
    std::vector<char> down(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> offsets(static_cast<std::size_t>(n) + 1, -1);
    for (int m = 0; m < horizon; ++m) {
        std::vector<int> dn;
        for (int i = 1; i <= n; ++i) {
            const auto& sched = schedules[static_cast<std::size_t>(i - 1)];
            down[static_cast<std::size_t>(i)] = sched.down_at(m) ? 1 : 0;
            offsets[static_cast<std::size_t>(i)] = sched.streak_offset(m);
            if (down[static_cast<std::size_t>(i)]) dn.push_back(i);
        }
        Rng rng = Rng(seed).derive(stream_tag("pick"), static_cast<std::uint64_t>(m));
        LocalCycleResult cyc = local_comm_cycle(down, groups, rng, &offsets, l1_alternation);
        sc.unreachable_events += cyc.unreachable;
        sc.down_nodes.push_back(std::move(dn));
        sc.executed.push_back(std::move(cyc.executed));
    }
    return sc;
}

/// Cycle source backed by a realized scenario.
inline CycleSource scenario_source(std::shared_ptr<const FaultScenario> sc) {
    return [sc](int m) {
        if (m < 0 || m >= sc->horizon)
            throw ArgumentError("scenario_source: cycle beyond scenario horizon");
        CyclePlan plan;
        plan.executed = sc->executed[static_cast<std::size_t>(m)];
        plan.faults = static_cast<int>(sc->down_nodes[static_cast<std::size_t>(m)].size());
        return plan;
    };
}

// ---------------------------------------------------------------------------
// Scenario serialization (structured text, replayable)

inline void write_scenario(const FaultScenario& sc, std::ostream& os) {
    char buf[256];
    os << "scenario v1\n";
    os << "model " << to_string(sc.model) << "\n";
    os << "n " << sc.n << "\n";
    os << "horizon " << sc.horizon << "\n";
    os << "seed " << sc.seed << "\n";
    os << "schedule_seed " << sc.schedule_seed << "\n";
    std::snprintf(buf, sizeof(buf), "r_f %.17g\n", sc.r_f);
    os << buf;
    os << "delta_f " << sc.delta_f << "\n";
    std::snprintf(buf, sizeof(buf), "weibull %.17g %.17g %.17g %.17g\n", sc.up.shape,
                  sc.up.scale, sc.repair.shape, sc.repair.scale);
    os << buf;
    os << "l " << sc.l << "\n";
    os << "alternation " << (sc.l1_alternation ? 1 : 0) << "\n";
    std::snprintf(buf, sizeof(buf), "realized_rate %.17g\n", sc.realized_rate);
    os << buf;
    for (int m = 0; m < sc.horizon; ++m) {
        os << "cycle " << m << "\n";
        os << "down " << sc.down_nodes[static_cast<std::size_t>(m)].size();
        for (int i : sc.down_nodes[static_cast<std::size_t>(m)]) os << " " << i;
        os << "\n";
        os << "exec " << sc.executed[static_cast<std::size_t>(m)].size();
        for (int i : sc.executed[static_cast<std::size_t>(m)]) os << " " << i;
        os << "\n";
    }
}

inline FaultScenario read_scenario(std::istream& is) {
    FaultScenario sc;
    std::string word, version;
    if (!(is >> word >> version) || word != "scenario" || version != "v1")
        throw ConfigError("read_scenario: bad header");
    std::string model;
    auto expect = [&](const char* key) {
        if (!(is >> word) || word != key)
            throw ConfigError(std::string("read_scenario: expected key ") + key);
    };
    expect("model");
    is >> model;
    if (model == "master-slave-constant")
        sc.model = FaultModel::MasterSlaveConstant;
    else if (model == "master-slave-interval")
        sc.model = FaultModel::MasterSlaveInterval;
    else if (model == "local-comm")
        sc.model = FaultModel::LocalComm;
    else
        throw ConfigError("read_scenario: unknown model " + model);
    expect("n");
    is >> sc.n;
    expect("horizon");
    is >> sc.horizon;
    expect("seed");
    is >> sc.seed;
    expect("schedule_seed");
    is >> sc.schedule_seed;
    expect("r_f");
    is >> sc.r_f;
    expect("delta_f");
    is >> sc.delta_f;
    expect("weibull");
    is >> sc.up.shape >> sc.up.scale >> sc.repair.shape >> sc.repair.scale;
    expect("l");
    is >> sc.l;
    expect("alternation");
    int alt = 0;
    is >> alt;
    sc.l1_alternation = alt != 0;
    expect("realized_rate");
    is >> sc.realized_rate;
    if (!is) throw ConfigError("read_scenario: truncated header");
    for (int m = 0; m < sc.horizon; ++m) {
        int mm = -1;
        expect("cycle");
        is >> mm;
        if (mm != m) throw ConfigError("read_scenario: cycle index mismatch");
        expect("down");
        std::size_t cnt = 0;
        is >> cnt;
        std::vector<int> dn(cnt);
        for (auto& v : dn) is >> v;
        expect("exec");
        is >> cnt;
        std::vector<int> ex(cnt);
        for (auto& v : ex) is >> v;
        if (!is) throw ConfigError("read_scenario: truncated cycle data");
        sc.down_nodes.push_back(std::move(dn));
        sc.executed.push_back(std::move(ex));
    }
    return sc;
}

}  // namespace ssc
