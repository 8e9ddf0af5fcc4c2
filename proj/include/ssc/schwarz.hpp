#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ssc/error.hpp"
#include "ssc/rng.hpp"
#include "ssc/splitting.hpp"

namespace ssc {

// ---------------------------------------------------------------------------
// Index-set sampling

struct SamplerConfig {
    enum class Mode { Uniform, Weighted };
    Mode mode = Mode::Uniform;
    std::vector<double> q;       // weighted mode: inclusion distribution over 0..n
    int p_constant = 0;          // 0 means the full set n+1
    std::vector<int> p_sequence; // optional per-step sizes, overrides p_constant

    int p_at(int m, int n) const {
        if (!p_sequence.empty()) {
            const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(m),
                                                        p_sequence.size() - 1);
            return p_sequence[i];
        }
        return p_constant > 0 ? p_constant : n + 1;
    }
};

/// Random index set of size p_m from {0..n}. Uniform mode draws a uniform
/// subset by partial Fisher-Yates; weighted mode draws without replacement
/// proportionally to q (renormalizing after each draw), which approximates
/// inclusion probabilities p_m*q_i. Result is sorted.
inline std::vector<int> sample_index_set(const SamplerConfig& cfg, int n, int p_m, Rng& rng) {
    if (p_m < 1 || p_m > n + 1) throw ArgumentError("sample_index_set: p_m out of range");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(p_m));
    if (cfg.mode == SamplerConfig::Mode::Uniform) {
        std::vector<int> pool(static_cast<std::size_t>(n) + 1);
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < p_m; ++i) {
            const auto j = static_cast<std::size_t>(i) +
                           static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n + 1 - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
            out.push_back(pool[static_cast<std::size_t>(i)]);
        }
    } else {
        if (static_cast<int>(cfg.q.size()) != n + 1)
            throw ArgumentError("sample_index_set: q must have size n+1");
        double total = 0.0;
        for (double v : cfg.q) {
            if (!(v > 0.0)) throw ArgumentError("sample_index_set: q entries must be positive");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-8)
            throw ArgumentError("sample_index_set: q must sum to one");
        std::vector<double> w = cfg.q;
        for (int draw = 0; draw < p_m; ++draw) {
            double u = rng.uniform01() * total;
            int pick = -1;
            for (int i = 0; i <= n; ++i) {
                if (w[static_cast<std::size_t>(i)] <= 0.0) continue;
                u -= w[static_cast<std::size_t>(i)];
                pick = i;
                if (u <= 0.0) break;
            }
            out.push_back(pick);
            total -= w[static_cast<std::size_t>(pick)];
            w[static_cast<std::size_t>(pick)] = 0.0;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Error indicator

/// Global error indicator eps = sqrt(sum_i e_i) where e_i = r_i^T d_i are the
/// per-subproblem scalars, the coarse term from the current cycle and the
/// local terms lagged by one cycle. Raises a consistency error when a term is
/// below -1e-12 (each e_i is a quadratic form and must be nonnegative).
inline double error_indicator(const std::vector<double>& e_lagged,
                              std::optional<double> e0_current = std::nullopt) {
    double sum = 0.0;
    for (std::size_t i = 0; i < e_lagged.size(); ++i) {
        double v = (i == 0 && e0_current) ? *e0_current : e_lagged[i];
        if (v < -1e-12) throw ConsistencyError("error_indicator: negative subproblem term");
        sum += std::max(0.0, v);
    }
    return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// One-step iteration

struct Relaxation {
    enum class Kind { Fixed, SteepestDescent };
    Kind kind = Kind::SteepestDescent;
    double xi = 1.0;

    static Relaxation fixed(double value) { return {Kind::Fixed, value}; }
    static Relaxation steepest() { return {Kind::SteepestDescent, 0.0}; }
};

/// Steepest-descent relaxation a(e,d)/a(d,d) evaluated without the error as
/// r^T d / d^T (A d); returns xi = 0 with the flag set when the direction
/// vanishes (zero residual or empty index set).
struct RelaxationChoice {
    double xi = 0.0;
    bool zero_direction = false;
};

inline RelaxationChoice steepest_descent_xi(const DenseVector& r, const DenseVector& d,
                                            const DenseVector& Ad) {
    const double den = dot(d, Ad);
    if (!(den > 0.0) || !std::isfinite(den)) return {0.0, true};
    return {dot(r, d) / den, false};
}

struct IterationState {
    int m = 0;                     // completed update steps
    DenseVector x;                 // current iterate
    DenseVector r;                 // residual b - A x, incrementally updated
    std::vector<double> e_values;  // last computed e_i per subproblem
    double epsilon = 0.0;          // last indicator value
    int commits = 0;               // update count, for periodic residual refresh
};

/// Residual refresh period: between refreshes the residual is updated
/// incrementally from the corrections, mirroring the distributed update.
constexpr int kResidualRefreshPeriod = 50;

inline void prime_indicator_terms(IterationState& st, const Splitting& s) {
    st.e_values.assign(static_cast<std::size_t>(s.n) + 1, 0.0);
    for (int i = 0; i <= s.n; ++i) {
        const DenseVector di = local_solve(s, i, st.r);
        if (i == 0) {
            if (s.coarse_dim() > 0)
                st.e_values[0] = dot(spmv_transpose(s.R0, st.r), di);
        } else {
            DenseVector ri;
            gather(st.r, s.sub(i).dofs, ri);
            st.e_values[static_cast<std::size_t>(i)] = dot(ri, di);
        }
    }
    st.epsilon = error_indicator(st.e_values);
}

/// Fresh state at x = 0 with all indicator terms primed, so the first
/// indicator is well defined.
inline IterationState make_iteration_state(const FemProblem& problem, const Splitting& s) {
    IterationState st;
    st.x.assign(problem.b.size(), 0.0);
    st.r = problem.b;
    prime_indicator_terms(st, s);
    return st;
}

struct StepResult {
    double xi = 0.0;
    double epsilon = 0.0;
    bool empty_set = false;
    bool zero_direction = false;
};

/// One cycle of the stochastic subspace-correction iteration: solve the
/// subproblems in I, record e_i = r_i^T d_i at the pre-update residual,
/// evaluate the indicator (current coarse term, lagged local terms), then
/// apply the simultaneous update x += xi*c, r -= xi*A*c with c the weighted
/// sum of corrections.
///
/// Indices in indicator_only are solved and recorded for the indicator but
/// contribute no correction (the run loop uses this to keep indicator terms
/// of fault-skipped subproblems current).
inline StepResult schwarz_step(IterationState& st, const Splitting& s, const SparseMatrix& A,
                               const DenseVector& b, std::span<const int> I,
                               const Relaxation& relax,
                               std::span<const int> indicator_only = {}) {
    StepResult res;
    if (I.empty()) {
        res.empty_set = true;
        res.epsilon = st.epsilon;
        return res;
    }

    DenseVector c(st.x.size(), 0.0);
    std::optional<double> e0_current;
    std::vector<std::pair<int, double>> fresh;
    fresh.reserve(I.size() + indicator_only.size());
    DenseVector ri, di;
    auto visit = [&](int i, bool correct) {
        if (i < 0 || i > s.n) throw ArgumentError("schwarz_step: index out of range");
        if (i == 0) {
            if (s.coarse_dim() > 0) {
                const DenseVector r0 = spmv_transpose(s.R0, st.r);
                const DenseVector d0 = s.coarse_factor.solve(r0);
                const double e0 = dot(r0, d0);
                e0_current = e0;
                fresh.emplace_back(0, e0);
                if (correct) {
                    const DenseVector up = spmv(s.R0, d0);
                    axpy_into(s.weights[0], up, c);
                }
            } else {
                e0_current = 0.0;
                fresh.emplace_back(0, 0.0);
            }
        } else {
            gather(st.r, s.sub(i).dofs, ri);
            di.resize(ri.size());
            s.sub(i).factor.solve_into(ri.data(), di.data());
            fresh.emplace_back(i, dot(ri, di));
            if (correct)
                scatter_add(di, s.sub(i).dofs, s.weights[static_cast<std::size_t>(i)], c);
        }
    };
    for (int i : I) visit(i, true);
    for (int i : indicator_only) visit(i, false);

    res.epsilon = error_indicator(st.e_values, e0_current);
    for (const auto& [i, e] : fresh) {
        if (e < -1e-12) throw ConsistencyError("schwarz_step: negative e_i");
        st.e_values[static_cast<std::size_t>(i)] = e;
    }

    DenseVector z(c.size());
    spmv_into(A, c.data(), z.data());
    if (relax.kind == Relaxation::Kind::SteepestDescent) {
        const RelaxationChoice ch = steepest_descent_xi(st.r, c, z);
        res.xi = ch.xi;
        res.zero_direction = ch.zero_direction;
    } else {
        res.xi = relax.xi;
    }

    axpy_into(res.xi, c, st.x);
    axpy_into(-res.xi, z, st.r);
    if (++st.commits % kResidualRefreshPeriod == 0) {
        spmv_into(A, st.x.data(), z.data());
        for (std::size_t idx = 0; idx < st.r.size(); ++idx) st.r[idx] = b[idx] - z[idx];
    }
    st.epsilon = res.epsilon;
    ++st.m;
    return res;
}

// ---------------------------------------------------------------------------
// Accelerated two-step iteration

struct AccelParams {
    double alpha = 0.0;
    double beta = 0.0;
    double xi = 0.0;
    double eta = 0.0;
};

/// Parameter formulas of the accelerated scheme from safe spectral bounds:
/// xi = 1/ub, eta = (ub*lb)^{-1/2}, beta = 1 - p/((n+1)*sqrt(kappa_bar)),
/// alpha from (1-alpha)/alpha = (n+1)*ub*eta/p.
inline AccelParams accel_params(int p_m, int n, double lambda_upper, double lambda_lower) {
    if (!(lambda_lower > 0.0) || lambda_lower > lambda_upper)
        throw ArgumentError("accel_params: need 0 < lambda_lower <= lambda_upper");
    if (p_m < 1 || p_m > n + 1) throw ArgumentError("accel_params: p_m out of range");
    AccelParams prm;
    prm.xi = 1.0 / lambda_upper;
    prm.eta = 1.0 / std::sqrt(lambda_upper * lambda_lower);
    const double root_kappa = std::sqrt(lambda_upper / lambda_lower);
    prm.beta = 1.0 - static_cast<double>(p_m) / ((n + 1) * root_kappa);
    prm.alpha = static_cast<double>(p_m) / (p_m + (n + 1) * root_kappa);
    return prm;
}

struct AccelState {
    int m = 0;
    DenseVector x_u;
    DenseVector x_v;
    std::vector<double> e_values;
    double epsilon = 0.0;
};

inline AccelState make_accel_state(const FemProblem& problem, const Splitting& s) {
    AccelState st;
    st.x_u.assign(problem.b.size(), 0.0);
    st.x_v.assign(problem.b.size(), 0.0);
    IterationState tmp;
    tmp.x = st.x_u;
    tmp.r = problem.b;
    prime_indicator_terms(tmp, s);
    st.e_values = tmp.e_values;
    st.epsilon = tmp.epsilon;
    return st;
}

/// One cycle of the accelerated vector iteration:
///   w = alpha*v + (1-alpha)*u, solves at the residual of w,
///   u_new = w + xi*c, v_new = beta*v + (1-beta)*w + eta*c.
/// indicator_only behaves as in schwarz_step.
inline StepResult accel_step(AccelState& st, const Splitting& s, const SparseMatrix& A,
                             const DenseVector& b, std::span<const int> I,
                             const AccelParams& prm,
                             std::span<const int> indicator_only = {}) {
    StepResult res;
    res.xi = prm.xi;
    if (I.empty()) {
        res.empty_set = true;
        res.epsilon = st.epsilon;
        return res;
    }
    const std::size_t N = st.x_u.size();
    DenseVector w(N);
    for (std::size_t k = 0; k < N; ++k)
        w[k] = prm.alpha * st.x_v[k] + (1.0 - prm.alpha) * st.x_u[k];
    DenseVector rw(N);
    spmv_into(A, w.data(), rw.data());
    for (std::size_t k = 0; k < N; ++k) rw[k] = b[k] - rw[k];

    DenseVector c(N, 0.0);
    std::optional<double> e0_current;
    std::vector<std::pair<int, double>> fresh;
    fresh.reserve(I.size() + indicator_only.size());
    DenseVector ri, di;
    auto visit = [&](int i, bool correct) {
        if (i < 0 || i > s.n) throw ArgumentError("accel_step: index out of range");
        if (i == 0) {
            if (s.coarse_dim() > 0) {
                const DenseVector r0 = spmv_transpose(s.R0, rw);
                const DenseVector d0 = s.coarse_factor.solve(r0);
                const double e0 = dot(r0, d0);
                e0_current = e0;
                fresh.emplace_back(0, e0);
                if (correct) {
                    const DenseVector up = spmv(s.R0, d0);
                    axpy_into(s.weights[0], up, c);
                }
            } else {
                e0_current = 0.0;
                fresh.emplace_back(0, 0.0);
            }
        } else {
            gather(rw, s.sub(i).dofs, ri);
            di.resize(ri.size());
            s.sub(i).factor.solve_into(ri.data(), di.data());
            fresh.emplace_back(i, dot(ri, di));
            if (correct)
                scatter_add(di, s.sub(i).dofs, s.weights[static_cast<std::size_t>(i)], c);
        }
    };
    for (int i : I) visit(i, true);
    for (int i : indicator_only) visit(i, false);

    res.epsilon = error_indicator(st.e_values, e0_current);
    for (const auto& [i, e] : fresh) {
        if (e < -1e-12) throw ConsistencyError("accel_step: negative e_i");
        st.e_values[static_cast<std::size_t>(i)] = e;
    }

    for (std::size_t k = 0; k < N; ++k) {
        const double ck = c[k];
        st.x_u[k] = w[k] + prm.xi * ck;
        st.x_v[k] = prm.beta * st.x_v[k] + (1.0 - prm.beta) * w[k] + prm.eta * ck;
    }
    st.epsilon = res.epsilon;
    ++st.m;
    return res;
}

// ---------------------------------------------------------------------------
// Run loop

/// One cycle's worth of work: the executed subproblem indices (sorted) and
/// the number of faults that produced it.
struct CyclePlan {
    std::vector<int> executed;
    int faults = 0;
};

using CycleSource = std::function<CyclePlan(int cycle)>;

/// Source executing the full index set every cycle.
inline CycleSource full_set_source(int n) {
    std::vector<int> all(static_cast<std::size_t>(n) + 1);
    std::iota(all.begin(), all.end(), 0);
    return [all](int) { return CyclePlan{all, 0}; };
}

/// Source drawing from a sampler with a per-cycle derived random stream, so
/// cycle m's draw depends only on (seed, m).
inline CycleSource sampler_source(const SamplerConfig& cfg, int n, std::uint64_t seed) {
    return [cfg, n, seed](int m) {
        Rng rng = Rng(seed).derive(stream_tag("sampler"), static_cast<std::uint64_t>(m));
        const int p = cfg.p_at(m, n);
        CyclePlan plan;
        plan.executed = sample_index_set(cfg, n, p, rng);
        plan.faults = n + 1 - p;
        return plan;
    };
}

enum class Method { OneStep, Accelerated };

struct AccelSettings {
    double lambda_upper = 3.33;
    double lambda_lower = 0.9;
    // When positive, a safe lower bound used for p_m in the parameter
    // formulas instead of the observed executed-set size.
    int p_lower = 0;
};

struct Termination {
    double eps0 = 1e-6;  // relative indicator reduction
    int max_steps = 200;
};

/// Indicator bookkeeping under faults. By default each subproblem's term
/// keeps the value from its last executed solve (Stale), which is what the
/// server of a real network holds while a node is unreachable; starved
/// subproblems then keep the indicator inflated until they run again. The
/// Refreshed variant re-evaluates skipped terms each cycle instead.
/// Fault-free runs are identical either way.
enum class IndicatorTerms { Stale, Refreshed };

struct RunRecord {
    int m = 0;
    int p_m = 0;
    int f_m = 0;
    double xi_m = 0.0;
    double epsilon = 0.0;
};

struct RunReport {
    std::vector<RunRecord> records;  // first record is the initial state m = 0
    bool converged = false;
    int iterations = 0;
    std::string termination_reason;
    double epsilon_initial = 0.0;
    double epsilon_final = 0.0;  // freshest indicator at termination time
    int empty_cycle_events = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::string config_echo;
};

/// Runs the iteration from x = 0 until the indicator drops below
/// eps0 * eps_initial or max_steps cycles have executed.
///
/// Each record carries the indicator computed during the cycle's solve step
/// (current coarse term, one-cycle-lagged local terms). Termination is
/// checked at cycle end against the freshest term values available by then:
/// by the end of a cycle all its per-subproblem scalars have reached the
/// server, so the check uses the unlagged sum.
inline RunReport run_solver(const FemProblem& problem, const Splitting& s,
                            const CycleSource& cycles, Method method,
                            const Relaxation& relax, const AccelSettings& accel,
                            const Termination& term,
                            IndicatorTerms indicator = IndicatorTerms::Stale) {
    const SparseMatrix& A = problem.A;
    const DenseVector& b = problem.b;
    RunReport rep;

    IterationState one;
    AccelState acc;
    double eps_init = 0.0;
    if (method == Method::OneStep) {
        one = make_iteration_state(problem, s);
        eps_init = one.epsilon;
    } else {
        acc = make_accel_state(problem, s);
        eps_init = acc.epsilon;
    }
    rep.epsilon_initial = eps_init;
    rep.epsilon_final = eps_init;
    rep.records.push_back({0, 0, 0, 0.0, eps_init});
    if (eps_init == 0.0) {
        rep.converged = true;
        rep.iterations = 0;
        rep.termination_reason = "converged";
        return rep;
    }

    std::vector<int> missed;
    for (int m = 1; m <= term.max_steps; ++m) {
        const CyclePlan plan = cycles(m - 1);
        missed.clear();
        if (indicator == IndicatorTerms::Refreshed &&
            static_cast<int>(plan.executed.size()) < s.n + 1 && !plan.executed.empty()) {
            std::size_t pos = 0;
            for (int i = 0; i <= s.n; ++i) {
                if (pos < plan.executed.size() && plan.executed[pos] == i)
                    ++pos;
                else
                    missed.push_back(i);
            }
        }
        StepResult res;
        if (method == Method::OneStep) {
            res = schwarz_step(one, s, A, b, plan.executed, relax, missed);
        } else if (plan.executed.empty()) {
            res.empty_set = true;
            res.epsilon = acc.epsilon;
        } else {
            const int p_eff = accel.p_lower > 0
                                  ? accel.p_lower
                                  : static_cast<int>(plan.executed.size());
            const AccelParams prm =
                accel_params(p_eff, s.n, accel.lambda_upper, accel.lambda_lower);
            res = accel_step(acc, s, A, b, plan.executed, prm, missed);
        }
        if (res.empty_set) ++rep.empty_cycle_events;
        rep.records.push_back(
            {m, static_cast<int>(plan.executed.size()), plan.faults, res.xi, res.epsilon});
        const double fresh = error_indicator(method == Method::OneStep ? one.e_values
                                                                       : acc.e_values);
        rep.epsilon_final = fresh;
        if (fresh <= term.eps0 * eps_init) {
            rep.converged = true;
            rep.iterations = m;
            rep.termination_reason = "converged";
            return rep;
        }
    }
    rep.converged = false;
    rep.iterations = term.max_steps;
    rep.termination_reason = "max_steps";
    return rep;
}

/// CSV serialization: provenance comment, header, one row per record,
/// floats with 17 significant digits, LF line endings.
inline void write_csv(const RunReport& rep, std::ostream& os) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# config_hash=%016llx seed=%llu\n",
                  static_cast<unsigned long long>(rep.config_hash),
                  static_cast<unsigned long long>(rep.seed));
    os << buf;
    os << "m,p_m,f_m,xi_m,epsilon\n";
    for (const auto& r : rep.records) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.17g\n", r.m, r.p_m, r.f_m, r.xi_m,
                      r.epsilon);
        os << buf;
    }
}

}  // namespace ssc
