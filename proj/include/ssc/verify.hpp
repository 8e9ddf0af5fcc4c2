#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ssc/experiment.hpp"
#include "ssc/faults.hpp"
#include "ssc/oracle.hpp"
#include "ssc/schwarz.hpp"

// Bound-verification suite: Monte-Carlo and exhaustive checks of the
// expected error-reduction guarantees on small instances, against dense
// brute-force references.

namespace ssc::verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline Experiment small_instance(int n0, int n1, int layers) {
    ExperimentConfig cfg;
    cfg.n0 = n0;
    cfg.n1 = n1;
    cfg.layers = layers;
    return build_experiment(cfg);
}

struct MeanStd {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};

inline MeanStd mean_se(const std::vector<double>& xs) {
    MeanStd out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double var = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
    out.se = std::sqrt(var / static_cast<double>(xs.size()));
    return out;
}

}  // namespace detail

/// Exhaustive one-step expectation bound: on an instance with n+1 = 5
/// subproblems, the enumerated expectation of the squared energy error after
/// one uniformly sampled update of size p obeys
///   E <= (1 - c(2-c) p / (kappa (n+1))) * E0,   xi = c / lambda_max,
/// exactly (no tolerance), for c in {0.5, 1.0, 1.5} and all p.
inline CheckResult check_one_step_expectation_bound(std::uint64_t /*seed*/) {
    CheckResult res{"one-step exhaustive expectation bound", true, ""};
    const Experiment e = detail::small_instance(2, 8, 1);
    const auto ds = oracle::dense_schwarz_operator(e.splitting, e.problem.A);
    const DenseVector u = oracle::dense_solve(oracle::to_dense(e.problem.A), e.problem.b);
    const double E0 = dot(u, spmv(e.problem.A, u));
    const int nn = e.splitting.n + 1;

    double worst_margin = 1e300;
    for (double c : {0.5, 1.0, 1.5}) {
        const double xi = c / ds.lambda_max;
        for (int p = 1; p <= nn; ++p) {
            const double expectation =
                oracle::exhaustive_expectation(e.splitting, e.problem.A, u, p, xi);
            const double bound = (1.0 - c * (2.0 - c) * p / (ds.kappa() * nn)) * E0;
            worst_margin = std::min(worst_margin, bound - expectation);
            if (!(expectation <= bound)) res.pass = false;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "min(bound - E) = %.3e over xi grid and p = 1..%d",
                  worst_margin, nn);
    res.detail = buf;
    return res;
}

/// Monte-Carlo accelerated-iteration bound: with exact spectral bounds and
/// uniform sampling of size p, the trajectory mean of the squared energy
/// error satisfies E||e_u^(m)||^2 <= 2 (1 - p/((n+1) sqrt(kappa)))^m ||u||^2
/// up to 3 standard errors, for every m <= 10.
inline CheckResult check_accelerated_expectation_bound(std::uint64_t seed,
                                                       int trajectories = 2000) {
    CheckResult res{"accelerated Monte-Carlo expectation bound", true, ""};
    const Experiment e = detail::small_instance(2, 8, 1);
    const SparseMatrix& A = e.problem.A;
    const auto ds = oracle::dense_schwarz_operator(e.splitting, A);
    const DenseVector u = oracle::dense_solve(oracle::to_dense(A), e.problem.b);
    const double E0 = dot(u, spmv(A, u));
    const int n = e.splitting.n;
    const int p = 3;
    const int steps = 10;
    const AccelParams prm = accel_params(p, n, ds.lambda_max, ds.lambda_min);
    const SamplerConfig sampler{};

    std::vector<std::vector<double>> err_sq(static_cast<std::size_t>(steps));
    DenseVector diff(u.size());
    for (int traj = 0; traj < trajectories; ++traj) {
        AccelState st;
        st.x_u.assign(u.size(), 0.0);
        st.x_v.assign(u.size(), 0.0);
        st.e_values.assign(static_cast<std::size_t>(n) + 1, 0.0);
        for (int m = 0; m < steps; ++m) {
            Rng rng = Rng(seed).derive(stream_tag("accel-mc"), static_cast<std::uint64_t>(traj))
                          .derive(static_cast<std::uint64_t>(m));
            const auto I = sample_index_set(sampler, n, p, rng);
            accel_step(st, e.splitting, A, e.problem.b, I, prm);
            for (std::size_t kk = 0; kk < u.size(); ++kk) diff[kk] = u[kk] - st.x_u[kk];
            err_sq[static_cast<std::size_t>(m)].push_back(dot(diff, spmv(A, diff)));
        }
    }

    const double shrink = 1.0 - p / ((n + 1) * std::sqrt(ds.kappa()));
    double worst = -1e300;
    for (int m = 1; m <= steps; ++m) {
        const auto ms = detail::mean_se(err_sq[static_cast<std::size_t>(m - 1)]);
        const double bound = 2.0 * std::pow(shrink, m) * E0;
        const double slack = bound + 3.0 * ms.se - ms.mean;
        worst = std::max(worst, (ms.mean - bound) / std::max(ms.se, 1e-300));
        if (!(slack >= 0.0)) res.pass = false;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "max (mean - bound)/se = %.2f over m = 1..10 (limit 3)",
                  worst);
    res.detail = buf;
    return res;
}

/// Partitioned-sampling bound during persistent single-node failure: with
/// xi = l/((l+1) lambda_max), the conditional expected squared-error
/// reduction over the uniform group draw is at most 1 - (l/(l+1))^2/kappa,
/// up to 3 standard errors, for l = 1, 2, 3.
inline CheckResult check_partition_bound_under_persistent_fault(std::uint64_t seed,
                                                                int trials = 500) {
    CheckResult res{"partitioned-sampling bound during failure", true, ""};
    const Experiment e = detail::small_instance(2, 8, 1);
    const SparseMatrix& A = e.problem.A;
    const int n = e.splitting.n;
    const auto ds = oracle::dense_schwarz_operator(e.splitting, A);
    const DenseVector u = oracle::dense_solve(oracle::to_dense(A), e.problem.b);

    double worst = -1e300;
    DenseVector diff(u.size());
    for (int l = 1; l <= 3; ++l) {
        const RedundancyGroups groups = build_groups(e.splitting, l);
        const double xi = l / ((l + 1.0) * ds.lambda_max);
        const double factor = 1.0 - std::pow(l / (l + 1.0), 2) / ds.kappa();
        for (int owner = 1; owner <= n; ++owner) {
            for (int warm = 1; warm <= 2; ++warm) {
                IterationState base = make_iteration_state(e.problem, e.splitting);
                std::vector<int> full(static_cast<std::size_t>(n) + 1);
                std::iota(full.begin(), full.end(), 0);
                for (int w = 0; w < warm; ++w)
                    schwarz_step(base, e.splitting, A, e.problem.b, full,
                                 Relaxation::steepest());
                for (std::size_t kk = 0; kk < u.size(); ++kk) diff[kk] = u[kk] - base.x[kk];
                const double E = dot(diff, spmv(A, diff));
                if (E < 1e-24) continue;

                const auto& members = groups.groups[static_cast<std::size_t>(owner - 1)].members;
                std::vector<double> ratios;
                ratios.reserve(static_cast<std::size_t>(trials));
                Rng rng = Rng(seed).derive(stream_tag("a33"),
                                           static_cast<std::uint64_t>(l * 1000 + owner * 10 + warm));
                for (int t = 0; t < trials; ++t) {
                    const int s_draw = static_cast<int>(rng.below(static_cast<std::uint64_t>(members.size()) + 1));
                    const int excluded = s_draw == 0 ? owner : members[static_cast<std::size_t>(s_draw - 1)];
                    std::vector<int> I;
                    I.reserve(static_cast<std::size_t>(n));
                    for (int i = 0; i <= n; ++i)
                        if (i != excluded) I.push_back(i);
                    IterationState st = base;
                    schwarz_step(st, e.splitting, A, e.problem.b, I, Relaxation::fixed(xi));
                    for (std::size_t kk = 0; kk < u.size(); ++kk) diff[kk] = u[kk] - st.x[kk];
                    ratios.push_back(dot(diff, spmv(A, diff)) / E);
                }
                const auto ms = detail::mean_se(ratios);
                worst = std::max(worst, (ms.mean - factor) / std::max(ms.se, 1e-300));
                if (!(ms.mean <= factor + 3.0 * ms.se)) res.pass = false;
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "max (mean - factor)/se = %.2f over l = 1..3 (limit 3)",
                  worst);
    res.detail = buf;
    return res;
}

/// Residual identity: after a cycle correcting subproblem i with no corrected
/// overlapping neighbor, the restricted residual satisfies
/// r_new,i = (1 - xi_i) r_i to relative accuracy 1e-9. Checked across 100
/// random cycles on a 16-subdomain instance.
inline CheckResult check_residual_identity(std::uint64_t seed, int cycles = 100) {
    CheckResult res{"per-subdomain residual identity", true, ""};
    const Experiment e = detail::small_instance(4, 16, 1);
    const SparseMatrix& A = e.problem.A;
    const int n = e.splitting.n;
    const SpectralBounds sb = estimate_spectral_bounds(e.splitting, A, 60, seed);

    IterationState st = make_iteration_state(e.problem, e.splitting);
    Rng rng = Rng(seed).derive(stream_tag("resid"));
    int checks = 0;
    double worst = 0.0;
    for (int cyc = 0; cyc < cycles; ++cyc) {
        const int p = 1 + static_cast<int>(rng.below(4));
        std::vector<int> pool(static_cast<std::size_t>(n));
        std::iota(pool.begin(), pool.end(), 1);
        for (int i = 0; i < p; ++i) {
            const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        }
        std::vector<int> I(pool.begin(), pool.begin() + p);
        std::sort(I.begin(), I.end());
        const double xi = rng.uniform(0.05, 1.9 / sb.lambda_max_est);

        const DenseVector r_before = st.r;
        schwarz_step(st, e.splitting, A, e.problem.b, I, Relaxation::fixed(xi));

        for (int i : I) {
            bool isolated = true;
            for (int j : I)
                if (j != i && std::binary_search(e.splitting.neighbors_of(i).begin(),
                                                 e.splitting.neighbors_of(i).end(), j))
                    isolated = false;
            if (!isolated) continue;
            const auto& dofs = e.splitting.sub(i).dofs;
            double err = 0.0, scale = 0.0;
            const double keep = 1.0 - xi * e.splitting.weights[static_cast<std::size_t>(i)];
            for (index_t g : dofs) {
                const double want = keep * r_before[static_cast<std::size_t>(g)];
                const double got = st.r[static_cast<std::size_t>(g)];
                err += (got - want) * (got - want);
                scale += r_before[static_cast<std::size_t>(g)] * r_before[static_cast<std::size_t>(g)];
            }
            if (scale == 0.0) continue;
            ++checks;
            const double rel = std::sqrt(err / scale);
            worst = std::max(worst, rel);
            if (!(rel <= 1e-9)) res.pass = false;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d isolated corrections checked, worst relative error %.3e",
                  checks, worst);
    res.detail = buf;
    if (checks < cycles / 2) {
        res.pass = false;
        res.detail += " (too few isolated corrections sampled)";
    }
    return res;
}

inline std::vector<CheckResult> run_all(std::uint64_t seed) {
    return {check_one_step_expectation_bound(seed),
            check_accelerated_expectation_bound(seed),
            check_partition_bound_under_persistent_fault(seed),
            check_residual_identity(seed)};
}

}  // namespace ssc::verify
