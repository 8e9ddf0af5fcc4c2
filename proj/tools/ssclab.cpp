// Experiment runner for stochastic subspace-correction solvers: spectrum
// estimation, single runs, iteration-count tables under fault injection,
// cycle-time budgets, and the bound-verification suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ssc/config.hpp"
#include "ssc/experiment.hpp"
#include "ssc/verify.hpp"

namespace fs = std::filesystem;

namespace {

ssc::ExperimentConfig load_or_default(const std::string& path) {
    if (path.empty()) return ssc::ExperimentConfig{};
    return ssc::load_config(path);
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    const fs::path p = fs::path(dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ssc::ConfigError("cannot open output file " + p.string());
    return f;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic subspace correction solver lab"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 42;
    int repeats = 1;

    auto add_common = [&](CLI::App* sub, bool with_repeats = false) {
        sub->add_option("--config", config_path, "experiment configuration file");
        sub->add_option("--seed", seed, "master random seed");
        sub->add_option("--out", out_dir, "output directory");
        if (with_repeats)
            sub->add_option("--repeats", repeats, "repetitions per table cell (mean/sd columns)");
    };

    auto* cmd_spectrum = app.add_subcommand(
        "spectrum", "estimate the extreme eigenvalues of the splitting operator");
    add_common(cmd_spectrum);

    auto* cmd_run = app.add_subcommand("run", "execute one iteration run, write run.csv");
    add_common(cmd_run);
    std::string save_trace;
    cmd_run->add_option("--save-trace", save_trace, "write the realized fault trace to a file");

    auto* cmd_table1 = app.add_subcommand(
        "table1", "iteration counts vs constant failure rate (master-slave model)");
    add_common(cmd_table1, true);

    auto* cmd_table2 = app.add_subcommand(
        "table2", "iteration counts vs redundancy level under Weibull faults (local model)");
    add_common(cmd_table2, true);

    auto* cmd_cost = app.add_subcommand("cost", "evaluate per-cycle time budgets");
    std::string constants_path;
    cmd_cost->add_option("--constants", constants_path, "cost constants file")->required();
    cmd_cost->add_option("--out", out_dir, "output directory");

    auto* cmd_verify = app.add_subcommand("verify", "run the bound-verification suite");
    cmd_verify->add_option("--seed", seed, "master random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_spectrum->parsed()) {
            const auto cfg = load_or_default(config_path);
            const auto e = ssc::build_experiment(cfg);
            const auto spec = ssc::run_spectrum(e, seed);
            std::cout << spec.text;
            auto f = open_output(out_dir, "spectrum.txt");
            char buf[128];
            std::snprintf(buf, sizeof(buf), "# config_hash=%016llx seed=%llu\n",
                          static_cast<unsigned long long>(spec.config_hash),
                          static_cast<unsigned long long>(spec.seed));
            f << buf << spec.text;
            return 0;
        }
        if (cmd_run->parsed()) {
            const auto cfg = load_or_default(config_path);
            const auto e = ssc::build_experiment(cfg);
            const auto outcome = ssc::run_experiment(e, seed);
            auto f = open_output(out_dir, "run.csv");
            ssc::write_csv(outcome.report, f);
            if (!save_trace.empty()) {
                if (!outcome.scenario) {
                    std::cerr << "run: no fault trace to save (fault-free configuration)\n";
                } else {
                    std::ofstream tf(save_trace, std::ios::binary);
                    if (!tf) throw ssc::ConfigError("cannot open trace file " + save_trace);
                    ssc::write_scenario(*outcome.scenario, tf);
                }
            }
            std::printf("%s after %d iterations (eps %.3e -> %.3e)\n",
                        outcome.report.converged ? "converged" : "NOT converged",
                        outcome.report.iterations, outcome.report.epsilon_initial,
                        outcome.report.epsilon_final);
            return outcome.report.converged ? 0 : 2;
        }
        if (cmd_table1->parsed()) {
            const auto cfg = load_or_default(config_path);
            const auto e = ssc::build_experiment(cfg);
            auto t = ssc::run_table1(e.problem, e.splitting, seed, repeats);
            t.config_hash = cfg.hash();
            std::cout << ssc::to_text(t);
            auto f = open_output(out_dir, "table1.csv");
            ssc::write_csv(t, f);
            return 0;
        }
        if (cmd_table2->parsed()) {
            const auto cfg = load_or_default(config_path);
            const auto e = ssc::build_experiment(cfg);
            auto t = ssc::run_table2(e.problem, e.splitting, seed, repeats);
            t.config_hash = cfg.hash();
            std::cout << ssc::to_text(t);
            auto f = open_output(out_dir, "table2.csv");
            ssc::write_csv(t, f);
            return 0;
        }
        if (cmd_cost->parsed()) {
            const auto c = ssc::load_cost_constants(constants_path);
            std::cout << ssc::cost_table_text(c);
            auto f = open_output(out_dir, "cost.csv");
            ssc::write_cost_csv(c, f);
            return 0;
        }
        if (cmd_verify->parsed()) {
            const auto results = ssc::verify::run_all(seed);
            bool all = true;
            for (const auto& r : results) {
                std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                            r.detail.c_str());
                all = all && r.pass;
            }
            return all ? 0 : 1;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
