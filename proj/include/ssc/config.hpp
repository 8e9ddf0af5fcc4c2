#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ssc/error.hpp"
#include "ssc/faults.hpp"
#include "ssc/schwarz.hpp"

namespace ssc {

/// Full description of one experiment. Defaults correspond to the main test
/// configuration: n0=20, n1=400, 6 overlap layers, unit weights, one-step
/// iteration with steepest-descent relaxation, no faults, eps0 = 1e-6.
struct ExperimentConfig {
    // [grid]
    int n0 = 20;
    int n1 = 400;
    int layers = 6;
    // [weights]
    double weight_subdomain = 1.0;
    double weight_coarse = 1.0;
    // [problem]
    bool zero_rhs = false;
    // [method]
    Method method = Method::OneStep;
    Relaxation::Kind relaxation = Relaxation::Kind::SteepestDescent;
    double xi = 0.4;
    double lambda_upper = 3.33;
    double lambda_lower = 0.9;
    int p_lower = 0;
    // [faults]
    enum class Faults { None, MasterSlaveConstant, MasterSlaveInterval, LocalComm, Trace };
    Faults fault_model = Faults::None;
    double r_f = 0.0;
    int delta_f = 0;
    double k1 = 0.5, lambda1 = 18.0;
    double k2 = 1.0, lambda2 = 3.0;
    int l = 2;
    bool l1_alternation = false;
    std::string trace_path;
    // Re-evaluate indicator terms of fault-skipped subproblems each cycle
    // instead of carrying the last solved values the way a real network
    // with unreachable nodes does.
    bool refresh_indicator = false;
    // [termination]
    double eps0 = 1e-6;
    int max_steps = 200;
    // [spectrum]
    int lanczos_iterations = 100;

    void validate() const {
        GridSpec grid;
        try {
            grid = GridSpec(n1, n0);
        } catch (const ArgumentError& ex) {
            throw ConfigError(std::string("config: ") + ex.what());
        }
        if (layers <= 0 || layers >= grid.k())
            throw ConfigError("config: layers must satisfy 0 < layers < n1/n0");
        if (!(weight_subdomain > 0.0) || !(weight_coarse > 0.0))
            throw ConfigError("config: weights must be positive");
        if (relaxation == Relaxation::Kind::Fixed && !(xi > 0.0))
            throw ConfigError("config: fixed relaxation requires xi > 0");
        if (!(lambda_lower > 0.0) || lambda_lower > lambda_upper)
            throw ConfigError("config: need 0 < lambda_lower <= lambda_upper");
        if (r_f < 0.0 || r_f > 1.0) throw ConfigError("config: r_f outside [0,1]");
        if (delta_f < 0) throw ConfigError("config: delta_f must be >= 0");
        if (l < 1) throw ConfigError("config: l must be >= 1");
        if (!(eps0 > 0.0) || eps0 >= 1.0) throw ConfigError("config: eps0 outside (0,1)");
        if (max_steps < 1) throw ConfigError("config: max_steps must be >= 1");
        if (lanczos_iterations < 1) throw ConfigError("config: spectrum iterations must be >= 1");
        if (fault_model == Faults::Trace && trace_path.empty())
            throw ConfigError("config: trace model requires trace_path");
        if (k1 <= 0 || k2 <= 0 || lambda1 <= 0 || lambda2 <= 0)
            throw ConfigError("config: Weibull parameters must be positive");
    }

    /// Canonical flat text dump with a fixed key order; basis of the hash.
    std::string canonical() const {
        char buf[1024];
        const char* method_s = method == Method::OneStep ? "one-step" : "accelerated";
        const char* relax_s =
            relaxation == Relaxation::Kind::SteepestDescent ? "steepest" : "fixed";
        const char* fault_s = "none";
        switch (fault_model) {
            case Faults::None: fault_s = "none"; break;
            case Faults::MasterSlaveConstant: fault_s = "master-slave-constant"; break;
            case Faults::MasterSlaveInterval: fault_s = "master-slave-interval"; break;
            case Faults::LocalComm: fault_s = "local-comm"; break;
            case Faults::Trace: fault_s = "trace"; break;
        }
        std::snprintf(buf, sizeof(buf),
                      "grid.n0=%d\ngrid.n1=%d\ngrid.layers=%d\n"
                      "weights.subdomain=%.17g\nweights.coarse=%.17g\n"
                      "problem.rhs=%s\n"
                      "method.kind=%s\nmethod.relaxation=%s\nmethod.xi=%.17g\n"
                      "method.lambda_upper=%.17g\nmethod.lambda_lower=%.17g\nmethod.p_lower=%d\n"
                      "faults.model=%s\nfaults.r_f=%.17g\nfaults.delta_f=%d\n"
                      "faults.k1=%.17g\nfaults.lambda1=%.17g\nfaults.k2=%.17g\nfaults.lambda2=%.17g\n"
                      "faults.l=%d\nfaults.l1_alternation=%d\nfaults.trace_path=%s\n"
                      "faults.refresh_indicator=%d\n"
                      "termination.epsilon0=%.17g\ntermination.max_steps=%d\n"
                      "spectrum.iterations=%d\n",
                      n0, n1, layers, weight_subdomain, weight_coarse,
                      zero_rhs ? "zero" : "one", method_s, relax_s, xi, lambda_upper,
                      lambda_lower, p_lower, fault_s, r_f, delta_f, k1, lambda1, k2, lambda2, l,
                      l1_alternation ? 1 : 0, trace_path.c_str(), refresh_indicator ? 1 : 0,
                      eps0, max_steps, lanczos_iterations);
        return buf;
    }

    std::uint64_t hash() const {
        const std::string c = canonical();
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : c) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key);
    }
}

inline int parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key);
    }
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean value for " + key);
}

}  // namespace detail

/// Parses the flat key = value format with [section] headers; # starts a
/// comment. Unknown keys are rejected.
inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section at line " + std::to_string(lineno));
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = section + "." + detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));

        using detail::parse_bool;
        using detail::parse_double;
        using detail::parse_int;
        if (key == "grid.n0") cfg.n0 = parse_int(val, key);
        else if (key == "grid.n1") cfg.n1 = parse_int(val, key);
        else if (key == "grid.layers") cfg.layers = parse_int(val, key);
        else if (key == "weights.subdomain") cfg.weight_subdomain = parse_double(val, key);
        else if (key == "weights.coarse") cfg.weight_coarse = parse_double(val, key);
        else if (key == "problem.rhs") {
            if (val == "one") cfg.zero_rhs = false;
            else if (val == "zero") cfg.zero_rhs = true;
            else throw ConfigError("config: problem.rhs must be one|zero");
        } else if (key == "method.kind") {
            if (val == "one-step") cfg.method = Method::OneStep;
            else if (val == "accelerated") cfg.method = Method::Accelerated;
            else throw ConfigError("config: method.kind must be one-step|accelerated");
        } else if (key == "method.relaxation") {
            if (val == "steepest") cfg.relaxation = Relaxation::Kind::SteepestDescent;
            else if (val == "fixed") cfg.relaxation = Relaxation::Kind::Fixed;
            else throw ConfigError("config: method.relaxation must be steepest|fixed");
        } else if (key == "method.xi") cfg.xi = parse_double(val, key);
        else if (key == "method.lambda_upper") cfg.lambda_upper = parse_double(val, key);
        else if (key == "method.lambda_lower") cfg.lambda_lower = parse_double(val, key);
        else if (key == "method.p_lower") cfg.p_lower = parse_int(val, key);
        else if (key == "faults.model") {
            if (val == "none") cfg.fault_model = ExperimentConfig::Faults::None;
            else if (val == "master-slave-constant")
                cfg.fault_model = ExperimentConfig::Faults::MasterSlaveConstant;
            else if (val == "master-slave-interval")
                cfg.fault_model = ExperimentConfig::Faults::MasterSlaveInterval;
            else if (val == "local-comm") cfg.fault_model = ExperimentConfig::Faults::LocalComm;
            else if (val == "trace") cfg.fault_model = ExperimentConfig::Faults::Trace;
            else throw ConfigError("config: unknown faults.model " + val);
        } else if (key == "faults.r_f") cfg.r_f = parse_double(val, key);
        else if (key == "faults.delta_f") cfg.delta_f = parse_int(val, key);
        else if (key == "faults.k1") cfg.k1 = parse_double(val, key);
        else if (key == "faults.lambda1") cfg.lambda1 = parse_double(val, key);
        else if (key == "faults.k2") cfg.k2 = parse_double(val, key);
        else if (key == "faults.lambda2") cfg.lambda2 = parse_double(val, key);
        else if (key == "faults.l") cfg.l = parse_int(val, key);
        else if (key == "faults.l1_alternation") cfg.l1_alternation = parse_bool(val, key);
        else if (key == "faults.trace_path") cfg.trace_path = val;
        else if (key == "faults.refresh_indicator") cfg.refresh_indicator = parse_bool(val, key);
        else if (key == "termination.epsilon0") cfg.eps0 = parse_double(val, key);
        else if (key == "termination.max_steps") cfg.max_steps = parse_int(val, key);
        else if (key == "spectrum.iterations") cfg.lanczos_iterations = parse_int(val, key);
        else throw ConfigError("config: unknown key " + key);
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    return parse_config(f);
}

}  // namespace ssc
