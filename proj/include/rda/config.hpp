#pragma once

// Flat key-value run configuration: one `section.key = value` assignment per
// line, '#' comments.  Raw parameters (d, a, r) are converted to the working
// triple (lambda, alpha, tau) on load.

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rda/domain.hpp"
#include "rda/errors.hpp"

namespace rda {

struct RunConfig {
    enum class HistoryKindTag { Bump, Constant };

    TransformedParams params;
    bool from_raw = false;

    double length = M_PI;
    int n_cells = 200;
    BoundaryCondition bc = BoundaryCondition::Dirichlet;
    Profile profile = Profile::constant(1.0);

    int n_max = 2;

    double t_end = 0.0;  // 0: use 60 tau
    int steps_per_delay = 40;
    int observe_every = 1;
    HistoryKindTag history = HistoryKindTag::Bump;
    double eps = 0.01;
    double history_value = 1.0;
    int snapshot_stride = 0;  // 0: auto, at most ~64 snapshot rows

    double sweep_min = 0.0, sweep_max = 0.0;
    int sweep_count = 0;

    std::string out_dir = "out";
};

namespace detail {

struct KvFile {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) != 0; }

    const std::string& raw(const std::string& key) const {
        auto it = kv.find(key);
        if (it == kv.end()) throw config_error("config: missing key '" + key + "'");
        return it->second;
    }

    double number(const std::string& key) const {
        const std::string& s = raw(key);
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw config_error("config: key '" + key + "' is not a number: " + s);
        return v;
    }
    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
    long integer(const std::string& key) const {
        const std::string& s = raw(key);
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0')
            throw config_error("config: key '" + key + "' is not an integer: " + s);
        return v;
    }
    long integer_or(const std::string& key, long fallback) const {
        return has(key) ? integer(key) : fallback;
    }
    std::string text_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? raw(key) : fallback;
    }
    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(raw(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            char* end = nullptr;
            const double v = std::strtod(item.c_str(), &end);
            if (end == item.c_str())
                throw config_error("config: key '" + key + "' has a bad list entry: " + item);
            out.push_back(v);
        }
        return out;
    }
};

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

inline KvFile parse_kv(std::istream& in) {
    KvFile f;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << "config: line " << lineno << " is not a key = value assignment";
            throw config_error(msg.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            std::ostringstream msg;
            msg << "config: line " << lineno << " has an empty key or value";
            throw config_error(msg.str());
        }
        f.kv[key] = value;
    }
    return f;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
    detail::KvFile f = detail::parse_kv(in);
    RunConfig cfg;

    const std::string kind = f.text_or("model.kind", "transformed");
    const bool raw_keys = f.has("model.d") || f.has("model.a") || f.has("model.r");
    const bool trans_keys =
        f.has("model.lambda") || f.has("model.alpha") || f.has("model.tau");
    if (kind == "raw") {
        if (trans_keys)
            throw config_error("config: raw model must not set model.lambda/alpha/tau");
        RawParams rp;
        rp.d = f.number("model.d");
        rp.a = f.number_or("model.a", 0.0);
        rp.r = f.number_or("model.r", 0.0);
        cfg.params = transform_parameters(rp);
        cfg.from_raw = true;
    } else if (kind == "transformed") {
        if (raw_keys)
            throw config_error("config: transformed model must not set model.d/a/r");
        cfg.params.lambda = f.number("model.lambda");
        cfg.params.alpha = f.number_or("model.alpha", 0.0);
        cfg.params.tau = f.number_or("model.tau", 0.0);
    } else {
        throw config_error("config: model.kind must be 'raw' or 'transformed'");
    }
    if (cfg.params.tau < 0.0) throw config_error("config: tau must be nonnegative");

    cfg.length = f.number_or("domain.length", M_PI);
    cfg.n_cells = static_cast<int>(f.integer_or("domain.n_cells", 200));
    const std::string bc = f.text_or("domain.bc", "dirichlet");
    if (bc == "dirichlet")
        cfg.bc = BoundaryCondition::Dirichlet;
    else if (bc == "noflux")
        cfg.bc = BoundaryCondition::NoFlux;
    else
        throw config_error("config: domain.bc must be 'dirichlet' or 'noflux'");

    const std::string pk = f.text_or("profile.kind", "constant");
    if (pk == "constant") {
        cfg.profile = Profile::constant(f.number_or("profile.c", 1.0));
    } else if (pk == "cosine") {
        cfg.profile = Profile::cosine(f.number_or("profile.a0", 0.0),
                                      f.number_or("profile.a1", 1.0),
                                      f.number_or("profile.k", 1.0));
    } else if (pk == "sine") {
        cfg.profile = Profile::sine(f.number_or("profile.a0", 0.0),
                                    f.number_or("profile.a1", 1.0),
                                    f.number_or("profile.k", 1.0));
    } else if (pk == "tabulated") {
        cfg.profile = Profile::tabulated(f.numbers("profile.values"));
        if (static_cast<int>(cfg.profile.values.size()) != cfg.n_cells + 1)
            throw config_error("config: profile.values needs n_cells + 1 entries");
    } else {
        throw config_error("config: unknown profile.kind '" + pk + "'");
    }

    cfg.n_max = static_cast<int>(f.integer_or("hopf.n_max", 2));
    if (cfg.n_max < 0) throw config_error("config: hopf.n_max must be >= 0");

    cfg.t_end = f.number_or("sim.t_end", 0.0);
    cfg.steps_per_delay = static_cast<int>(f.integer_or("sim.steps_per_delay", 40));
    cfg.observe_every = static_cast<int>(f.integer_or("sim.observe_every", 1));
    const std::string hist = f.text_or("sim.history", "bump");
    if (hist == "bump")
        cfg.history = RunConfig::HistoryKindTag::Bump;
    else if (hist == "constant")
        cfg.history = RunConfig::HistoryKindTag::Constant;
    else
        throw config_error("config: sim.history must be 'bump' or 'constant'");
    cfg.eps = f.number_or("sim.eps", 0.01);
    cfg.history_value = f.number_or("sim.history_value", 1.0);
    cfg.snapshot_stride = static_cast<int>(f.integer_or("sim.snapshot_stride", 0));

    cfg.sweep_min = f.number_or("sweep.lambda_min", 0.0);
    cfg.sweep_max = f.number_or("sweep.lambda_max", 0.0);
    cfg.sweep_count = static_cast<int>(f.integer_or("sweep.count", 0));

    cfg.out_dir = f.text_or("output.dir", "out");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open file: " + path);
    return parse_config(in);
}

inline DiscreteProblem build_problem(const RunConfig& cfg) {
    const Grid g = make_grid(cfg.length, cfg.n_cells, cfg.bc);
    return assemble(g, cfg.profile, cfg.params.alpha);
}

}  // namespace rda
