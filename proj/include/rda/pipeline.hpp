#pragma once

// Command drivers shared by the CLI and the test suites: each run_* function
// executes one pipeline stage chain and persists deterministic CSV (and
// optional SVG) artifacts.

#include <atomic>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>
#include <vector>

#include "rda/config.hpp"
#include "rda/csv.hpp"
#include "rda/dde_sim.hpp"
#include "rda/domain.hpp"
#include "rda/eigen.hpp"
#include "rda/hopf.hpp"
#include "rda/normalform.hpp"
#include "rda/steady.hpp"
#include "rda/svg.hpp"

namespace rda {

struct RunOptions {
    std::string out_dir = "out";
    bool plot = false;
    int threads = 1;
    bool verbose = false;
};

namespace detail {
inline std::string out_path(const RunOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    return (std::filesystem::path(opt.out_dir) / name).string();
}
}  // namespace detail

// ---------------------------------------------------------------- eigen ----

struct EigenResult {
    PrincipalPair pair;
    double lambda_2 = 0.0;
};

inline EigenResult run_eigen(const RunConfig& cfg, const RunOptions& opt) {
    const DiscreteProblem p = build_problem(cfg);
    EigenResult r;
    r.pair = principal_eigenpair(p);
    r.lambda_2 = second_eigenvalue(p, r.pair);
    CsvWriter csv(detail::out_path(opt, "eigen.csv"),
                  {"lambda_star", "lambda_2", "rayleigh_residual"});
    csv.row().num(r.pair.lambda_star).num(r.lambda_2).num(r.pair.rayleigh_residual);
    if (opt.verbose)
        std::cout << "eigen: lambda_star = " << r.pair.lambda_star
                  << ", lambda_2 = " << r.lambda_2 << ", case "
                  << to_string(r.pair.case_tag) << "\n";
    return r;
}

// --------------------------------------------------------------- steady ----

struct SteadyResult {
    PrincipalPair pair;
    SteadyState state;
};

inline SteadyResult run_steady(const RunConfig& cfg, const RunOptions& opt) {
    const DiscreteProblem p = build_problem(cfg);
    SteadyResult r;
    r.pair = principal_eigenpair(p);
    r.state = steady_state(p, r.pair, cfg.params.lambda);
    CsvWriter csv(detail::out_path(opt, "steady.csv"),
                  {"lambda", "beta", "expansion_error", "newton_iters", "residual"});
    csv.row()
        .num(r.state.lambda)
        .num(r.state.beta)
        .num(r.state.expansion_error)
        .integer(r.state.newton_iters)
        .num(r.state.newton_residual);
    if (opt.verbose)
        std::cout << "steady: " << r.state.newton_iters
                  << " Newton iterations, residual " << r.state.newton_residual << "\n";
    return r;
}

// ----------------------------------------------------------------- hopf ----

struct HopfResult {
    PrincipalPair pair;
    SteadyState state;
    CharTriplet triplet;
    std::vector<HopfPoint> ladder;
    StabilityVerdict verdict;
};

/// Core chain eigen -> steady -> characteristic triplet -> ladder, with S_n
/// and the crossing speed filled on every rung.
inline HopfResult compute_hopf(const DiscreteProblem& p, double lambda, double tau,
                               int n_max) {
    HopfResult r;
    r.pair = principal_eigenpair(p);
    r.state = steady_state(p, r.pair, lambda);
    r.triplet = char_triplet(p, r.pair, r.state, lambda);
    r.ladder = tau_ladder(r.triplet, n_max);
    for (HopfPoint& pt : r.ladder) {
        pt.S = s_n(p, r.state, pt);
        pt.dmu_dtau = transversality(p, r.state, pt);
    }
    r.verdict = stability_verdict(tau, r.triplet);
    return r;
}

inline HopfResult run_hopf(const RunConfig& cfg, const RunOptions& opt) {
    const DiscreteProblem p = build_problem(cfg);
    HopfResult r = compute_hopf(p, cfg.params.lambda, cfg.params.tau, cfg.n_max);
    CsvWriter csv(detail::out_path(opt, "hopf.csv"),
                  {"lambda", "nu", "theta", "h", "n", "tau_n", "Re_S_n", "Im_S_n",
                   "Re_dmu", "Im_dmu", "verdict_at_tau"});
    for (const HopfPoint& pt : r.ladder)
        csv.row()
            .num(cfg.params.lambda)
            .num(r.triplet.nu)
            .num(r.triplet.theta)
            .num(r.triplet.h)
            .integer(pt.n)
            .num(pt.tau_n)
            .num(pt.S.real())
            .num(pt.S.imag())
            .num(pt.dmu_dtau.real())
            .num(pt.dmu_dtau.imag())
            .text(r.verdict.str());
    if (opt.verbose)
        std::cout << "hopf: nu = " << r.triplet.nu << ", theta = " << r.triplet.theta
                  << ", tau_0 = " << r.ladder.front().tau_n << ", verdict at tau "
                  << cfg.params.tau << ": " << r.verdict.str() << "\n";
    return r;
}

// ---------------------------------------------------------- normal form ----

struct NormalFormRun {
    HopfResult hopf;
    std::vector<NormalFormResult> per_n;
};

inline NormalFormRun run_normal_form(const RunConfig& cfg, const RunOptions& opt) {
    const DiscreteProblem p = build_problem(cfg);
    NormalFormRun r;
    r.hopf = compute_hopf(p, cfg.params.lambda, cfg.params.tau, cfg.n_max);
    CsvWriter csv(detail::out_path(opt, "normalform.csv"),
                  {"lambda", "n", "Re_g20", "Im_g20", "Re_g11", "Im_g11", "Re_g02",
                   "Im_g02", "Re_g21", "Im_g21", "Re_C1", "Im_C1", "direction",
                   "stability"});
    for (const HopfPoint& pt : r.hopf.ladder) {
        NormalFormResult nf = normal_form(p, r.hopf.state, pt);
        csv.row()
            .num(cfg.params.lambda)
            .integer(pt.n)
            .num(nf.g20.real())
            .num(nf.g20.imag())
            .num(nf.g11.real())
            .num(nf.g11.imag())
            .num(nf.g02.real())
            .num(nf.g02.imag())
            .num(nf.g21.real())
            .num(nf.g21.imag())
            .num(nf.C1.real())
            .num(nf.C1.imag())
            .text(nf.forward ? "forward" : "backward")
            .text(nf.orbit_stable ? "stable" : "unstable");
        r.per_n.push_back(std::move(nf));
    }
    if (opt.verbose && !r.per_n.empty())
        std::cout << "normal-form: Re C1 = " << r.per_n.front().C1.real() << " ("
                  << (r.per_n.front().forward ? "forward" : "backward") << ", orbit "
                  << (r.per_n.front().orbit_stable ? "stable" : "unstable") << ")\n";
    return r;
}

// ------------------------------------------------------------- simulate ----

struct SimulateResult {
    Trajectory trajectory;
    OscillationReport report;
    std::optional<double> predicted_nu;
};

inline SimulateResult run_simulate(const RunConfig& cfg, const RunOptions& opt) {
    const DiscreteProblem p = build_problem(cfg);
    const PrincipalPair pair = principal_eigenpair(p);
    const SteadyState state = steady_state(p, pair, cfg.params.lambda);

    SimConfig sim;
    sim.problem = p;
    sim.steady = state.u;
    sim.phi = pair.phi;
    sim.lambda = cfg.params.lambda;
    sim.tau = cfg.params.tau;
    sim.t_end = cfg.t_end > 0.0 ? cfg.t_end : 60.0 * std::max(cfg.params.tau, 1.0);
    sim.steps_per_delay = cfg.steps_per_delay;
    sim.history = cfg.history == RunConfig::HistoryKindTag::Bump
                      ? HistoryKind::SteadyPlusBump
                      : HistoryKind::ConstantField;
    sim.eps = cfg.eps;
    sim.history_value = cfg.history_value;
    sim.observe_every = cfg.observe_every;

    SimulateResult r;
    r.trajectory = simulate(sim);
    r.report = diagnose(r.trajectory);
    try {
        const CharTriplet t = char_triplet(p, pair, state, cfg.params.lambda);
        r.predicted_nu = t.nu;
    } catch (const error&) {
        // outside the crossing regime; the simulation stands on its own
    }

    {
        CsvWriter csv(detail::out_path(opt, "sim.csv"), {"t", "observable"});
        for (size_t i = 0; i < r.trajectory.times.size(); ++i)
            csv.row().num(r.trajectory.times[i]).num(r.trajectory.observable[i]);
    }
    {
        CsvWriter csv(detail::out_path(opt, "snapshots.csv"), {"t", "x", "v"});
        const size_t count = r.trajectory.snapshots.size();
        size_t stride = cfg.snapshot_stride > 0
                            ? static_cast<size_t>(cfg.snapshot_stride)
                            : std::max<size_t>(1, count / 64);
        for (size_t s = 0; s < count; s += stride)
            for (int i = 0; i < p.n(); ++i)
                csv.row()
                    .num(r.trajectory.times[s])
                    .num(p.x[i])
                    .num(r.trajectory.snapshots[s][i]);
    }
    if (opt.plot) {
        LineSeries s;
        s.label = "observable";
        s.x = r.trajectory.times;
        s.y = r.trajectory.observable;
        write_line_plot(detail::out_path(opt, "observable.svg"),
                        "projection on the critical mode", "t", "<phi, v - u>", {s});
    }
    std::cout << "simulate: verdict " << to_string(r.report.verdict);
    if (r.report.measured_period)
        std::cout << ", period " << *r.report.measured_period;
    if (r.predicted_nu)
        std::cout << " (predicted " << 2.0 * M_PI / *r.predicted_nu << ")";
    std::cout << "\n";
    return r;
}

// ---------------------------------------------------------------- sweep ----

struct SweepRow {
    double lambda = 0.0;
    bool ok = false;
    std::string error;
    double nu = 0.0, theta = 0.0, h = 0.0;
    std::vector<double> tau;  // n = 0..n_max
    Complex dmu;
    Complex C1;
    bool forward = false, orbit_stable = false;
};

inline std::vector<SweepRow> run_sweep(const RunConfig& cfg, const RunOptions& opt) {
    if (cfg.sweep_count < 2 || !(cfg.sweep_max > cfg.sweep_min))
        throw config_error("sweep: need sweep.lambda_min < sweep.lambda_max and "
                           "sweep.count >= 2");
    const DiscreteProblem p = build_problem(cfg);

    std::vector<SweepRow> rows(cfg.sweep_count);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= cfg.sweep_count) return;
            SweepRow& row = rows[k];
            row.lambda = cfg.sweep_min + (cfg.sweep_max - cfg.sweep_min) * k /
                                             (cfg.sweep_count - 1);
            try {
                HopfResult h = compute_hopf(p, row.lambda, cfg.params.tau, cfg.n_max);
                row.nu = h.triplet.nu;
                row.theta = h.triplet.theta;
                row.h = h.triplet.h;
                for (const HopfPoint& pt : h.ladder) row.tau.push_back(pt.tau_n);
                row.dmu = h.ladder.front().dmu_dtau;
                const NormalFormResult nf = normal_form(p, h.state, h.ladder.front());
                row.C1 = nf.C1;
                row.forward = nf.forward;
                row.orbit_stable = nf.orbit_stable;
                row.ok = true;
            } catch (const error& e) {
                row.error = e.what();
            }
        }
    };
    const int nthreads = std::max(1, opt.threads);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<std::string> cols = {"lambda", "nu", "theta", "h"};
    for (int k = 0; k <= cfg.n_max; ++k) cols.push_back("tau_" + std::to_string(k));
    for (const char* c : {"Re_dmu", "Im_dmu", "Re_C1", "Im_C1", "direction",
                          "stability"})
        cols.push_back(c);
    CsvWriter csv(detail::out_path(opt, "sweep.csv"), cols);
    int written = 0;
    for (const SweepRow& row : rows) {
        if (!row.ok) {
            if (opt.verbose)
                std::cerr << "sweep: lambda = " << row.lambda << " skipped: "
                          << row.error << "\n";
            continue;
        }
        auto rb = csv.row();
        rb.num(row.lambda).num(row.nu).num(row.theta).num(row.h);
        for (double t : row.tau) rb.num(t);
        rb.num(row.dmu.real())
            .num(row.dmu.imag())
            .num(row.C1.real())
            .num(row.C1.imag())
            .text(row.forward ? "forward" : "backward")
            .text(row.orbit_stable ? "stable" : "unstable");
        ++written;
    }
    if (written == 0) throw convergence_error("sweep: no lambda point converged");

    if (opt.plot) {
        std::vector<LineSeries> tau_series(cfg.n_max + 1);
        LineSeries c1;
        c1.label = "Re C1";
        for (const SweepRow& row : rows) {
            if (!row.ok) continue;
            for (int k = 0; k <= cfg.n_max; ++k) {
                tau_series[k].label = "tau_" + std::to_string(k);
                tau_series[k].x.push_back(row.lambda);
                tau_series[k].y.push_back(row.tau[k]);
            }
            c1.x.push_back(row.lambda);
            c1.y.push_back(row.C1.real());
        }
        write_line_plot(detail::out_path(opt, "tau_ladder.svg"), "delay ladder",
                        "lambda", "tau_n", tau_series);
        write_line_plot(detail::out_path(opt, "c1.svg"), "first Lyapunov quantity",
                        "lambda", "Re C1", {c1});
    }
    return rows;
}

// ------------------------------------------------------------- validate ----

struct ValidateCheck {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
};

namespace detail {

inline RunConfig hutchinson_config() {
    RunConfig cfg;
    cfg.params = {1.0, 0.0, 0.0};
    cfg.length = M_PI;
    cfg.n_cells = 128;
    cfg.bc = BoundaryCondition::NoFlux;
    cfg.profile = Profile::constant(1.0);
    return cfg;
}

inline RunConfig dirichlet_const_config(int n_cells = 400) {
    RunConfig cfg;
    cfg.params = {1.02, 0.0, 0.0};
    cfg.length = M_PI;
    cfg.n_cells = n_cells;
    cfg.bc = BoundaryCondition::Dirichlet;
    cfg.profile = Profile::constant(1.0);
    return cfg;
}

}  // namespace detail

/// Built-in cross-check suite: twelve checks pinning the analytically forced
/// reductions and one prediction-vs-simulation round trip.  Deterministic;
/// returns false when any check fails.
inline bool run_validate(const RunOptions& opt,
                         std::vector<ValidateCheck>* out_checks = nullptr) {
    std::vector<ValidateCheck> checks;
    auto add = [&](const std::string& name, double measured, double bound) {
        checks.push_back({name, measured <= bound, measured, bound});
    };

    // Hutchinson reduction: flat no-flux logistic problem at lambda = 1
    {
        const RunConfig cfg = detail::hutchinson_config();
        const DiscreteProblem p = build_problem(cfg);
        add("noflux_kernel_exact", max_abs(p.apply_A(Field(p.n(), 1.0))), 0.0);
        const HopfResult h = compute_hopf(p, 1.0, 0.0, 1);
        add("hutchinson_nu", std::abs(h.triplet.nu - 1.0), 1e-8);
        add("hutchinson_theta", std::abs(h.triplet.theta - M_PI / 2), 1e-8);
        add("hutchinson_tau0", std::abs(h.ladder[0].tau_n - M_PI / 2), 1e-8);
        const Complex s_exact = M_PI * Complex(1.0, M_PI / 2);
        add("hutchinson_S0", std::abs(h.ladder[0].S - s_exact),
            1e-10 * std::abs(s_exact));
        add("hutchinson_transversality",
            std::abs(h.ladder[0].dmu_dtau.real() - 1.0 / (1.0 + M_PI * M_PI / 4)),
            1e-6);
    }

    // Constant-coefficient Dirichlet problem
    {
        const RunConfig cfg = detail::dirichlet_const_config();
        const DiscreteProblem p = build_problem(cfg);
        const PrincipalPair pair = principal_eigenpair(p);
        add("dirichlet_lambda_star", std::abs(pair.lambda_star - 1.0), 1e-4);
        add("dirichlet_rayleigh_identity", rayleigh_identity_residual(p, pair), 1e-10);
        add("dirichlet_beta_star", std::abs(beta_star(pair, p) - 3.0 * M_PI / 8),
            1e-4);
        add("dirichlet_h_star", std::abs(h_theta_star(pair, p).first - 1.0), 1e-6);
        const SteadyState st = steady_state(p, pair, pair.lambda_star + 0.02);
        const CharTriplet t = char_triplet(p, pair, st, pair.lambda_star + 0.02);
        // frequency identity: nu <psi,psi>_1 = lambda sin(theta) <psi, e^{2am} u psi>
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < p.n(); ++i) {
            lhs += t.nu * p.wE[i] * std::norm(t.psi[i]);
            rhs += st.lambda * std::sin(t.theta) * p.wE2[i] * st.u[i] *
                   std::norm(t.psi[i]);
        }
        add("frequency_identity", std::abs(lhs - rhs), 1e-8);
    }

    // Prediction vs simulation on the Hutchinson problem
    {
        RunConfig cfg = detail::hutchinson_config();
        const DiscreteProblem p = build_problem(cfg);
        const PrincipalPair pair = principal_eigenpair(p);
        const SteadyState st = steady_state(p, pair, 1.0);
        SimConfig sim;
        sim.problem = p;
        sim.steady = st.u;
        sim.phi = pair.phi;
        sim.lambda = 1.0;
        sim.steps_per_delay = 24;
        sim.eps = 0.05;
        sim.tau = 1.0;  // below the first crossing at pi/2
        sim.t_end = 60.0;
        const OscillationReport below = diagnose(simulate(sim));
        sim.tau = 2.0;  // above it
        sim.t_end = 120.0;
        const OscillationReport above = diagnose(simulate(sim));
        const bool ok = below.verdict == OscillationVerdict::Decay &&
                        above.verdict == OscillationVerdict::SustainedOscillation;
        add("prediction_vs_simulation", ok ? 0.0 : 1.0, 0.5);
    }

    CsvWriter csv(detail::out_path(opt, "validate.csv"),
                  {"check", "status", "measured", "bound"});
    bool all = true;
    for (const ValidateCheck& c : checks) {
        csv.row()
            .text(c.name)
            .text(c.pass ? "PASS" : "FAIL")
            .num(c.measured)
            .num(c.bound);
        std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  (measured "
                  << c.measured << ", bound " << c.bound << ")\n";
        all = all && c.pass;
    }
    std::cout << (all ? "validate: all checks passed\n"
                      : "validate: some checks FAILED\n");
    if (out_checks) *out_checks = std::move(checks);
    return all;
}

}  // namespace rda
