#pragma once

// Method-of-lines integration of the delayed equation
//   W dv/dt = -A v + lambda (B v - W2 v .* v(t - tau))
// with Crank-Nicolson on the diffusion block and second-order
// Adams-Bashforth on the (delayed) reaction.  dt = tau / K with integer K, so
// the delayed sample is always an on-grid ring-buffer slot.

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "rda/domain.hpp"
#include "rda/tridiag.hpp"

namespace rda {

enum class HistoryKind { SteadyPlusBump, ConstantField };

struct SimConfig {
    DiscreteProblem problem;
    Field steady;   // u_lambda on the grid
    Field phi;      // critical eigenfunction, defines the observable
    double lambda = 1.0;
    double tau = 0.0;
    double t_end = 0.0;
    int steps_per_delay = 40;  // K >= 20
    HistoryKind history = HistoryKind::SteadyPlusBump;
    double eps = 0.01;             // bump amplitude relative to the steady state
    double history_value = 0.0;    // ConstantField level
    int observe_every = 1;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> snapshots;
    std::vector<double> observable;  // <phi, v - u_lambda>
    bool negativity_warning = false;
    double min_value = 0.0;
};

inline Trajectory simulate(const SimConfig& cfg) {
    const DiscreteProblem& p = cfg.problem;
    const int n = p.n();
    if (cfg.tau < 0.0) throw config_error("simulate: tau must be nonnegative");
    if (cfg.tau > 0.0 && cfg.steps_per_delay < 20)
        throw config_error("simulate: need at least 20 steps per delay");
    if (!(cfg.t_end > 0.0)) throw config_error("simulate: t_end must be positive");
    if (cfg.observe_every < 1) throw config_error("simulate: observe_every must be >= 1");
    if (static_cast<int>(cfg.steady.size()) != n ||
        static_cast<int>(cfg.phi.size()) != n)
        throw config_error("simulate: field sizes do not match the grid");

    const bool delayed = cfg.tau > 0.0;
    const double dt = delayed ? cfg.tau / cfg.steps_per_delay : 0.1;
    const long steps = static_cast<long>(std::ceil(cfg.t_end / dt - 1e-9));

    // CN matrix (W + dt/2 A), factored once
    TriMat<double> cn;
    cn.lower = p.a_off;
    cn.upper = p.a_off;
    cn.diag.resize(n);
    for (double& v : cn.lower) v *= dt / 2.0;
    for (double& v : cn.upper) v *= dt / 2.0;
    for (int i = 0; i < n; ++i) cn.diag[i] = p.wE[i] + dt / 2.0 * p.a_diag[i];
    const TriLU<double> lu(std::move(cn));

    Field v(n);
    if (cfg.history == HistoryKind::SteadyPlusBump) {
        for (int i = 0; i < n; ++i)
            v[i] = cfg.steady[i] * (1.0 + cfg.eps * cfg.phi[i]);
    } else {
        v.assign(n, cfg.history_value);
    }

    const int K = cfg.steps_per_delay;
    std::vector<Field> ring;
    if (delayed) ring.assign(K + 1, v);  // constant-in-time history

    auto reaction = [&](const Field& vc, const Field& vd, Field& out) {
        for (int i = 0; i < n; ++i)
            out[i] = cfg.lambda * (p.wB[i] * vc[i] - p.wE2[i] * vc[i] * vd[i]);
    };

    Trajectory traj;
    const long n_obs = steps / cfg.observe_every + 1;
    traj.times.reserve(n_obs);
    traj.observable.reserve(n_obs);
    traj.snapshots.reserve(n_obs);

    auto observe = [&](long step) {
        double obs = 0.0;
        for (int i = 0; i < n; ++i)
            obs += p.w[i] * cfg.phi[i] * (v[i] - cfg.steady[i]);
        if (!std::isfinite(obs)) {
            std::ostringstream msg;
            msg << "simulate: field blew up near t = " << step * dt;
            throw convergence_error(msg.str());
        }
        traj.times.push_back(step * dt);
        traj.observable.push_back(obs);
        traj.snapshots.push_back(v);
    };

    double vmin = 0.0;
    double usup = max_abs(cfg.steady);
    Field r_prev(n), r_cur(n), rhs(n);
    observe(0);
    for (long s = 0; s < steps; ++s) {
        const Field& vd = delayed ? ring[static_cast<size_t>((s + 1) % (K + 1))] : v;
        reaction(v, vd, r_cur);
        Field av = p.apply_A(v);
        if (s == 0) {
            for (int i = 0; i < n; ++i)
                rhs[i] = p.wE[i] * v[i] - dt / 2.0 * av[i] + dt * r_cur[i];
        } else {
            for (int i = 0; i < n; ++i)
                rhs[i] = p.wE[i] * v[i] - dt / 2.0 * av[i] +
                         dt * (1.5 * r_cur[i] - 0.5 * r_prev[i]);
        }
        v = lu.solve(rhs);
        std::swap(r_prev, r_cur);
        if (delayed) ring[static_cast<size_t>((s + 1) % (K + 1))] = v;

        for (int i = 0; i < n; ++i) vmin = std::min(vmin, v[i]);
        if ((s + 1) % cfg.observe_every == 0) observe(s + 1);
    }
    traj.min_value = vmin;
    traj.negativity_warning = vmin < -1e-8 * std::max(1.0, usup);
    return traj;
}

enum class OscillationVerdict { Decay, SustainedOscillation, Growth, Inconclusive };

inline const char* to_string(OscillationVerdict v) {
    switch (v) {
        case OscillationVerdict::Decay: return "decay";
        case OscillationVerdict::SustainedOscillation: return "sustained";
        case OscillationVerdict::Growth: return "growth";
        default: return "inconclusive";
    }
}

struct OscillationReport {
    OscillationVerdict verdict = OscillationVerdict::Inconclusive;
    std::optional<double> measured_period;
    std::optional<double> decay_rate;  // slope of ln(peak amplitude) vs time
    double amplitude_tail = 0.0;
    int peak_count = 0;
    double period_dispersion = 0.0;
};

/// Classify the observable's second half by its positive peaks: ratio of
/// successive peak amplitudes within 2% of one over the last five peaks means
/// sustained oscillation, below 0.98 decay, persistently above 1.02 growth.
inline OscillationReport diagnose(const Trajectory& traj, double predicted_nu = 0.0) {
    (void)predicted_nu;  // prediction comparison happens at the call site
    const size_t total = traj.observable.size();
    if (total < 4) throw config_error("diagnose: trajectory too short");
    const double t_end = traj.times.back();
    size_t start = 0;
    while (start < total && traj.times[start] < t_end / 2.0) ++start;
    if (total - start < 100)
        throw config_error("diagnose: need at least 100 samples past t_end/2");

    OscillationReport rep;
    double initial = 0.0, tail = 0.0;
    const size_t head_end = std::max<size_t>(total / 10, 2);
    for (size_t i = 0; i < head_end; ++i)
        initial = std::max(initial, std::abs(traj.observable[i]));
    for (size_t i = total - std::max<size_t>(total / 10, 2); i < total; ++i)
        tail = std::max(tail, std::abs(traj.observable[i]));
    rep.amplitude_tail = tail;

    // positive strict local maxima with parabolic refinement
    std::vector<double> pk_t, pk_a;
    for (size_t i = std::max(start, size_t{1}); i + 1 < total; ++i) {
        const double ym = traj.observable[i - 1];
        const double y0 = traj.observable[i];
        const double yp = traj.observable[i + 1];
        if (y0 > ym && y0 >= yp && y0 > 0.0) {
            const double denom = ym - 2.0 * y0 + yp;
            double tpk = traj.times[i], apk = y0;
            if (denom < 0.0) {
                const double off = 0.5 * (ym - yp) / denom;
                const double dtloc = traj.times[i + 1] - traj.times[i];
                tpk += off * dtloc;
                apk = y0 - 0.25 * (ym - yp) * off;
            }
            pk_t.push_back(tpk);
            pk_a.push_back(apk);
        }
    }
    rep.peak_count = static_cast<int>(pk_t.size());

    if (pk_t.size() < 2) {
        rep.verdict = (initial == 0.0 || tail < 1e-6 * initial)
                          ? OscillationVerdict::Decay
                          : OscillationVerdict::Inconclusive;
        return rep;
    }

    double mean_gap = 0.0;
    for (size_t i = 1; i < pk_t.size(); ++i) mean_gap += pk_t[i] - pk_t[i - 1];
    mean_gap /= static_cast<double>(pk_t.size() - 1);
    rep.measured_period = mean_gap;
    double disp = 0.0;
    for (size_t i = 1; i < pk_t.size(); ++i)
        disp = std::max(disp, std::abs(pk_t[i] - pk_t[i - 1] - mean_gap));
    rep.period_dispersion = disp / mean_gap;

    // least-squares slope of ln(peak amplitude)
    {
        double st = 0, sy = 0, stt = 0, sty = 0;
        size_t m = 0;
        for (size_t i = 0; i < pk_t.size(); ++i) {
            if (!(pk_a[i] > 0.0)) continue;
            const double ly = std::log(pk_a[i]);
            st += pk_t[i];
            sy += ly;
            stt += pk_t[i] * pk_t[i];
            sty += pk_t[i] * ly;
            ++m;
        }
        if (m >= 2) {
            const double det = m * stt - st * st;
            if (det > 0.0) rep.decay_rate = (m * sty - st * sy) / det;
        }
    }

    // geometric amplitude ratio over the last five peaks
    const size_t nr = std::min<size_t>(5, pk_a.size());
    const double a_first = pk_a[pk_a.size() - nr];
    const double a_last = pk_a.back();
    const double ratio = (a_first > 0.0 && a_last > 0.0)
                             ? std::pow(a_last / a_first, 1.0 / (nr - 1))
                             : 0.0;
    bool all_growing = true;
    for (size_t i = pk_a.size() - nr + 1; i < pk_a.size(); ++i)
        if (!(pk_a[i] > pk_a[i - 1] * 1.0)) all_growing = false;

    if (pk_a.size() >= 5 && std::abs(ratio - 1.0) < 0.02 && rep.period_dispersion < 0.05)
        rep.verdict = OscillationVerdict::SustainedOscillation;
    else if (ratio < 0.98)
        rep.verdict = OscillationVerdict::Decay;
    else if (ratio > 1.02 && all_growing)
        rep.verdict = OscillationVerdict::Growth;
    else
        rep.verdict = OscillationVerdict::Inconclusive;
    return rep;
}

}  // namespace rda
