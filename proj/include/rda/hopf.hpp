#pragma once

// Characteristic system for purely imaginary eigenvalues of the linearized
// delay semigroup: solve for (nu, theta, psi) with the delay entering as
// e^{-i theta}, rebuild the delay ladder tau_n = (theta + 2 n pi)/nu, and
// evaluate the simplicity integral S_n and the crossing speed d mu / d tau.

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <vector>

#include "rda/domain.hpp"
#include "rda/eigen.hpp"
#include "rda/steady.hpp"
#include "rda/tridiag.hpp"

namespace rda {

inline CaseTag case_selector(const DiscreteProblem& p) {
    if (p.grid.bc == BoundaryCondition::Dirichlet) return CaseTag::Dirichlet;
    const double mass = weighted_mass(p);
    if (std::abs(mass) < kCaseSignTol)
        throw assumption_error(
            "case_selector: integral of m e^{am} is numerically zero; "
            "case sign is ambiguous");
    return mass < 0.0 ? CaseTag::NoFluxCaseI : CaseTag::NoFluxCaseII;
}

/// Flat limit state of the strong-advection no-flux case:
/// mbar = int m e^{am} / int e^{2am}.
inline double mbar(const DiscreteProblem& p) {
    if (case_selector(p) != CaseTag::NoFluxCaseII)
        throw case_error("mbar: defined only in no-flux case II");
    double num = 0.0, den = 0.0;
    for (int i = 0; i < p.n(); ++i) {
        num += p.wB[i];
        den += p.wE2[i];
    }
    return num / den;
}

/// Base-point frequency slope and phase: h = int m e^{am} phi^2 / int e^{am}
/// phi^2 (case II uses the flat mode), theta = pi/2.
inline std::pair<double, double> h_theta_star(const PrincipalPair& pair,
                                              const DiscreteProblem& p) {
    double num = 0.0, den = 0.0;
    if (pair.case_tag == CaseTag::NoFluxCaseII) {
        for (int i = 0; i < p.n(); ++i) {
            num += p.wB[i];
            den += p.wE[i];
        }
    } else {
        for (int i = 0; i < p.n(); ++i) {
            const double f = pair.phi[i];
            num += p.wB[i] * f * f;
            den += p.wE[i] * f * f;
        }
    }
    return {num / den, M_PI / 2.0};
}

struct CharTriplet {
    double nu = 0.0;       // crossing frequency, > 0
    double theta = 0.0;    // phase in [0, 2*pi)
    ComplexField psi;      // eigenfunction, plain-quadrature norm of phi_ref
    double h = 0.0;        // nu / (lambda - lambda_*)   (case II: nu / lambda)
    double r = 0.0;        // projection of psi on phi_ref, real and >= 0
    ComplexField z;        // (psi - r phi_ref) / gap, orthogonal to phi_ref
    double char_residual = 0.0;  // sup norm of the unscaled characteristic residual
    CaseTag case_tag = CaseTag::Dirichlet;
    double lambda = 0.0;
};

namespace detail {

/// Scaled characteristic operator applied to psi:
///   D psi = [-A + lambda(B - W2 diag(u)) - delayfac * lambda W2 diag(u) - mu W] psi.
inline ComplexField apply_char(const DiscreteProblem& p, const Field& u, double lambda,
                               Complex mu, Complex delayfac, const ComplexField& psi) {
    ComplexField y = p.apply_A(psi);
    for (int i = 0; i < p.n(); ++i) {
        const double uu = lambda * p.wE2[i] * u[i];
        y[i] = -y[i] + (lambda * p.wB[i] - uu) * psi[i] - delayfac * uu * psi[i] -
               mu * p.wE[i] * psi[i];
    }
    return y;
}

/// Complex tridiagonal of the same operator (for the E / F solves).
inline TriMat<Complex> char_matrix(const DiscreteProblem& p, const Field& u,
                                   double lambda, Complex mu, Complex delayfac) {
    const int n = p.n();
    TriMat<Complex> t;
    t.lower.assign(n - 1, Complex{});
    t.upper.assign(n - 1, Complex{});
    t.diag.assign(n, Complex{});
    for (int i = 0; i + 1 < n; ++i) t.lower[i] = t.upper[i] = -p.a_off[i];
    for (int i = 0; i < n; ++i) {
        const double uu = lambda * p.wE2[i] * u[i];
        t.diag[i] = -p.a_diag[i] + lambda * p.wB[i] - uu - delayfac * uu -
                    mu * p.wE[i];
    }
    return t;
}

}  // namespace detail

/// Newton solve of the characteristic system in the unknowns
/// (Re psi, Im psi, nu, theta) with the norm and phase constraints
///   sum w |psi|^2 = sum w phi_ref^2,   Im <phi_ref, psi> = 0.
inline CharTriplet char_triplet(const DiscreteProblem& p, const PrincipalPair& pair,
                                const SteadyState& state, double lambda) {
    const int n = p.n();
    const bool flat_case = pair.case_tag == CaseTag::NoFluxCaseII;
    const double gap = flat_case ? lambda : lambda - pair.lambda_star;
    if (!(gap > 0.0))
        throw config_error("char_triplet: lambda is outside the admissible range");

    Field phi_ref = pair.phi;
    if (flat_case) {
        const double mb = mbar(p);
        phi_ref.assign(n, mb);
    }
    double phi_norm2 = 0.0;
    for (int i = 0; i < n; ++i) phi_norm2 += p.w[i] * phi_ref[i] * phi_ref[i];

    const auto [h_base, theta_base] = h_theta_star(pair, p);

    // unknown vector: [Re psi | Im psi | nu | theta]
    const int nv = 2 * n + 2;
    ComplexField psi(phi_ref.begin(), phi_ref.end());
    double nu = gap * h_base;
    double theta = theta_base;

    double opscale = max_abs(p.a_diag);
    for (int i = 0; i < n; ++i)
        opscale = std::max(opscale, lambda * (std::abs(p.wB[i]) + 2.0 * p.wE2[i] * state.u[i]));
    opscale = std::max(opscale, 1.0);

    auto residual = [&](const ComplexField& ps, double nuv, double thv,
                        std::vector<double>& r) {
        const Complex delayfac = std::exp(Complex(0.0, -thv));
        const ComplexField d = detail::apply_char(p, state.u, lambda, Complex(0.0, nuv),
                                                  delayfac, ps);
        double norm2 = 0.0;
        Complex proj{};
        for (int i = 0; i < n; ++i) {
            norm2 += p.w[i] * std::norm(ps[i]);
            proj += p.w[i] * phi_ref[i] * ps[i];
        }
        r.assign(nv, 0.0);
        for (int i = 0; i < n; ++i) {
            r[i] = d[i].real();
            r[n + i] = d[i].imag();
        }
        r[2 * n] = norm2 - phi_norm2;
        r[2 * n + 1] = proj.imag();
    };

    std::vector<double> r;
    residual(psi, nu, theta, r);
    double rnorm = max_abs(r);
    std::ostringstream history;

    int it = 0;
    for (; it < 40; ++it) {
        if (rnorm <= 1e-12 * opscale) break;
        history << "  iter " << it << ": residual " << rnorm << "\n";

        // assemble the dense Jacobian
        std::vector<double> J(static_cast<size_t>(nv) * nv, 0.0);
        auto at = [&](int i, int j) -> double& { return J[static_cast<size_t>(i) * nv + j]; };
        const Complex delayfac = std::exp(Complex(0.0, -theta));
        for (int i = 0; i < n; ++i) {
            const double uu = lambda * p.wE2[i] * state.u[i];
            const Complex diag = -p.a_diag[i] + lambda * p.wB[i] - uu - delayfac * uu -
                                 Complex(0.0, nu) * p.wE[i];
            at(i, i) = diag.real();
            at(i, n + i) = -diag.imag();
            at(n + i, i) = diag.imag();
            at(n + i, n + i) = diag.real();
            if (i > 0) {
                at(i, i - 1) = at(n + i, n + i - 1) = -p.a_off[i - 1];
            }
            if (i + 1 < n) {
                at(i, i + 1) = at(n + i, n + i + 1) = -p.a_off[i];
            }
            // d/d nu: -i W psi
            const Complex dnu = Complex(0.0, -p.wE[i]) * psi[i];
            at(i, 2 * n) = dnu.real();
            at(n + i, 2 * n) = dnu.imag();
            // d/d theta: +i e^{-i theta} lambda W2 u psi
            const Complex dth = Complex(0.0, 1.0) * delayfac * uu * psi[i];
            at(i, 2 * n + 1) = dth.real();
            at(n + i, 2 * n + 1) = dth.imag();
            // norm row
            at(2 * n, i) = 2.0 * p.w[i] * psi[i].real();
            at(2 * n, n + i) = 2.0 * p.w[i] * psi[i].imag();
            // phase row
            at(2 * n + 1, n + i) = p.w[i] * phi_ref[i];
        }

        DenseLU lu(std::move(J), nv);
        std::vector<double> rhs(r);
        for (double& v : rhs) v = -v;
        const std::vector<double> step = lu.solve(std::move(rhs));

        double t = 1.0;
        ComplexField psi_t(n);
        double nu_t = nu, theta_t = theta, rnorm_t = rnorm;
        std::vector<double> r_t;
        while (t >= 1.0 / 1024.0) {
            for (int i = 0; i < n; ++i)
                psi_t[i] = psi[i] + t * Complex(step[i], step[n + i]);
            nu_t = nu + t * step[2 * n];
            theta_t = theta + t * step[2 * n + 1];
            residual(psi_t, nu_t, theta_t, r_t);
            rnorm_t = max_abs(r_t);
            if (rnorm_t < rnorm) break;
            t *= 0.5;
        }
        if (!(rnorm_t < rnorm)) break;  // stagnation at the attainable floor
        psi = psi_t;
        nu = nu_t;
        theta = theta_t;
        r = std::move(r_t);
        rnorm = rnorm_t;
    }
    if (rnorm > 1e-9 * opscale)
        throw convergence_error("char_triplet: Newton did not converge\n" + history.str());

    theta = std::fmod(theta, 2.0 * M_PI);
    if (theta < 0.0) theta += 2.0 * M_PI;
    if (!(nu > 0.0)) {
        std::ostringstream msg;
        msg << "char_triplet: converged frequency nu = " << nu
            << " is not positive; lambda is outside the validated regime";
        throw convergence_error(msg.str());
    }

    // orientation: projection on phi_ref must be positive
    Complex proj{};
    for (int i = 0; i < n; ++i) proj += p.w[i] * phi_ref[i] * psi[i];
    if (proj.real() < 0.0) {
        for (Complex& v : psi) v = -v;
        proj = -proj;
    }

    CharTriplet out;
    out.nu = nu;
    out.theta = theta;
    out.psi = std::move(psi);
    out.h = nu / gap;
    out.r = proj.real() / phi_norm2;
    out.z.resize(n);
    for (int i = 0; i < n; ++i)
        out.z[i] = (out.psi[i] - out.r * phi_ref[i]) / gap;
    out.case_tag = pair.case_tag;
    out.lambda = lambda;

    const Complex delayfac = std::exp(Complex(0.0, -theta));
    const ComplexField d = detail::apply_char(p, state.u, lambda, Complex(0.0, nu),
                                              delayfac, out.psi);
    double unscaled = 0.0;
    for (int i = 0; i < n; ++i) unscaled = std::max(unscaled, std::abs(d[i]) / p.wE[i]);
    out.char_residual = unscaled;
    return out;
}

struct HopfPoint {
    int n = 0;
    double tau_n = 0.0;
    Complex S{std::numeric_limits<double>::quiet_NaN(), 0.0};
    Complex dmu_dtau{std::numeric_limits<double>::quiet_NaN(), 0.0};
    CharTriplet triplet;
};

inline std::vector<HopfPoint> tau_ladder(const CharTriplet& triplet, int n_max) {
    std::vector<HopfPoint> ladder;
    ladder.reserve(n_max + 1);
    for (int k = 0; k <= n_max; ++k) {
        HopfPoint pt;
        pt.n = k;
        pt.tau_n = (triplet.theta + 2.0 * M_PI * k) / triplet.nu;
        pt.triplet = triplet;
        ladder.push_back(std::move(pt));
    }
    return ladder;
}

/// Simplicity integral
///   S_n = int e^{am} psi^2 - lambda tau_n e^{-i theta} int e^{2am} u psi^2
/// (bilinear in psi, no conjugation).
inline Complex s_n(const DiscreteProblem& p, const SteadyState& state,
                   const HopfPoint& point) {
    const CharTriplet& t = point.triplet;
    Complex first{}, second{};
    double scale = 0.0;
    for (int i = 0; i < p.n(); ++i) {
        const Complex ps2 = t.psi[i] * t.psi[i];
        first += p.wE[i] * ps2;
        second += p.wE2[i] * state.u[i] * ps2;
        scale += p.wE[i] * std::norm(t.psi[i]);
    }
    const Complex S =
        first - state.lambda * point.tau_n * std::exp(Complex(0.0, -t.theta)) * second;
    if (std::abs(S) < 1e-8 * scale)
        throw degeneracy_error("s_n: simplicity integral is numerically zero");
    return S;
}

/// Crossing speed of the critical eigenvalue pair at tau_n:
///   d mu / d tau = i nu lambda e^{-i theta} int e^{2am} u psi^2 / S_n.
inline Complex transversality(const DiscreteProblem& p, const SteadyState& state,
                              const HopfPoint& point) {
    if (std::isnan(point.S.real()))
        throw config_error("transversality: S_n has not been computed for this point");
    const CharTriplet& t = point.triplet;
    Complex second{};
    for (int i = 0; i < p.n(); ++i)
        second += p.wE2[i] * state.u[i] * t.psi[i] * t.psi[i];
    const Complex dmu = Complex(0.0, t.nu) * state.lambda *
                        std::exp(Complex(0.0, -t.theta)) * second / point.S;
    if (!(dmu.real() > 0.0)) {
        std::ostringstream msg;
        msg << "transversality: Re d mu/d tau = " << dmu.real()
            << " is not positive at n = " << point.n;
        throw transversality_error(msg.str());
    }
    return dmu;
}

struct StabilityVerdict {
    enum class Kind { Stable, Unstable, AtHopfPoint } kind = Kind::Stable;
    int unstable_count = 0;   // 2(n+1) inside (tau_n, tau_{n+1}]
    int boundary_index = -1;  // n when tau sits on tau_n

    std::string str() const {
        switch (kind) {
            case Kind::Stable: return "stable";
            case Kind::Unstable: {
                std::ostringstream os;
                os << "unstable(" << unstable_count << ")";
                return os.str();
            }
            default: {
                std::ostringstream os;
                os << "hopf_point(" << boundary_index << ")";
                return os.str();
            }
        }
    }
};

inline StabilityVerdict stability_verdict(double tau, const CharTriplet& triplet) {
    StabilityVerdict v;
    if (tau < 0.0) throw config_error("stability_verdict: tau must be nonnegative");
    const double period = 2.0 * M_PI / triplet.nu;
    const double tau0 = triplet.theta / triplet.nu;
    // nearest ladder rung
    const double pos = (tau - tau0) / period;
    const long nearest = std::lround(pos);
    if (nearest >= 0) {
        const double tau_near = tau0 + nearest * period;
        if (std::abs(tau - tau_near) <= 1e-12 * std::max(1.0, tau_near)) {
            v.kind = StabilityVerdict::Kind::AtHopfPoint;
            v.boundary_index = static_cast<int>(nearest);
            return v;
        }
    }
    if (tau < tau0) {
        v.kind = StabilityVerdict::Kind::Stable;
        return v;
    }
    const int crossings = static_cast<int>(std::floor(pos)) + 1;
    v.kind = StabilityVerdict::Kind::Unstable;
    v.unstable_count = 2 * crossings;
    return v;
}

inline StabilityVerdict stability_verdict(double lambda, double tau,
                                          const std::vector<HopfPoint>& ladder) {
    (void)lambda;
    if (ladder.empty())
        throw config_error("stability_verdict: empty ladder");
    return stability_verdict(tau, ladder.front().triplet);
}

}  // namespace rda
