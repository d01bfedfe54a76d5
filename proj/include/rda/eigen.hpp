#pragma once

// Principal eigenpair of the indefinite-weight problem  A v = lambda B v,
// found as the first positive root of kappa(lambda), the smallest eigenvalue
// of the symmetric pencil (A - lambda B, W).  kappa is concave in lambda
// (pointwise minimum of affine Rayleigh quotients), so the positive root is
// unique and bracketable by doubling.

#include <cmath>
#include <sstream>
#include <vector>

#include "rda/domain.hpp"
#include "rda/tridiag.hpp"

namespace rda {

struct PrincipalPair {
    double lambda_star = 0.0;
    Field phi;  // strictly positive, sup-norm one
    double rayleigh_residual = 0.0;
    CaseTag case_tag = CaseTag::Dirichlet;
};

namespace detail {

// Symmetric standard form W^{-1/2} (A - lambda B) W^{-1/2}.
struct SymTri {
    std::vector<double> d, e;
};

inline SymTri pencil_tridiag(const DiscreteProblem& p, double lambda) {
    const int n = p.n();
    SymTri t;
    t.d.resize(n);
    t.e.resize(n - 1);
    for (int i = 0; i < n; ++i)
        t.d[i] = (p.a_diag[i] - lambda * p.wB[i]) / p.wE[i];
    for (int i = 0; i + 1 < n; ++i)
        t.e[i] = p.a_off[i] / std::sqrt(p.wE[i] * p.wE[i + 1]);
    return t;
}

inline int sturm_count(const SymTri& t, double sigma) {
    const int n = static_cast<int>(t.d.size());
    double emax = 1.0;
    for (double v : t.e) emax = std::max(emax, std::abs(v));
    const double pivmin = 1e-280 * emax * emax;
    int count = 0;
    double q = t.d[0] - sigma;
    if (q < 0.0) ++count;
    for (int i = 1; i < n; ++i) {
        if (std::abs(q) < pivmin) q = q < 0.0 ? -pivmin : pivmin;
        q = t.d[i] - sigma - t.e[i - 1] * t.e[i - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

/// k-th smallest eigenvalue (0-based) by bisection on the Sturm count.
inline double tridiag_eigenvalue(const SymTri& t, int k) {
    const int n = static_cast<int>(t.d.size());
    double lo = t.d[0], hi = t.d[0];
    for (int i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(t.e[i - 1]) : 0.0) +
                         (i + 1 < n ? std::abs(t.e[i]) : 0.0);
        lo = std::min(lo, t.d[i] - r);
        hi = std::max(hi, t.d[i] + r);
    }
    const double span = hi - lo + 1.0;
    lo -= 1e-12 * span;
    hi += 1e-12 * span;
    for (int it = 0; it < 120 && hi - lo > 1e-15 * std::max({std::abs(lo), std::abs(hi), 1.0}); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(t, mid) >= k + 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

inline double kappa(const DiscreteProblem& p, double lambda) {
    return tridiag_eigenvalue(pencil_tridiag(p, lambda), 0);
}

/// Eigenvector of the tridiagonal for the eigenvalue nearest sigma, by
/// inverse iteration; returned with positive orientation.
inline std::vector<double> tridiag_eigenvector(const SymTri& t, double sigma) {
    const int n = static_cast<int>(t.d.size());
    TriMat<double> shifted;
    shifted.diag = t.d;
    for (double& v : shifted.diag) v -= sigma;
    shifted.lower = t.e;
    shifted.upper = t.e;
    TriLU<double> lu(std::move(shifted));
    std::vector<double> y(n, 1.0);
    for (int it = 0; it < 4; ++it) {
        y = lu.solve(std::move(y));
        double scale = max_abs(y);
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw convergence_error("inverse iteration produced a degenerate vector");
        for (double& v : y) v /= scale;
    }
    // orient by the largest component
    double best = 0.0;
    for (double v : y)
        if (std::abs(v) > std::abs(best)) best = v;
    if (best < 0.0)
        for (double& v : y) v = -v;
    return y;
}

}  // namespace detail

/// Threshold below which the no-flux case sign is treated as ambiguous.
inline constexpr double kCaseSignTol = 1e-10;

inline PrincipalPair principal_eigenpair(const DiscreteProblem& p) {
    const int n = p.n();
    PrincipalPair out;

    if (p.grid.bc == BoundaryCondition::NoFlux) {
        const double mass = weighted_mass(p);
        if (std::abs(mass) < kCaseSignTol)
            throw assumption_error(
                "principal_eigenpair: integral of m e^{am} is numerically zero; "
                "the no-flux case sign is ambiguous");
        if (mass > 0.0) {
            // strong-advection case: zero principal eigenvalue, flat mode
            out.lambda_star = 0.0;
            out.phi.assign(n, 1.0);
            out.rayleigh_residual = 0.0;
            out.case_tag = CaseTag::NoFluxCaseII;
            return out;
        }
        out.case_tag = CaseTag::NoFluxCaseI;
    } else {
        out.case_tag = CaseTag::Dirichlet;
    }

    // Bracket the positive root of kappa.
    auto trace = [](std::ostringstream& os, double l, double k) {
        os << "  kappa(" << l << ") = " << k << "\n";
    };
    std::ostringstream diag;
    double lo = 0.0, klo;
    if (out.case_tag == CaseTag::Dirichlet) {
        klo = detail::kappa(p, 0.0);
        trace(diag, 0.0, klo);
        if (!(klo > 0.0))
            throw bracket_error("principal_eigenpair: kappa(0) <= 0 for Dirichlet\n" +
                                diag.str());
    } else {
        // kappa(0) = 0 with the flat kernel mode; walk down until positive.
        lo = 1.0;
        klo = detail::kappa(p, lo);
        trace(diag, lo, klo);
        int halvings = 0;
        while (!(klo > 0.0) && halvings++ < 80) {
            lo *= 0.5;
            klo = detail::kappa(p, lo);
            trace(diag, lo, klo);
        }
        if (!(klo > 0.0))
            throw bracket_error(
                "principal_eigenpair: no positive kappa sample found below lambda=1\n" +
                diag.str());
    }
    double hi = std::max(1.0, 2.0 * lo), khi = detail::kappa(p, hi);
    trace(diag, hi, khi);
    while (khi >= 0.0) {
        if (hi > 1048576.0)
            throw bracket_error(
                "principal_eigenpair: kappa never changed sign while doubling lambda\n" +
                diag.str());
        lo = hi;
        klo = khi;
        hi *= 2.0;
        khi = detail::kappa(p, hi);
        trace(diag, hi, khi);
    }

    // Bisection, then guarded secant.
    for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double km = detail::kappa(p, mid);
        if (km > 0.0) {
            lo = mid;
            klo = km;
        } else {
            hi = mid;
            khi = km;
        }
    }
    while (hi - lo > 4e-16 * hi) {
        double cand = lo + klo * (hi - lo) / (klo - khi);  // secant
        const double safety = 1e-3 * (hi - lo);
        if (!(cand > lo + safety) || !(cand < hi - safety)) cand = 0.5 * (lo + hi);
        const double kc = detail::kappa(p, cand);
        if (kc > 0.0) {
            lo = cand;
            klo = kc;
        } else {
            hi = cand;
            khi = kc;
        }
    }
    double lambda = 0.5 * (lo + hi);

    // Eigenvector at the root, then a Rayleigh polish of the eigenvalue.
    detail::SymTri t = detail::pencil_tridiag(p, lambda);
    const double kmin = detail::tridiag_eigenvalue(t, 0);
    std::vector<double> y = detail::tridiag_eigenvector(t, kmin);
    Field phi(n);
    for (int i = 0; i < n; ++i) phi[i] = y[i] / std::sqrt(p.wE[i]);
    const double sup = max_abs(phi);
    for (double& v : phi) v /= sup;
    for (double v : phi)
        if (!(v > 0.0))
            throw positivity_error("principal_eigenpair: eigenfunction is not strictly positive");

    const std::vector<double> Aphi = p.apply_A(phi);
    double pAp = 0.0, pBp = 0.0;
    for (int i = 0; i < n; ++i) {
        pAp += phi[i] * Aphi[i];
        pBp += phi[i] * p.wB[i] * phi[i];
    }
    if (pBp > 0.0) lambda = pAp / pBp;

    out.lambda_star = lambda;
    out.phi = std::move(phi);
    out.rayleigh_residual = std::abs(pAp - lambda * pBp) / pAp;
    return out;
}

/// Second eigenvalue of the pencil (A - lambda_* B, W); the first is zero at
/// the principal pair, so this measures the spectral gap of -L.
inline double second_eigenvalue(const DiscreteProblem& p, const PrincipalPair& pair) {
    const detail::SymTri t = detail::pencil_tridiag(p, pair.lambda_star);
    const double l2 = detail::tridiag_eigenvalue(t, 1);
    if (l2 <= 1e-6)
        throw degeneracy_error("second_eigenvalue: spectral gap below 1e-6");
    return l2;
}

inline double rayleigh_identity_residual(const DiscreteProblem& p,
                                         const PrincipalPair& pair) {
    if (pair.case_tag == CaseTag::NoFluxCaseII) return 0.0;
    const std::vector<double> Aphi = p.apply_A(pair.phi);
    double pAp = 0.0, pBp = 0.0;
    for (int i = 0; i < p.n(); ++i) {
        pAp += pair.phi[i] * Aphi[i];
        pBp += pair.phi[i] * p.wB[i] * pair.phi[i];
    }
    return std::abs(pair.lambda_star * pBp - pAp) / pAp;
}

}  // namespace rda
