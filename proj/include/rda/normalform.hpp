#pragma once

// Center-manifold reduction at a delay crossing: the second-order solves E
// and F, the quadratic coefficients g20/g11/g02, the cubic g21 through the
// w fields, and the first Lyapunov quantity C1(0) with the direction and
// orbital-stability classification.

#include <cmath>
#include <complex>
#include <vector>

#include "rda/domain.hpp"
#include "rda/hopf.hpp"
#include "rda/steady.hpp"
#include "rda/tridiag.hpp"

namespace rda {

struct NormalFormResult {
    Complex g20, g11, g02, g21;
    Complex C1;
    ComplexField E, F;
    ComplexField w20_0, w20_m1, w11_0, w11_m1;
    bool forward = false;        // periodic orbits exist past tau_n
    bool orbit_stable = false;   // Re C1 < 0
    Complex c_scaled;            // gap^2 <u, E> / <u, u> diagnostic
    Complex mu2;                 // -Re C1 / Re dmu, the direction quotient
    bool resonance_warning = false;   // near-singular 2 i nu solve
    bool degeneracy_warning = false;  // near-singular zero-frequency solve
};

namespace detail {

inline ComplexField solve_char_system(const DiscreteProblem& p, const Field& u,
                                      double lambda, Complex mu, Complex delayfac,
                                      ComplexField rhs, bool* near_singular,
                                      const char* what) {
    TriMat<Complex> mat = char_matrix(p, u, lambda, mu, delayfac);
    TriLU<Complex> lu(mat);
    if (near_singular) *near_singular = lu.pivot_ratio() > 1e12;
    ComplexField sol = lu.solve(rhs);
    // contract: direct solve must close to 1e-10 relative
    const ComplexField back = mat.apply(sol);
    double err = 0.0, scale = 0.0;
    for (size_t i = 0; i < rhs.size(); ++i) {
        err = std::max(err, std::abs(back[i] - rhs[i]));
        scale = std::max(scale, std::abs(rhs[i]));
    }
    if (err > 1e-10 * std::max({scale, max_abs(sol), 1.0}))
        throw convergence_error(std::string(what) + ": banded solve residual too large");
    return sol;
}

}  // namespace detail

/// Second-harmonic response:  Delta(lambda, 2 i nu, tau_n) E = 2 lambda
/// e^{-i nu tau_n} e^{am} psi^2.  A nearly singular solve flags a 2:1
/// resonance (outside the validated regime) through *resonance_warning.
inline ComplexField solve_E(const DiscreteProblem& p, const SteadyState& state,
                            const HopfPoint& point,
                            bool* resonance_warning = nullptr) {
    const CharTriplet& t = point.triplet;
    const double nutau = t.nu * point.tau_n;
    ComplexField rhs(p.n());
    for (int i = 0; i < p.n(); ++i)
        rhs[i] = 2.0 * state.lambda * std::exp(Complex(0.0, -nutau)) * p.wE2[i] *
                 t.psi[i] * t.psi[i];
    return detail::solve_char_system(
        p, state.u, state.lambda, Complex(0.0, 2.0 * t.nu),
        std::exp(Complex(0.0, -2.0 * nutau)), std::move(rhs), resonance_warning,
        "solve_E");
}

/// Mean response:  F = lambda (e^{-i nu tau_n} + e^{i nu tau_n})
/// Delta(lambda, 0, tau_n)^{-1} (e^{am} |psi|^2); vanishes as theta -> pi/2.
inline ComplexField solve_F(const DiscreteProblem& p, const SteadyState& state,
                            const HopfPoint& point,
                            bool* degeneracy_warning = nullptr) {
    const CharTriplet& t = point.triplet;
    const double nutau = t.nu * point.tau_n;
    const Complex fac = state.lambda * (std::exp(Complex(0.0, -nutau)) +
                                        std::exp(Complex(0.0, nutau)));
    ComplexField rhs(p.n());
    for (int i = 0; i < p.n(); ++i)
        rhs[i] = fac * p.wE2[i] * std::norm(t.psi[i]);
    return detail::solve_char_system(p, state.u, state.lambda, Complex{},
                                     Complex(1.0, 0.0), std::move(rhs),
                                     degeneracy_warning, "solve_F");
}

struct GLow {
    Complex g20, g11, g02;
};

inline GLow g_low(const DiscreteProblem& p, const SteadyState& state,
                  const HopfPoint& point) {
    if (std::isnan(point.S.real()))
        throw config_error("g_low: S_n has not been computed for this point");
    const CharTriplet& t = point.triplet;
    const double nutau = t.nu * point.tau_n;
    const Complex em = std::exp(Complex(0.0, -nutau));
    const Complex ep = std::exp(Complex(0.0, nutau));

    Complex i3{}, i_mixed{}, i_conj{};
    for (int i = 0; i < p.n(); ++i) {
        const Complex ps = t.psi[i];
        const Complex cps = std::conj(ps);
        i3 += p.wE2[i] * ps * ps * ps;
        i_mixed += p.wE2[i] * ps * std::norm(ps);
        i_conj += p.wE2[i] * ps * cps * cps;
    }
    const Complex pref = state.lambda * point.tau_n / point.S;
    GLow g;
    g.g20 = -2.0 * pref * em * i3;
    g.g11 = -pref * (ep + em) * i_mixed;
    g.g02 = -2.0 * pref * ep * i_conj;
    return g;
}

struct WFields {
    ComplexField w20_0, w20_m1, w11_0, w11_m1;
};

/// Evaluate w20 and w11 at history arguments 0 and -1:
///   w20(s) = (i g20 / (nu tau)) p(s) + (i conj(g02) / (3 nu tau)) conj(p)(s)
///            + E e^{2 i nu tau s},
///   w11(s) = -(i g11 / (nu tau)) p(s) + (i conj(g11) / (nu tau)) conj(p)(s) + F,
/// with p(s) = psi e^{i nu tau s}.
inline WFields w_fields(const HopfPoint& point, const GLow& g, const ComplexField& E,
                        const ComplexField& F) {
    const CharTriplet& t = point.triplet;
    const int n = static_cast<int>(t.psi.size());
    const double nutau = t.nu * point.tau_n;
    const Complex iunit(0.0, 1.0);
    const Complex a20 = iunit * g.g20 / nutau;
    const Complex b20 = iunit * std::conj(g.g02) / (3.0 * nutau);
    const Complex a11 = -iunit * g.g11 / nutau;
    const Complex b11 = iunit * std::conj(g.g11) / nutau;
    const Complex em = std::exp(Complex(0.0, -nutau));   // p(-1) factor
    const Complex ep = std::exp(Complex(0.0, nutau));    // conj(p)(-1) factor
    const Complex e2m = std::exp(Complex(0.0, -2.0 * nutau));

    WFields w;
    w.w20_0.resize(n);
    w.w20_m1.resize(n);
    w.w11_0.resize(n);
    w.w11_m1.resize(n);
    for (int i = 0; i < n; ++i) {
        const Complex ps = t.psi[i];
        const Complex cps = std::conj(ps);
        w.w20_0[i] = a20 * ps + b20 * cps + E[i];
        w.w20_m1[i] = a20 * ps * em + b20 * cps * ep + E[i] * e2m;
        w.w11_0[i] = a11 * ps + b11 * cps + F[i];
        w.w11_m1[i] = a11 * ps * em + b11 * cps * ep + F[i];
    }
    return w;
}

/// Cubic coefficient and the Lyapunov quantity
///   C1(0) = i/(2 nu tau) (g20 g11 - 2|g11|^2 - |g02|^2/3) + g21/2,
/// classified against the crossing speed stored on the point.
inline NormalFormResult g21_and_c1(const DiscreteProblem& p, const SteadyState& state,
                                   const HopfPoint& point, const WFields& w,
                                   const GLow& g) {
    if (std::isnan(point.dmu_dtau.real()))
        throw config_error("g21_and_c1: transversality has not been computed");
    const CharTriplet& t = point.triplet;
    const double nutau = t.nu * point.tau_n;
    const Complex em = std::exp(Complex(0.0, -nutau));
    const Complex ep = std::exp(Complex(0.0, nutau));

    Complex t1{}, t2{}, t3{}, t4{};
    for (int i = 0; i < p.n(); ++i) {
        const Complex ps = t.psi[i];
        const Complex ps2 = ps * ps;
        const double abs2 = std::norm(ps);
        t1 += p.wE2[i] * ps2 * w.w11_m1[i];
        t2 += p.wE2[i] * abs2 * w.w20_m1[i];
        t3 += p.wE2[i] * abs2 * w.w20_0[i];
        t4 += p.wE2[i] * ps2 * w.w11_0[i];
    }
    const Complex pref = state.lambda * point.tau_n / point.S;

    NormalFormResult out;
    out.g20 = g.g20;
    out.g11 = g.g11;
    out.g02 = g.g02;
    out.g21 = -2.0 * pref * t1 - pref * t2 - pref * ep * t3 - 2.0 * pref * em * t4;
    out.C1 = Complex(0.0, 1.0) / (2.0 * nutau) *
                 (g.g11 * g.g20 - 2.0 * std::norm(g.g11) -
                  std::norm(g.g02) / 3.0) +
             out.g21 / 2.0;
    out.w20_0 = w.w20_0;
    out.w20_m1 = w.w20_m1;
    out.w11_0 = w.w11_0;
    out.w11_m1 = w.w11_m1;
    out.mu2 = -out.C1.real() / point.dmu_dtau.real();
    out.forward = out.mu2.real() > 0.0;
    out.orbit_stable = out.C1.real() < 0.0;
    return out;
}

/// Full pipeline for one ladder point; S_n and the crossing speed must
/// already be stored on the point.
inline NormalFormResult normal_form(const DiscreteProblem& p, const SteadyState& state,
                                    const HopfPoint& point) {
    bool resonance = false, degenerate = false;
    ComplexField E = solve_E(p, state, point, &resonance);
    ComplexField F = solve_F(p, state, point, &degenerate);
    const GLow g = g_low(p, state, point);
    const WFields w = w_fields(point, g, E, F);
    NormalFormResult out = g21_and_c1(p, state, point, w, g);
    out.resonance_warning = resonance;
    out.degeneracy_warning = degenerate;
    out.E = std::move(E);
    out.F = std::move(F);

    // Small-gap diagnostic: gap^2 <u, E> / <u, u> approaches
    // 2i / (beta_*^2 (2i - 1)) as the gap closes.
    const double gap = point.triplet.nu / point.triplet.h;
    Complex uE{};
    double uu = 0.0;
    for (int i = 0; i < p.n(); ++i) {
        uE += p.w[i] * state.u[i] * out.E[i];
        uu += p.w[i] * state.u[i] * state.u[i];
    }
    out.c_scaled = gap * gap * uE / uu;
    return out;
}

}  // namespace rda
