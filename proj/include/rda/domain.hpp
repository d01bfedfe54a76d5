#pragma once

// One-dimensional grid on (0, length), growth-rate profiles m(x), and the
// assembled flux-form discretization of  -(e^{am} u')'  with its diagonal
// quadrature weights.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "rda/errors.hpp"
#include "rda/tridiag.hpp"

namespace rda {

using Field = std::vector<double>;
using ComplexField = std::vector<Complex>;

enum class BoundaryCondition { Dirichlet, NoFlux };

enum class CaseTag { Dirichlet, NoFluxCaseI, NoFluxCaseII };

inline const char* to_string(CaseTag c) {
    switch (c) {
        case CaseTag::Dirichlet: return "dirichlet";
        case CaseTag::NoFluxCaseI: return "noflux_case_i";
        default: return "noflux_case_ii";
    }
}

struct Grid {
    double length = 0.0;
    int n_cells = 0;
    BoundaryCondition bc = BoundaryCondition::Dirichlet;
    double h = 0.0;

    int n_unknowns() const {
        return bc == BoundaryCondition::Dirichlet ? n_cells - 1 : n_cells + 1;
    }
    /// Node coordinate, i = 0..n_cells.
    double node(int i) const { return i * h; }
    /// Node index of unknown j.
    int unknown_node(int j) const {
        return bc == BoundaryCondition::Dirichlet ? j + 1 : j;
    }
    double unknown_x(int j) const { return node(unknown_node(j)); }
};

inline Grid make_grid(double length, int n_cells, BoundaryCondition bc) {
    if (!(length > 0.0))
        throw config_error("make_grid: interval length must be positive");
    if (n_cells < 4)
        throw config_error("make_grid: grid too coarse, need n_cells >= 4");
    Grid g;
    g.length = length;
    g.n_cells = n_cells;
    g.bc = bc;
    g.h = length / n_cells;
    return g;
}

/// Spatial growth-rate profile m(x); closed forms or tabulated node values.
struct Profile {
    enum class Kind { Constant, Cosine, Sine, Tabulated };

    Kind kind = Kind::Constant;
    double c = 0.0;          // Constant
    double a0 = 0.0, a1 = 0.0;
    double k = 1.0;          // Cosine/Sine: a0 + a1*trig(k*pi*x/length)
    std::vector<double> values;  // Tabulated, one per node

    static Profile constant(double value) {
        Profile p;
        p.kind = Kind::Constant;
        p.c = value;
        return p;
    }
    static Profile cosine(double a0, double a1, double k = 1.0) {
        Profile p;
        p.kind = Kind::Cosine;
        p.a0 = a0;
        p.a1 = a1;
        p.k = k;
        return p;
    }
    static Profile sine(double a0, double a1, double k = 1.0) {
        Profile p;
        p.kind = Kind::Sine;
        p.a0 = a0;
        p.a1 = a1;
        p.k = k;
        return p;
    }
    static Profile tabulated(std::vector<double> node_values) {
        Profile p;
        p.kind = Kind::Tabulated;
        p.values = std::move(node_values);
        return p;
    }

    double eval(double x, const Grid& g) const {
        switch (kind) {
            case Kind::Constant: return c;
            case Kind::Cosine: return a0 + a1 * std::cos(k * M_PI * x / g.length);
            case Kind::Sine: return a0 + a1 * std::sin(k * M_PI * x / g.length);
            case Kind::Tabulated: {
                // nodes exactly, midpoints by linear interpolation
                const double s = x / g.h;
                int i = static_cast<int>(std::floor(s));
                i = std::clamp(i, 0, g.n_cells - 1);
                const double t = s - i;
                return (1.0 - t) * values[i] + t * values[i + 1];
            }
        }
        return 0.0;
    }
};

/// Raw model parameters (diffusion d, advection a, maturation delay r) and
/// the rescaled triple (lambda, alpha, tau) the solvers work in.
struct RawParams {
    double d = 1.0, a = 0.0, r = 0.0;
};
struct TransformedParams {
    double lambda = 1.0, alpha = 0.0, tau = 0.0;
};

inline TransformedParams transform_parameters(const RawParams& p) {
    if (!(p.d > 0.0)) throw config_error("transform_parameters: d must be positive");
    if (p.r < 0.0) throw config_error("transform_parameters: r must be nonnegative");
    return TransformedParams{1.0 / p.d, p.a / p.d, p.d * p.r};
}

inline RawParams transform_parameters_inverse(const TransformedParams& p) {
    if (!(p.lambda > 0.0))
        throw config_error("transform_parameters_inverse: lambda must be positive");
    return RawParams{1.0 / p.lambda, p.alpha / p.lambda, p.tau * p.lambda};
}

/// Grid plus the assembled operator and weight matrices.
///
/// A is the symmetric flux discretization scaled so that <u, A u> (plain dot
/// product) approximates the energy integral of e^{am}|u'|^2; the diagonal
/// weights carry trapezoid quadrature:
///   w   plain, wE = w e^{am}, wB = w m e^{am}, wE2 = w e^{2am}.
struct DiscreteProblem {
    Grid grid;
    double alpha = 0.0;
    Profile profile;

    std::vector<double> x;       // unknown coordinates
    std::vector<double> m_node;  // m at unknown nodes
    std::vector<double> a_diag, a_off;
    std::vector<double> w, wE, wB, wE2;

    int n() const { return static_cast<int>(x.size()); }

    template <class T>
    std::vector<T> apply_A(const std::vector<T>& v) const {
        const int m = n();
        std::vector<T> y(m);
        for (int i = 0; i < m; ++i) {
            T s = a_diag[i] * v[i];
            if (i > 0) s += a_off[i - 1] * v[i - 1];
            if (i + 1 < m) s += a_off[i] * v[i + 1];
            y[i] = s;
        }
        return y;
    }

    TriMat<double> a_matrix() const { return TriMat<double>{a_off, a_diag, a_off}; }
};

/// Assemble the discrete problem; enforces the standing assumption that the
/// growth rate is positive somewhere on the closed domain.
inline DiscreteProblem assemble(const Grid& grid, const Profile& m, double alpha) {
    DiscreteProblem p;
    p.grid = grid;
    p.alpha = alpha;
    p.profile = m;

    const int nc = grid.n_cells;
    double m_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= nc; ++i) m_max = std::max(m_max, m.eval(grid.node(i), grid));
    if (!(m_max > 0.0))
        throw assumption_error("assemble: growth rate m(x) must be positive somewhere");

    std::vector<double> face(nc);  // e^{am} at cell midpoints
    for (int i = 0; i < nc; ++i)
        face[i] = std::exp(alpha * m.eval((i + 0.5) * grid.h, grid));

    const int nu = grid.n_unknowns();
    p.x.resize(nu);
    p.m_node.resize(nu);
    p.a_diag.assign(nu, 0.0);
    p.a_off.assign(nu - 1, 0.0);
    p.w.resize(nu);
    p.wE.resize(nu);
    p.wB.resize(nu);
    p.wE2.resize(nu);

    const double h = grid.h;
    for (int j = 0; j < nu; ++j) {
        const int i = grid.unknown_node(j);
        p.x[j] = grid.node(i);
        p.m_node[j] = m.eval(p.x[j], grid);

        const bool boundary = (i == 0 || i == nc);
        double diag = 0.0;
        if (i > 0) diag += face[i - 1] / h;      // left face flux
        if (i < nc) diag += face[i] / h;         // right face flux
        p.a_diag[j] = diag;
        if (j + 1 < nu) p.a_off[j] = -face[i] / h;

        const double wq = (grid.bc == BoundaryCondition::NoFlux && boundary) ? h / 2 : h;
        const double em = std::exp(alpha * p.m_node[j]);
        p.w[j] = wq;
        p.wE[j] = wq * em;
        p.wB[j] = wq * p.m_node[j] * em;
        p.wE2[j] = wq * em * em;
    }
    return p;
}

enum class Weight { Plain, ExpAlphaM, Exp2AlphaM };

inline const std::vector<double>& weight_diagonal(const DiscreteProblem& p, Weight w) {
    switch (w) {
        case Weight::Plain: return p.w;
        case Weight::ExpAlphaM: return p.wE;
        default: return p.wE2;
    }
}

/// Plain weighted sum over unknowns: the trapezoid quadrature of an integrand
/// already sampled on the grid (no conjugation).
template <class T>
inline T quad(const DiscreteProblem& p, const std::vector<T>& f) {
    if (static_cast<int>(f.size()) != p.n())
        throw config_error("quad: field length does not match grid");
    T s{};
    for (int i = 0; i < p.n(); ++i) s += p.w[i] * f[i];
    return s;
}

namespace detail {
inline double conj_(double v) { return v; }
inline Complex conj_(const Complex& v) { return std::conj(v); }
}  // namespace detail

/// Weighted inner product <u, v>; conjugate-linear in the first argument.
template <class T, class U>
inline auto inner(const DiscreteProblem& p, const std::vector<T>& u,
                  const std::vector<U>& v, Weight wt = Weight::Plain)
    -> decltype(detail::conj_(T{}) * U{}) {
    if (u.size() != v.size() || static_cast<int>(u.size()) != p.n())
        throw config_error("inner: field lengths do not match grid");
    const std::vector<double>& d = weight_diagonal(p, wt);
    decltype(detail::conj_(T{}) * U{}) s{};
    for (int i = 0; i < p.n(); ++i) s += d[i] * detail::conj_(u[i]) * v[i];
    return s;
}

/// Inner product against the e^{2am} u_weight kernel, <u, e^{2am} uw v>.
template <class T, class U>
inline auto inner_u_weighted(const DiscreteProblem& p, const std::vector<T>& u,
                             const std::vector<U>& v, const Field& u_weight)
    -> decltype(detail::conj_(T{}) * U{}) {
    if (u.size() != v.size() || u.size() != u_weight.size() ||
        static_cast<int>(u.size()) != p.n())
        throw config_error("inner_u_weighted: field lengths do not match grid");
    decltype(detail::conj_(T{}) * U{}) s{};
    for (int i = 0; i < p.n(); ++i)
        s += p.wE2[i] * u_weight[i] * detail::conj_(u[i]) * v[i];
    return s;
}

/// Signed weighted mass  integral of m e^{am}  deciding the no-flux case.
inline double weighted_mass(const DiscreteProblem& p) {
    double s = 0.0;
    for (double v : p.wB) s += v;
    return s;
}

template <class T>
inline double max_abs(const std::vector<T>& v) {
    double m = 0.0;
    for (const T& e : v) m = std::max(m, std::abs(e));
    return m;
}

}  // namespace rda
