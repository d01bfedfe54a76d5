#pragma once

// Small dense and tridiagonal linear-algebra kernels shared by the solvers.

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "rda/errors.hpp"

namespace rda {

using Complex = std::complex<double>;

template <class T>
struct TriMat {
    std::vector<T> lower;  // M(i+1,i), size n-1
    std::vector<T> diag;   // M(i,i),   size n
    std::vector<T> upper;  // M(i,i+1), size n-1

    int n() const { return static_cast<int>(diag.size()); }

    std::vector<T> apply(const std::vector<T>& x) const {
        const int m = n();
        std::vector<T> y(m);
        for (int i = 0; i < m; ++i) {
            T s = diag[i] * x[i];
            if (i > 0) s += lower[i - 1] * x[i - 1];
            if (i + 1 < m) s += upper[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }
};

/// Tridiagonal LU with adjacent-row partial pivoting (one extra superdiagonal
/// of fill). Factor once, solve many right-hand sides.
template <class T>
class TriLU {
public:
    explicit TriLU(TriMat<T> a)
        : dl_(std::move(a.lower)), d_(std::move(a.diag)), du_(std::move(a.upper)) {
        const int n = static_cast<int>(d_.size());
        du2_.assign(n > 2 ? n - 2 : 0, T{});
        swapped_.assign(n > 1 ? n - 1 : 0, 0);
        min_pivot_ = max_pivot_ = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            if (std::abs(d_[i]) >= std::abs(dl_[i])) {
                if (d_[i] != T{}) {
                    const T f = dl_[i] / d_[i];
                    dl_[i] = f;
                    d_[i + 1] -= f * du_[i];
                } else {
                    dl_[i] = T{};
                }
            } else {
                const T f = d_[i] / dl_[i];
                d_[i] = dl_[i];
                dl_[i] = f;
                const T tmp = du_[i];
                du_[i] = d_[i + 1];
                d_[i + 1] = tmp - f * d_[i + 1];
                if (i + 2 < n) {
                    du2_[i] = du_[i + 1];
                    du_[i + 1] = -f * du_[i + 1];
                }
                swapped_[i] = 1;
            }
            track_pivot(std::abs(d_[i]));
        }
        if (n > 0) track_pivot(std::abs(d_[n - 1]));
    }

    std::vector<T> solve(std::vector<T> b) const {
        const int n = static_cast<int>(d_.size());
        for (int i = 0; i + 1 < n; ++i) {
            if (swapped_[i]) std::swap(b[i], b[i + 1]);
            b[i + 1] -= dl_[i] * b[i];
        }
        for (int i = n - 1; i >= 0; --i) {
            T s = b[i];
            if (i + 1 < n) s -= du_[i] * b[i + 1];
            if (i + 2 < n) s -= du2_[i] * b[i + 2];
            const T piv = d_[i] != T{} ? d_[i] : T{pivot_floor()};
            b[i] = s / piv;
        }
        return b;
    }

    /// Cheap conditioning proxy: pivot magnitude spread.
    double pivot_ratio() const {
        return min_pivot_ > 0.0 ? max_pivot_ / min_pivot_
                                : std::numeric_limits<double>::infinity();
    }

private:
    static double pivot_floor() { return 1e-300; }
    void track_pivot(double a) {
        if (max_pivot_ == 0.0 && min_pivot_ == 0.0) {
            min_pivot_ = max_pivot_ = a;
        } else {
            min_pivot_ = std::min(min_pivot_, a);
            max_pivot_ = std::max(max_pivot_, a);
        }
    }

    std::vector<T> dl_, d_, du_, du2_;
    std::vector<char> swapped_;
    double min_pivot_, max_pivot_;
};

/// Dense LU with partial pivoting; used where border rows make banded
/// elimination impractical (characteristic-system Newton steps).
class DenseLU {
public:
    DenseLU(std::vector<double> a, int n) : a_(std::move(a)), n_(n), piv_(n) {
        for (int k = 0; k < n_; ++k) {
            int p = k;
            double best = std::abs(at(k, k));
            for (int i = k + 1; i < n_; ++i) {
                const double v = std::abs(at(i, k));
                if (v > best) { best = v; p = i; }
            }
            piv_[k] = p;
            if (p != k)
                for (int j = 0; j < n_; ++j) std::swap(at(k, j), at(p, j));
            double pivot = at(k, k);
            if (pivot == 0.0) pivot = at(k, k) = 1e-300;
            for (int i = k + 1; i < n_; ++i) {
                const double f = at(i, k) / pivot;
                at(i, k) = f;
                if (f != 0.0)
                    for (int j = k + 1; j < n_; ++j) at(i, j) -= f * at(k, j);
            }
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        for (int k = 0; k < n_; ++k) {
            if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
            for (int i = k + 1; i < n_; ++i) b[i] -= at(i, k) * b[k];
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = b[i];
            for (int j = i + 1; j < n_; ++j) s -= at(i, j) * b[j];
            b[i] = s / at(i, i);
        }
        return b;
    }

private:
    double& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    double at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    std::vector<double> a_;
    int n_;
    std::vector<int> piv_;
};

template <class T>
struct BorderedSolution {
    std::vector<T> x;
    T multiplier;
};

/// Solve [[T, b],[c^T, d]] [x; mu] = [f; g] where T is tridiagonal.
///
/// Adjacent-row pivoting inside the band; the dense bottom row is admitted as
/// pivot only for the final band column, which is where a rank-one-deficient T
/// surfaces. O(n), no fill beyond the second superdiagonal.
template <class T>
inline BorderedSolution<T> solve_bordered_tridiag(TriMat<T> a, std::vector<T> bcol,
                                                  std::vector<T> brow, T corner,
                                                  std::vector<T> f, T g) {
    const int n = a.n();
    std::vector<T>& dl = a.lower;
    std::vector<T>& d = a.diag;
    std::vector<T>& du = a.upper;
    std::vector<T> du2(n > 2 ? n - 2 : 0, T{});

    for (int k = 0; k < n; ++k) {
        if (k + 1 < n && std::abs(dl[k]) > std::abs(d[k])) {
            // swap band rows k and k+1
            const T fk = d[k] / dl[k];
            d[k] = dl[k];
            const T tmp = du[k];
            du[k] = d[k + 1];
            d[k + 1] = tmp - fk * d[k + 1];
            if (k + 2 < n) {
                du2[k] = du[k + 1];
                du[k + 1] = -fk * du[k + 1];
            }
            std::swap(bcol[k], bcol[k + 1]);
            std::swap(f[k], f[k + 1]);
            bcol[k + 1] -= fk * bcol[k];
            f[k + 1] -= fk * f[k];
        } else if (k + 1 < n) {
            const T piv = d[k] != T{} ? d[k] : T{1e-300};
            const T fk = dl[k] / piv;
            d[k + 1] -= fk * du[k];
            bcol[k + 1] -= fk * bcol[k];
            f[k + 1] -= fk * f[k];
        } else if (std::abs(brow[k]) > std::abs(d[k])) {
            // last band column: the bottom row may take the pivot
            std::swap(d[k], brow[k]);
            std::swap(bcol[k], corner);
            std::swap(f[k], g);
        }
        const T piv = d[k] != T{} ? d[k] : T{1e-300};
        const T mb = brow[k] / piv;
        if (mb != T{}) {
            if (k + 1 < n) brow[k + 1] -= mb * du[k];
            if (k + 2 < n) brow[k + 2] -= mb * du2[k];
            corner -= mb * bcol[k];
            g -= mb * f[k];
        }
    }

    BorderedSolution<T> out;
    if (std::abs(corner) < 1e-300)
        throw degeneracy_error("bordered solve: singular bordered system");
    out.multiplier = g / corner;
    out.x.assign(n, T{});
    for (int i = n - 1; i >= 0; --i) {
        T s = f[i] - bcol[i] * out.multiplier;
        if (i + 1 < n) s -= du[i] * out.x[i + 1];
        if (i + 2 < n) s -= du2[i] * out.x[i + 2];
        out.x[i] = s / (d[i] != T{} ? d[i] : T{1e-300});
    }
    return out;
}

}  // namespace rda
