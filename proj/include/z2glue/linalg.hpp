#pragma once
#include <cmath>
#include <complex>
#include <vector>

#include "z2glue/errors.hpp"

namespace z2glue {

/** Solve A x = b in place by Gaussian elimination with partial pivoting.
 *  A is n*n row-major; returns x. */
template <class T>
std::vector<T> solve_dense(std::vector<T> A, std::vector<T> b) {
    const int n = static_cast<int>(b.size());
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(A[k * n + k]);
        for (int i = k + 1; i < n; ++i) {
            double m = std::abs(A[i * n + k]);
            if (m > best) { best = m; piv = i; }
        }
        if (best == 0.0) throw precision_error("solve_dense: singular matrix");
        if (piv != k) {
            for (int j = k; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            T m = A[i * n + k] / A[k * n + k];
            if (m == T(0)) continue;
            for (int j = k; j < n; ++j) A[i * n + j] -= m * A[k * n + j];
            b[i] -= m * b[k];
        }
    }
    std::vector<T> x(n);
    for (int i = n - 1; i >= 0; --i) {
        T s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A[i * n + j] * x[j];
        x[i] = s / A[i * n + i];
    }
    return x;
}

/** Thomas solve for a tridiagonal system; diagonals (sub, diag, sup). */
inline std::vector<double> solve_tridiag(std::vector<double> sub,
                                         std::vector<double> diag,
                                         std::vector<double> sup,
                                         std::vector<double> rhs) {
    const int n = static_cast<int>(diag.size());
    for (int i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) throw precision_error("solve_tridiag: zero pivot");
        double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    if (diag[n - 1] == 0.0) throw precision_error("solve_tridiag: zero pivot");
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i)
        x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    return x;
}

/** Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
 *  A is n*n row-major; eigenvalues ascending, eigenvectors in columns of V. */
struct SymEig {
    std::vector<double> values;
    std::vector<double> vectors; // column j = eigenvector of values[j]
};

inline SymEig eig_sym(std::vector<double> A, int n) {
    std::vector<double> V(n * n, 0.0);
    for (int i = 0; i < n; ++i) V[i * n + i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A[p * n + q] * A[p * n + q];
        if (off < 1e-300) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = A[p * n + q];
                if (std::fabs(apq) < 1e-300) continue;
                double tau = (A[q * n + q] - A[p * n + p]) / (2.0 * apq);
                double t = (tau >= 0 ? 1.0 : -1.0) /
                           (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = A[k * n + p], akq = A[k * n + q];
                    A[k * n + p] = c * akp - s * akq;
                    A[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = A[p * n + k], aqk = A[q * n + k];
                    A[p * n + k] = c * apk - s * aqk;
                    A[q * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = V[k * n + p], vkq = V[k * n + q];
                    V[k * n + p] = c * vkp - s * vkq;
                    V[k * n + q] = s * vkp + c * vkq;
                }
            }
    }
    SymEig out;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = A[i * n + i];
    // sort ascending, permuting columns of V
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (out.values[idx[j]] < out.values[idx[i]]) std::swap(idx[i], idx[j]);
    SymEig sorted;
    sorted.values.resize(n);
    sorted.vectors.assign(n * n, 0.0);
    for (int j = 0; j < n; ++j) {
        sorted.values[j] = out.values[idx[j]];
        for (int i = 0; i < n; ++i) sorted.vectors[i * n + j] = V[i * n + idx[j]];
    }
    return sorted;
}

/** Least squares via normal equations for a small column set.
 *  cols: m columns each of length s; rhs length s. */
inline std::vector<double> lsq_columns(const std::vector<std::vector<double>>& cols,
                                       const std::vector<double>& rhs) {
    const int m = static_cast<int>(cols.size());
    std::vector<double> G(m * m), g(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (size_t t = 0; t < rhs.size(); ++t) s += cols[i][t] * cols[j][t];
            G[i * m + j] = s;
        }
        double s = 0.0;
        for (size_t t = 0; t < rhs.size(); ++t) s += cols[i][t] * rhs[t];
        g[i] = s;
    }
    return solve_dense(G, g);
}

/** Slope of the least-squares line through (log x_i, log y_i). */
inline double loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) { mx += std::log(x[i]); my += std::log(y[i]); }
    mx /= n; my /= n;
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        double dx = std::log(x[i]) - mx;
        num += dx * (std::log(y[i]) - my);
        den += dx * dx;
    }
    return num / den;
}

} // namespace z2glue
