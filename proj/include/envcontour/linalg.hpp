#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace envc {

using Vec = std::vector<double>;

// Dense row-major matrix, small sizes only.
struct Mat {
    int rows = 0;
    int cols = 0;
    Vec a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double dot(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
}

inline double dot(const Vec& a, const Vec& b) {
    return dot(a.data(), b.data(), static_cast<int>(a.size()));
}

inline double norm(const double* a, int d) { return std::sqrt(dot(a, a, d)); }
inline double norm(const Vec& a) { return norm(a.data(), static_cast<int>(a.size())); }

inline double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec scaled(const Vec& a, double k) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = k * a[i];
    return r;
}

inline Vec matvec(const Mat& m, const Vec& x) {
    Vec y(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) y[i] += m(i, j) * x[j];
    return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            const double v = a(i, k);
            for (int j = 0; j < b.cols; ++j) c(i, j) += v * b(k, j);
        }
    return c;
}

inline Mat transpose(const Mat& m) {
    Mat t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

// In-place lower Cholesky; returns false when the matrix is not positive definite.
inline bool cholesky(Mat& m) {
    const int n = m.rows;
    for (int j = 0; j < n; ++j) {
        double d = m(j, j);
        for (int k = 0; k < j; ++k) d -= m(j, k) * m(j, k);
        if (!(d > 0.0)) return false;
        m(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= m(i, k) * m(j, k);
            m(i, j) = s / m(j, j);
        }
        for (int k = j + 1; k < n; ++k) m(j, k) = 0.0;
    }
    return true;
}

// Gaussian elimination with partial pivoting. Returns false if singular.
inline bool solve(Mat m, Vec b, Vec& x) {
    const int n = m.rows;
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int i = col + 1; i < n; ++i)
            if (std::fabs(m(i, col)) > std::fabs(m(best, col))) best = i;
        if (m(best, col) == 0.0) return false;
        if (best != col) {
            for (int j = 0; j < n; ++j) std::swap(m(col, j), m(best, j));
            std::swap(b[col], b[best]);
        }
        for (int i = col + 1; i < n; ++i) {
            const double f = m(i, col) / m(col, col);
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) m(i, j) -= f * m(col, j);
            b[i] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
        if (m(i, i) == 0.0) return false;
        x[i] = s / m(i, i);
    }
    return true;
}

// Determinant via LU with partial pivoting.
inline double det(Mat m) {
    const int n = m.rows;
    double d = 1.0;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int i = col + 1; i < n; ++i)
            if (std::fabs(m(i, col)) > std::fabs(m(best, col))) best = i;
        if (m(best, col) == 0.0) return 0.0;
        if (best != col) {
            for (int j = 0; j < n; ++j) std::swap(m(col, j), m(best, j));
            d = -d;
        }
        d *= m(col, col);
        for (int i = col + 1; i < n; ++i) {
            const double f = m(i, col) / m(col, col);
            for (int j = col; j < n; ++j) m(i, j) -= f * m(col, j);
        }
    }
    return d;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending order.
inline Vec sym_eigenvalues(Mat m) {
    const int n = m.rows;
    if (n == 1) return {m(0, 0)};
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
        if (off < 1e-26) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(m(p, q)) < 1e-300) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
    }
    Vec ev(n);
    for (int i = 0; i < n; ++i) ev[i] = m(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace envc
