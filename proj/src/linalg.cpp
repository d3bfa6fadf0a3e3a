#include "oscimarket/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oscimarket/errors.hpp"

namespace oscimarket::linalg {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

std::vector<double> mat_vec(const Matrix& a, std::span<const double> x) {
    std::vector<double> y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

Matrix householder_to_last_axis(std::span<const double> alpha) {
    const int n = int(alpha.size());
    double norm = 0.0;
    for (double v : alpha) norm += v * v;
    norm = std::sqrt(norm);

    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = alpha[i] / norm;
    v[n - 1] -= 1.0; // v = alpha_hat - e_n

    double vv = 0.0;
    for (double w : v) vv += w * w;

    if (vv < 1e-28) return Matrix::identity(n); // alpha already along e_n

    Matrix o = Matrix::identity(n);
    const double scale = 2.0 / vv;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) o(i, j) -= scale * v[i] * v[j];
    return o;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

} // namespace

JacobiResult jacobi_eigen(Matrix a, double tol, int max_sweeps) {
    const int n = a.rows();
    Matrix v = Matrix::identity(n);
    const double threshold = tol * std::max(1.0, frobenius_norm(a));

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_diagonal_norm(a) <= threshold) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // A <- J^T A J with the (p,q) rotation
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (off_diagonal_norm(a) > threshold) {
        throw EigenNoConvergence("jacobi_eigen: no convergence after " +
                                 std::to_string(max_sweeps) + " sweeps");
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return diag[i] < diag[j]; });

    JacobiResult result;
    result.eigenvalues.resize(n);
    result.eigenvectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        result.eigenvalues[j] = diag[order[j]];
        for (int i = 0; i < n; ++i) result.eigenvectors(i, j) = v(i, order[j]);
    }
    result.sweeps = sweep;
    return result;
}

} // namespace oscimarket::linalg
