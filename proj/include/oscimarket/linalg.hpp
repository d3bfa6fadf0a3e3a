#pragma once

#include <span>
#include <vector>

namespace oscimarket::linalg {

// Dense row-major matrix, sized for the small symmetric problems here
// (n up to ~10^3).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, 0.0) {}

    static Matrix identity(int n);

    double& operator()(int i, int j) { return data_[std::size_t(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[std::size_t(i) * cols_ + j]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
std::vector<double> mat_vec(const Matrix& a, std::span<const double> x);
double frobenius_norm(const Matrix& a);

// Symmetric orthogonal reflector O with O * (alpha/|alpha|) = e_n (last axis).
Matrix householder_to_last_axis(std::span<const double> alpha);

struct JacobiResult {
    std::vector<double> eigenvalues; // ascending
    Matrix eigenvectors;             // columns, matching eigenvalue order
    int sweeps = 0;
};

// Cyclic Jacobi rotations on a symmetric matrix. Converges when the
// off-diagonal Frobenius norm drops below tol * max(1, |A|_F).
JacobiResult jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 100);

} // namespace oscimarket::linalg
