#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gmmnet/errors.hpp"

namespace gmmnet {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Vector row(std::size_t i) const;
    Vector col(std::size_t j) const;
    void set_row(std::size_t i, const Vector& v);

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Basic dense kernels.
Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& a);
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
Vector sub(const Vector& a, const Vector& b);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double determinant(Matrix a);

/// Eigenvalues sorted descending; eigenvector columns are unit length,
/// mutually orthogonal, and sign-fixed so each column's largest-magnitude
/// entry is non-negative.
struct EigenDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;  // column i pairs with eigenvalues[i]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Throws InvalidMatrix if m is not symmetric within 1e-10,
/// NumericalFailure if the sweep cap is hit before convergence.
EigenDecomposition eigh_symmetric(const Matrix& m);

/// Seeded random rotation (orthogonal, det +1) via QR of a Gaussian matrix.
Matrix random_rotation(std::size_t dim, std::uint64_t seed);

struct LeastSquaresResult {
    Vector solution;
    bool rank_deficient = false;
};

/// Minimizes ||a*x - y||_2 via normal equations; falls back to a ridge
/// term (1e-12 on the Gram diagonal) for rank-deficient systems, which
/// yields the minimum-norm minimizer.
LeastSquaresResult least_squares_full(const Matrix& a, const Vector& y);
Vector least_squares(const Matrix& a, const Vector& y);

/// Lower Cholesky factor of an SPD matrix; throws NumericalFailure if a
/// pivot is not positive.
Matrix cholesky(const Matrix& a);

/// Solves a*x = b for SPD a via Cholesky.
Vector solve_spd(const Matrix& a, const Vector& b);

bool is_symmetric(const Matrix& m, double tol);
bool is_orthogonal(const Matrix& m, double tol);

}  // namespace gmmnet
