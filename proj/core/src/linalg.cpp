#include "gmmnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gmmnet/rng.hpp"

namespace gmmnet {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector Matrix::row(std::size_t i) const {
    Vector v(cols_);
    for (std::size_t j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
    return v;
}

Vector Matrix::col(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

void Matrix::set_row(std::size_t i, const Vector& v) {
    if (v.size() != cols_) throw ShapeError("set_row: length mismatch");
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double x) { return std::isfinite(x); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw ShapeError("matvec: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    return y;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

Vector sub(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("sub: length mismatch");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double x : a.data()) s += x * x;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double x : a.data()) m = std::max(m, std::abs(x));
    return m;
}

double determinant(Matrix a) {
    if (a.rows() != a.cols()) throw ShapeError("determinant: square matrix required");
    const std::size_t n = a.rows();
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (a(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = -det;
        }
        det *= a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol) return false;
    return true;
}

bool is_orthogonal(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const Matrix g = matmul(transpose(m), m);
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
            const double want = (i == j) ? 1.0 : 0.0;
            if (std::abs(g(i, j) - want) > tol) return false;
        }
    return true;
}

namespace {

double off_diagonal_max(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            m = std::max(m, std::abs(a(i, j)));
    return m;
}

// Descending eigenvalue order plus a fixed sign: the entry of largest
// magnitude in each eigenvector is made non-negative.
void sort_and_fix_signs(Vector& values, Matrix& vectors) {
    const std::size_t d = values.size();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    Vector sorted_values(d);
    Matrix sorted_vectors(d, d);
    for (std::size_t k = 0; k < d; ++k) {
        sorted_values[k] = values[order[k]];
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double mag = std::abs(vectors(i, order[k]));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const double sign = vectors(arg, order[k]) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < d; ++i)
            sorted_vectors(i, k) = sign * vectors(i, order[k]);
    }
    values = std::move(sorted_values);
    vectors = std::move(sorted_vectors);
}

}  // namespace

EigenDecomposition eigh_symmetric(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw InvalidMatrix("eigh_symmetric: square matrix required");
    if (!m.all_finite())
        throw InvalidMatrix("eigh_symmetric: non-finite entries");
    if (!is_symmetric(m, 1e-10))
        throw InvalidMatrix("eigh_symmetric: matrix not symmetric within 1e-10");

    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);

    // Cyclic Jacobi: sweep the strict upper triangle until every
    // off-diagonal drops below threshold, capped at 100 sweeps.
    const double scale = frobenius_norm(a);
    const double threshold = std::max(1e-12, 1e-15 * scale);
    constexpr int kMaxSweeps = 100;

    bool converged = (n == 1) || off_diagonal_max(a) <= threshold;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= threshold) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double apj = a(p, j);
                    const double aqj = a(q, j);
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
        converged = off_diagonal_max(a) <= threshold;
    }
    if (!converged)
        throw NumericalFailure("eigh_symmetric: Jacobi did not converge in 100 sweeps");

    EigenDecomposition result;
    result.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.eigenvalues[i] = a(i, i);
    result.eigenvectors = std::move(v);
    sort_and_fix_signs(result.eigenvalues, result.eigenvectors);
    return result;
}

Matrix random_rotation(std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw InvalidDimension("random_rotation: dim must be >= 1");
    if (dim == 1) {
        Matrix r(1, 1);
        r(0, 0) = 1.0;
        return r;
    }

    Rng rng(seed);
    Matrix g(dim, dim);
    for (double& x : g.data()) x = rng.normal();

    // Modified Gram-Schmidt with a second orthogonalization pass, column
    // signs fixed by the original projection coefficient (maps to the
    // sign(r_ii) correction of a QR factorization).
    Matrix q(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        Vector col = g.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                const Vector qk = q.col(k);
                const double proj = dot(qk, col);
                for (std::size_t i = 0; i < dim; ++i) col[i] -= proj * qk[i];
            }
        }
        const double nrm = norm2(col);
        if (nrm < 1e-12)
            throw NumericalFailure("random_rotation: degenerate Gaussian draw");
        const double sign = dot(g.col(j), col) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < dim; ++i) q(i, j) = sign * col[i] / nrm;
    }

    if (determinant(q) < 0.0)
        for (std::size_t i = 0; i < dim; ++i) q(i, dim - 1) = -q(i, dim - 1);
    return q;
}

Matrix cholesky(const Matrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("cholesky: square matrix required");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0)
                    throw NumericalFailure("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

Vector solve_spd(const Matrix& a, const Vector& b) {
    const Matrix l = cholesky(a);
    const std::size_t n = b.size();
    Vector y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

LeastSquaresResult least_squares_full(const Matrix& a, const Vector& y) {
    if (a.rows() != y.size())
        throw ShapeError("least_squares: row count must match rhs length");
    if (a.rows() == 0 || a.cols() == 0)
        throw ShapeError("least_squares: empty system");

    const Matrix at = transpose(a);
    const Matrix gram = matmul(at, a);
    const Vector rhs = matvec(at, y);

    LeastSquaresResult result;
    try {
        const Matrix l = cholesky(gram);
        // A Gram matrix that factors but is badly conditioned still means
        // a rank-deficient system in practice; detect via pivot scale.
        double max_piv = 0.0, min_piv = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < gram.rows(); ++i) {
            max_piv = std::max(max_piv, l(i, i));
            min_piv = std::min(min_piv, l(i, i));
        }
        if (min_piv < 1e-7 * max_piv) throw NumericalFailure("near-singular Gram");
        result.solution = solve_spd(gram, rhs);
    } catch (const NumericalFailure&) {
        Matrix ridged = gram;
        for (std::size_t i = 0; i < ridged.rows(); ++i) ridged(i, i) += 1e-12;
        result.solution = solve_spd(ridged, rhs);
        result.rank_deficient = true;
    }
    return result;
}

Vector least_squares(const Matrix& a, const Vector& y) {
    return least_squares_full(a, y).solution;
}

}  // namespace gmmnet
