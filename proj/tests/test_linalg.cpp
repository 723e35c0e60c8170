#include <doctest.h>

#include <cmath>

#include "gmmnet/linalg.hpp"
#include "gmmnet/rng.hpp"

using namespace gmmnet;

namespace {

Matrix symmetric(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n = rows.size();
    Matrix m(n, n);
    std::size_t i = 0;
    for (const auto& r : rows) {
        std::size_t j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix random_psd(std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix a(d, d);
    for (double& v : a.data()) v = rng.normal();
    Matrix psd = matmul(a, transpose(a));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = 0.5 * (psd(i, j) + psd(j, i));
            psd(i, j) = v;
            psd(j, i) = v;
        }
    return psd;
}

}  // namespace

TEST_CASE("eigh of a diagonal matrix") {
    const auto eig = eigh_symmetric(symmetric({{9, 0, 0}, {0, 4, 0}, {0, 0, 1}}));
    CHECK(eig.eigenvalues[0] == doctest::Approx(9.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(4.0));
    CHECK(eig.eigenvalues[2] == doctest::Approx(1.0));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(eig.eigenvectors(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("eigh of [[2,1],[1,2]]") {
    const auto eig = eigh_symmetric(symmetric({{2, 1}, {1, 2}}));
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
    CHECK(eig.eigenvectors(0, 0) == doctest::Approx(s));
    CHECK(eig.eigenvectors(1, 0) == doctest::Approx(s));
    // Sign convention: first largest-magnitude entry non-negative.
    CHECK(eig.eigenvectors(0, 1) == doctest::Approx(s));
    CHECK(eig.eigenvectors(1, 1) == doctest::Approx(-s));
}

TEST_CASE("eigh of the identity") {
    const auto eig = eigh_symmetric(Matrix::identity(5));
    for (double l : eig.eigenvalues) CHECK(l == doctest::Approx(1.0));
    CHECK(is_orthogonal(eig.eigenvectors, 1e-10));
}

TEST_CASE("eigh rejects non-symmetric input") {
    Matrix m(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(eigh_symmetric(m), InvalidMatrix);
}

TEST_CASE("eigh reconstruction and orthonormality on random PSD matrices") {
    for (std::size_t d : {2u, 5u, 9u, 16u}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Matrix m = random_psd(d, seed * 100 + d);
            const auto eig = eigh_symmetric(m);

            Matrix gram = matmul(transpose(eig.eigenvectors), eig.eigenvectors);
            for (std::size_t i = 0; i < d; ++i) gram(i, i) -= 1.0;
            CHECK(max_abs(gram) < 1e-10);

            Matrix recon(d, d);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < d; ++k)
                        s += eig.eigenvectors(i, k) * eig.eigenvalues[k] *
                             eig.eigenvectors(j, k);
                    recon(i, j) = s - m(i, j);
                }
            CHECK(frobenius_norm(recon) / frobenius_norm(m) < 1e-8);

            for (std::size_t k = 0; k + 1 < d; ++k)
                CHECK(eig.eigenvalues[k] >= eig.eigenvalues[k + 1]);
        }
    }
}

TEST_CASE("random_rotation in 1D is the identity") {
    const Matrix r = random_rotation(1, 12345);
    CHECK(r(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("random_rotation is orthogonal with determinant +1") {
    for (std::size_t dim : {2u, 3u, 7u}) {
        const Matrix r = random_rotation(dim, 7);
        CHECK(is_orthogonal(r, 1e-10));
        CHECK(determinant(r) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("random_rotation is deterministic per seed") {
    const Matrix a = random_rotation(2, 0);
    const Matrix b = random_rotation(2, 0);
    CHECK(a.data() == b.data());
    const Matrix c = random_rotation(2, 1);
    CHECK(a.data() != c.data());
}

TEST_CASE("random_rotation rejects dim 0") {
    CHECK_THROWS_AS(random_rotation(0, 0), InvalidDimension);
}

TEST_CASE("random_rotation preserves norms") {
    Rng rng(9);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix r = random_rotation(4, seed);
        Vector x(4);
        for (double& v : x) v = rng.normal();
        CHECK(std::abs(norm2(matvec(r, x)) - norm2(x)) < 1e-10);
    }
}

TEST_CASE("least_squares on an identity system") {
    const Vector x = least_squares(Matrix::identity(2), {3.0, 4.0});
    CHECK(x[0] == doctest::Approx(3.0));
    CHECK(x[1] == doctest::Approx(4.0));
}

TEST_CASE("least_squares on a consistent overdetermined system") {
    Matrix a(3, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;
    a(2, 0) = 1.0;
    a(2, 1) = 1.0;
    const Vector x = least_squares(a, {1.0, 1.0, 2.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("least_squares returns the minimum-norm solution when underdetermined") {
    Matrix a(1, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 1.0;
    const auto r = least_squares_full(a, {2.0});
    CHECK(r.rank_deficient);
    // Among solutions x0 + x1 = 2, (1,1) has the least norm.
    CHECK(r.solution[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.solution[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("least_squares rejects dimension mismatch") {
    CHECK_THROWS_AS(least_squares(Matrix::identity(2), {1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("least_squares residual is orthogonal to the column space") {
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        Matrix a(6, 3);
        Vector y(6);
        for (double& v : a.data()) v = rng.normal();
        for (double& v : y) v = rng.normal();
        const Vector x = least_squares(a, y);
        Vector resid = matvec(a, x);
        for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= y[i];
        for (double v : matvec(transpose(a), resid)) CHECK(std::abs(v) < 1e-8);
    }
}
