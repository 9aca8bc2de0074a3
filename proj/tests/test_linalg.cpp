#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mmc/linalg.hpp"
#include "test_util.hpp"

using namespace mmc;

namespace {

SymMatrix random_spd(std::mt19937_64& gen, std::size_t n) {
    std::normal_distribution<double> nd;
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = nd(gen);
    Matrix a = g * g.transposed();
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 0.1;
    return SymMatrix(a);
}

Matrix permutation(std::mt19937_64& gen, std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), gen);
    Matrix q(n, n);
    for (std::size_t i = 0; i < n; ++i) q(i, p[i]) = 1.0;
    return q;
}

double rel_err(const Matrix& a, const Matrix& b) { return max_abs(a - b) / std::max(max_abs(b), 1e-300); }

}  // namespace

TEST(SymMatrix, RejectsAsymmetricAndEmpty) {
    EXPECT_MMC_ERROR(SymMatrix({{1.0, 2.0}, {0.0, 1.0}}), ErrorCode::InvalidParams);
    EXPECT_MMC_ERROR((void)SymMatrix(Matrix()), ErrorCode::InvalidParams);
    EXPECT_MMC_ERROR(SymMatrix::identity(kMaxDim + 1), ErrorCode::DimensionTooLarge);
}

TEST(SymMatrix, SymmetrizesRoundingNoise) {
    const SymMatrix s({{1.0, 0.5 + 1e-15}, {0.5, 1.0}});
    EXPECT_EQ(s(0, 1), s(1, 0));
}

TEST(Cholesky, Identity) { EXPECT_EQ(cholesky(SymMatrix::identity(3)), Matrix::identity(3)); }

TEST(Cholesky, HandElimination) {
    const Matrix l = cholesky(SymMatrix{{4.0, 2.0}, {2.0, 3.0}});
    EXPECT_DOUBLE_EQ(l(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(l(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(l(1, 0), 1.0);
    EXPECT_NEAR(l(1, 1), std::sqrt(2.0), 1e-15);
}

TEST(Cholesky, IndefiniteFails) {
    EXPECT_MMC_ERROR(cholesky(SymMatrix{{1.0, 2.0}, {2.0, 1.0}}), ErrorCode::NotPositiveDefinite);
}

TEST(Cholesky, ReconstructionProperty) {
    std::mt19937_64 gen(11);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 1 + rep % 8;
        const SymMatrix a = random_spd(gen, n);
        const Matrix l = cholesky(a);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) EXPECT_EQ(l(i, j), 0.0);
        EXPECT_LE(max_abs(l * l.transposed() - a.matrix()), 1e-12 * max_abs(a));
    }
}

TEST(SymSqrt, DiagonalAndIdentity) {
    const Vector d{4.0, 9.0};
    const SymMatrix s = sym_sqrt(SymMatrix::diagonal(d));
    EXPECT_NEAR(s(0, 0), 2.0, 1e-14);
    EXPECT_NEAR(s(1, 1), 3.0, 1e-14);
    EXPECT_EQ(s(0, 1), 0.0);
    for (std::size_t n : {1u, 2u, 5u}) EXPECT_LE(max_abs(sym_sqrt(SymMatrix::identity(n)) - Matrix::identity(n)), 1e-15);
}

TEST(SymSqrt, ClampsTinyNegativeEigenvalues) {
    // Rank-one PSD matrix with rounding noise on the null direction.
    const SymMatrix a{{1.0, 1.0}, {1.0, 1.0 - 1e-15}};
    const SymMatrix s = sym_sqrt(a);
    EXPECT_LE(max_abs(s * s - a.matrix()), 1e-10);
    EXPECT_MMC_ERROR(sym_sqrt(SymMatrix{{1.0, 0.0}, {0.0, -0.1}}), ErrorCode::NotPositiveSemiDefinite);
}

TEST(SymSqrt, RandomSpdProperties) {
    std::mt19937_64 gen(12);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 1 + rep % 6;
        const SymMatrix a = random_spd(gen, n);
        const SymMatrix s = sym_sqrt(a);
        EXPECT_LE(rel_err(s * s, a), 1e-10);
        const SymEigen e = eigen_sym(s);
        EXPECT_GE(e.values.front(), 0.0);
        // Inverse root is the inverse of the root.
        const SymMatrix t = sym_inv_sqrt(a);
        EXPECT_LE(max_abs(t * s - Matrix::identity(n)), 1e-9);
        EXPECT_LE(max_abs(t * a.matrix() * t - Matrix::identity(n)), 1e-9);
        // Permutation conjugation commutes with the root.
        const Matrix q = permutation(gen, n);
        const SymMatrix lhs = sym_sqrt(conjugate(a, q));
        EXPECT_LE(max_abs(lhs.matrix() - conjugate(s, q).matrix()), 1e-9 * std::max(1.0, max_abs(s)));
    }
}

TEST(SymInvSqrt, Examples) {
    const Vector d{4.0};
    EXPECT_DOUBLE_EQ(sym_inv_sqrt(SymMatrix::diagonal(d))(0, 0), 0.5);
    EXPECT_LE(max_abs(sym_inv_sqrt(SymMatrix::identity(4)) - Matrix::identity(4)), 1e-15);
    const SymMatrix a{{2.0, 1.0}, {1.0, 2.0}};
    const SymMatrix t = sym_inv_sqrt(a);
    EXPECT_LE(max_abs(t * a.matrix() * t - Matrix::identity(2)), 1e-9);
    EXPECT_MMC_ERROR(sym_inv_sqrt(SymMatrix{{1.0, 1.0}, {1.0, 1.0}}), ErrorCode::SingularMatrix);
}

TEST(EigenSym, KnownSpectrum) {
    const SymEigen e = eigen_sym(SymMatrix{{2.0, 1.0}, {1.0, 2.0}});
    EXPECT_NEAR(e.values[0], 1.0, 1e-14);
    EXPECT_NEAR(e.values[1], 3.0, 1e-14);
    const double c = std::abs(e.vectors(0, 1));
    EXPECT_NEAR(c, std::sqrt(0.5), 1e-14);
}

TEST(SpdInverse, RandomProperty) {
    std::mt19937_64 gen(13);
    for (int rep = 0; rep < 50; ++rep) {
        const SymMatrix a = random_spd(gen, 1 + rep % 5);
        const SymMatrix inv = spd_inverse(a);
        EXPECT_LE(max_abs(inv * a.matrix() - Matrix::identity(a.dim())), 1e-9);
    }
}

TEST(Matrix, ArithmeticHelpers) {
    const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
    EXPECT_DOUBLE_EQ(trace(a), 5.0);
    EXPECT_EQ(a.transposed(), (Matrix{{1.0, 3.0}, {2.0, 4.0}}));
    const Vector x{1.0, 1.0};
    EXPECT_EQ(a * std::span<const double>(x), (Vector{3.0, 7.0}));
    EXPECT_DOUBLE_EQ(dot(x, x), 2.0);
    EXPECT_MMC_ERROR(a * Matrix(3, 3), ErrorCode::DimensionMismatch);
}
