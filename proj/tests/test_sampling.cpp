#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmc/normal.hpp"
#include "mmc/rng.hpp"
#include "mmc/sampling.hpp"
#include "test_util.hpp"

using namespace mmc;

// Known-answer vectors from the Random123 Philox4x64-10 reference (zero and all-ones
// inputs) and from numpy's Philox bit generator.
TEST(Philox, KnownAnswers) {
    using A4 = std::array<std::uint64_t, 4>;
    EXPECT_EQ(philox4x64({0, 0, 0, 0}, {0, 0}),
              (A4{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL}));
    const std::uint64_t ones = ~std::uint64_t{0};
    EXPECT_EQ(philox4x64({ones, ones, ones, ones}, {ones, ones}),
              (A4{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL}));
    EXPECT_EQ(philox4x64({1, 0, 0, 0}, {7, 9}),
              (A4{0x5ac49a5aa6b07890ULL, 0x05930c877546fc4eULL, 0xf11384d40c6643b6ULL, 0xeddea8620f029b3fULL}));
}

TEST(RngStream, CounterLayout) {
    const RngStream s(7, 9);
    EXPECT_EQ(s.bits_at(4), 0x5ac49a5aa6b07890ULL);
    EXPECT_EQ(s.bits_at(7), 0xeddea8620f029b3fULL);
}

TEST(RngStream, SequentialMatchesRandomAccessAndSkip) {
    RngStream a(42, 3);
    const RngStream ref(42, 3);
    for (std::uint64_t i = 0; i < 37; ++i) EXPECT_EQ(a.next_bits(), ref.bits_at(i));
    a.skip(1000);
    EXPECT_EQ(a.position(), 1037u);
    EXPECT_EQ(a.next_bits(), ref.bits_at(1037));
}

TEST(RngStream, OpenUniformMapping) {
    EXPECT_EQ(bits_to_open_uniform(0), std::ldexp(1.0, -53));
    EXPECT_EQ(bits_to_open_uniform(~std::uint64_t{0}), 1.0 - std::ldexp(1.0, -53));
    EXPECT_LT(bits_to_open_uniform(~std::uint64_t{0}), 1.0);
    EXPECT_GT(bits_to_open_uniform(0), 0.0);
    RngStream s(1, 1);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.next_uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Quantile, Examples) {
    EXPECT_EQ(standard_normal_quantile(0.5), 0.0);
    EXPECT_NEAR(standard_normal_quantile(0.8413447460685429), 1.0, 1e-9);
    EXPECT_NEAR(standard_normal_quantile(0.975), 1.959963984540054, 1e-8);
    EXPECT_MMC_ERROR(standard_normal_quantile(0.0), ErrorCode::DomainError);
    EXPECT_MMC_ERROR(standard_normal_quantile(1.0), ErrorCode::DomainError);
    EXPECT_MMC_ERROR(standard_normal_quantile(-0.2), ErrorCode::DomainError);
    EXPECT_MMC_ERROR(standard_normal_quantile(std::nan("")), ErrorCode::DomainError);
}

TEST(Quantile, RoundTripAgainstLongDoubleErfc) {
    // Φ evaluated in extended precision, independently of standard_normal_cdf.
    auto phi = [](double z) { return 0.5L * std::erfc(-static_cast<long double>(z) / std::sqrt(2.0L)); };
    double prev = -INFINITY;
    for (int i = 0; i < 10000; ++i) {
        const double u = (i + 0.5) / 10000.0;
        const double z = standard_normal_quantile(u);
        ASSERT_LE(std::abs(static_cast<double>(phi(z) - u)), 1e-13) << "u=" << u;
        ASSERT_GT(z, prev);
        prev = z;
    }
    for (double u : {1e-300, 1e-200, 1e-100, 1e-30, 1e-10, 1e-5, 0.02, 0.97, 1.0 - 1e-10, 1.0 - 1e-16}) {
        const double z = standard_normal_quantile(u);
        EXPECT_LE(std::abs(static_cast<double>(phi(z) - u)), 1e-13) << "u=" << u;
        if (u < 0.5) EXPECT_NEAR(static_cast<double>(phi(z) / u), 1.0, 1e-12) << "u=" << u;
    }
}

TEST(Quantile, Symmetry) {
    for (double u : {0x1p-40, 0x1p-20, 0x1p-10, 0.125, 0.375}) {
        EXPECT_NEAR(standard_normal_quantile(u), -standard_normal_quantile(1.0 - u), 1e-12 * (1.0 + std::abs(standard_normal_quantile(u))));
    }
}

TEST(SampleBatch, Validation) {
    EXPECT_MMC_ERROR(SampleBatch(0, 2), ErrorCode::InvalidParams);
    EXPECT_MMC_ERROR(SampleBatch(2, 0), ErrorCode::InvalidParams);
    EXPECT_MMC_ERROR(SampleBatch(2, 2, {1.0, 2.0, 3.0}), ErrorCode::DimensionMismatch);
    EXPECT_MMC_ERROR(SampleBatch(1, 2, {1.0, INFINITY}), ErrorCode::NonFiniteValue);
    EXPECT_MMC_ERROR(SampleBatch(1, 1, {std::nan("")}), ErrorCode::NonFiniteValue);
    const SampleBatch b(2, 2, {1.0, 2.0, 3.0, 4.0});
    EXPECT_EQ(b(1, 0), 3.0);
    EXPECT_EQ(b.row(0)[1], 2.0);
}

TEST(DrawStandardBatch, DeterministicAndRowMajor) {
    RngStream s1(5, 0), s2(5, 0);
    const SampleBatch a = draw_standard_batch(s1, 4, 2);
    const SampleBatch b = draw_standard_batch(s2, 4, 2);
    EXPECT_EQ(a, b);
    const RngStream ref(5, 0);
    EXPECT_EQ(a(2, 1), standard_normal_quantile(bits_to_open_uniform(ref.bits_at(5))));
    EXPECT_EQ(s1.position(), 8u);
}

TEST(DrawStandardBatch, MomentsWithinClt) {
    const std::size_t n = 1000000;
    RngStream s(2024, 0);
    const SampleBatch z = draw_standard_batch(s, n, 1);
    const SampleMoments m = sample_moments(z);
    EXPECT_LE(std::abs(m.mean[0]), 4.0 / std::sqrt(double(n)));
    EXPECT_LE(std::abs(m.cov(0, 0) - 1.0), 4.0 * std::sqrt(2.0 / double(n)));
}

TEST(DrawStandardBatch, DistinctStreamsUncorrelated) {
    const std::size_t n = 1000000;
    RngStream s0(99, 0), s1(99, 1);
    const SampleBatch a = draw_standard_batch(s0, n, 1);
    const SampleBatch b = draw_standard_batch(s1, n, 1);
    double sab = 0.0, sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sa += a(k, 0);
        sb += b(k, 0);
        sab += a(k, 0) * b(k, 0);
        saa += a(k, 0) * a(k, 0);
        sbb += b(k, 0) * b(k, 0);
    }
    const double dn = double(n);
    const double cov = sab / dn - sa / dn * sb / dn;
    const double r = cov / std::sqrt((saa / dn - sa * sa / dn / dn) * (sbb / dn - sb * sb / dn / dn));
    EXPECT_LT(std::abs(r), 4.0 / std::sqrt(dn));
}

TEST(Correlate, Examples) {
    RngStream s(3, 0);
    const SampleBatch z = draw_standard_batch(s, 10, 3);
    EXPECT_EQ(correlate(z, MomentSpec::standard(3)), z);

    const MomentSpec scalar({2.0}, SymMatrix{{9.0}});
    const SampleBatch one = correlate(SampleBatch::from_scalars({1.0}), scalar);
    EXPECT_NEAR(one(0, 0), 5.0, 1e-14);

    EXPECT_MMC_ERROR(correlate(z, MomentSpec::standard(2)), ErrorCode::DimensionMismatch);
}

TEST(Correlate, CovarianceWithinClt) {
    const SymMatrix sigma{{1.0, 0.5}, {0.5, 1.0}};
    RngStream s(4, 0);
    const SampleBatch x = correlate(draw_standard_batch(s, 1000000, 2), MomentSpec({0.0, 0.0}, sigma));
    EXPECT_LE(max_abs(sample_moments(x).cov - sigma.matrix()), 0.01);
}

TEST(MomentSpec, RejectsNonSpd) {
    EXPECT_MMC_ERROR(MomentSpec({0.0, 0.0}, SymMatrix({{1.0, 2.0}, {2.0, 1.0}})), ErrorCode::NotPositiveDefinite);
    EXPECT_MMC_ERROR(MomentSpec({0.0}, SymMatrix::identity(2)), ErrorCode::DimensionMismatch);
    const MomentSpec spec({1.0, 2.0}, SymMatrix{{4.0, 1.0}, {1.0, 2.0}});
    EXPECT_LE(max_abs(spec.cov_sqrt() * spec.cov_sqrt() - spec.cov().matrix()), 1e-10);
}

TEST(SampleMoments, Examples) {
    const SampleMoments a = sample_moments(SampleBatch::from_scalars({-1.0, 1.0}));
    EXPECT_EQ(a.mean[0], 0.0);
    EXPECT_EQ(a.cov(0, 0), 1.0);
    const SampleMoments b = sample_moments(SampleBatch::from_scalars({1.0, 2.0, 3.0}));
    EXPECT_DOUBLE_EQ(b.mean[0], 2.0);
    EXPECT_DOUBLE_EQ(b.cov(0, 0), 2.0 / 3.0);
    const SampleMoments c = sample_moments(SampleBatch(3, 2, {1.5, -2.0, 1.5, -2.0, 1.5, -2.0}));
    EXPECT_EQ(max_abs(c.cov), 0.0);
    EXPECT_MMC_ERROR(sample_moments(SampleBatch::from_scalars({1.0})), ErrorCode::TooFewSamples);
}

TEST(SampleMoments, AffineEquivariance) {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rep % 3, big_n = 5 + rep;
        Matrix a(n, n);
        Vector b(n);
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = nd(gen);
            for (std::size_t j = 0; j < n; ++j) a(i, j) = nd(gen);
        }
        SampleBatch x(big_n, n), y(big_n, n);
        for (std::size_t k = 0; k < big_n; ++k) {
            for (std::size_t i = 0; i < n; ++i) x(k, i) = nd(gen);
            const Vector ax = a * x.row(k);
            for (std::size_t i = 0; i < n; ++i) y(k, i) = ax[i] + b[i];
        }
        const SampleMoments mx = sample_moments(x), my = sample_moments(y);
        const Vector amean = a * std::span<const double>(mx.mean);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(my.mean[i], amean[i] + b[i], 1e-12 * (1 + std::abs(my.mean[i])));
        const Matrix expect = a * mx.cov.matrix() * a.transposed();
        EXPECT_LE(max_abs(my.cov - expect), 1e-12 * std::max(1.0, max_abs(expect)));
    }
}
