#include "oracles.hpp"

#include "sch/errors.hpp"
#include "sch/noise.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace {

using namespace sch;
constexpr double pi = std::numbers::pi;

// Published Philox4x32-10 known-answer vectors.
TEST(Philox, KnownAnswers)
{
    using A4 = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
              (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
              (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Wiener, SeededDrawsAreReproducible)
{
    WienerProcess a(4, 42), b(4, 42);
    const auto x = a.sample_increment(1.0);
    const auto y = b.sample_increment(1.0);
    ASSERT_EQ(x.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(std::bit_cast<std::uint64_t>(x[k]), std::bit_cast<std::uint64_t>(y[k]));
    }
    EXPECT_EQ(a.cursor(), 1);
    EXPECT_EQ(a.increment(0, 1.0), x);
    EXPECT_NE(a.sample_increment(1.0), x);
    EXPECT_NE(WienerProcess(4, 43).increment(0, 1.0), x);
    EXPECT_NE(WienerProcess(4, 42, 1).increment(0, 1.0), x);
}

TEST(Wiener, MeanAndVarianceOfManyDraws)
{
    const double dt = 0.01;
    const int n = 100000;
    WienerProcess w(1, 7);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = w.sample_increment(dt)[0];
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(dt / n));
    EXPECT_LE(std::abs(var - dt), 0.05 * dt);
}

TEST(Wiener, ModesAreUncorrelated)
{
    WienerProcess w(2, 8);
    double cross = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const auto x = w.sample_increment(1.0);
        cross += x[0] * x[1];
    }
    EXPECT_LE(std::abs(cross / n), 4.0 / std::sqrt(n));
}

TEST(Wiener, NestedIncrementsSumBaseIncrements)
{
    WienerProcess w(3, 9, 0, 1e-3);
    const auto coarse = w.nested_increment(0.002, 0.004);
    std::vector<double> sum(3, 0.0);
    for (int i = 2; i < 6; ++i) {
        const auto b = w.nested_increment(i * 1e-3, 1e-3);
        for (std::size_t k = 0; k < 3; ++k) {
            sum[k] += b[k];
        }
    }
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(coarse[k], sum[k], 1e-15);
    }
    EXPECT_THROW(w.nested_increment(0.0005, 1e-3), PreconditionViolated);
    EXPECT_THROW(WienerProcess(3, 9).nested_increment(0.0, 1e-3), PreconditionViolated);
    EXPECT_EQ(w.increment_for(7, 0.002, 0.004), coarse);
}

TEST(Wiener, BridgeSplitConservesIncrementWithQuarterVariance)
{
    WienerProcess w(1, 10);
    const double dt = 0.04;
    double sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto inc = w.increment(i, dt);
        const auto [a, b] = w.bridge_split(inc, dt, i, 0);
        EXPECT_NEAR(a[0] + b[0], inc[0], 1e-15);
        sq += std::pow(a[0] - 0.5 * inc[0], 2);
    }
    EXPECT_LE(std::abs(sq / n - dt / 4), 0.05 * dt / 4);
    const std::vector<double> wrong(2, 0.0);
    EXPECT_THROW(w.bridge_split(wrong, dt, 0, 0), DimensionMismatch);
}

TEST(Diffusion, AdditiveColumnsFollowDecayRule)
{
    const auto basis = Basis::make(Domain::interval(2.0, 16));
    const auto b = DiffusionOperator::additive(basis, 4, 0.3, 1.5, true);
    ASSERT_EQ(b.mode_count(), 4);
    EXPECT_TRUE(b.mean_zero());
    double hs = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double mu = std::pow((k + 1) * pi / 2.0, 2);
        const auto& col = b.columns()[static_cast<std::size_t>(k)];
        EXPECT_EQ(col.mean(), 0.0);
        EXPECT_NEAR(col[static_cast<std::size_t>(k + 1)], 0.3 * std::pow(1.0 + mu, -1.5), 1e-15);
        hs += std::pow(norm(col, norm_h), 2);
    }
    EXPECT_NEAR(b.hilbert_schmidt_norm(), std::sqrt(hs), 1e-15);
    const auto c = DiffusionOperator::additive(basis, 4, 0.3, 1.5, false);
    EXPECT_FALSE(c.mean_zero());
    EXPECT_NEAR(c.columns()[0].mean(), 0.3, 1e-15);
    EXPECT_EQ(c.lipschitz_constant(), 0.0);
    EXPECT_THROW(DiffusionOperator::additive(basis, 17, 0.3, 1.0, true), DimensionMismatch);
}

TEST(Diffusion, ApplyExamples)
{
    const auto basis = Basis::make(Domain::interval(1.0, 8));
    const auto b = DiffusionOperator::from_columns(basis, {SpectralField::cosine(basis, 1.0, 1)});
    const auto state = SpectralField::zeros(basis);
    const std::vector<double> one{1.0}, zero{0.0};
    EXPECT_TRUE(b.apply(state, one) == SpectralField::cosine(basis, 1.0, 1));
    EXPECT_EQ(norm(b.apply(state, zero), norm_h), 0.0);
    const std::vector<double> two(2, 1.0);
    EXPECT_THROW(b.apply(state, two), DimensionMismatch);
    const auto m = DiffusionOperator::multiplicative(basis, 3, 0.2, 1.0, 1.0);
    EXPECT_EQ(norm(m.apply(SpectralField::constant(basis, 0.5), std::vector<double>(3, 0.0)), norm_h), 0.0);
}

TEST(Diffusion, SmoothingScalesModes)
{
    const auto basis = Basis::make(Domain::interval(1.0, 8));
    const auto b = DiffusionOperator::from_columns(
        basis, {SpectralField::constant(basis, 2.0), SpectralField::cosine(basis, 1.0, 1)});
    const auto s = b.smooth(1);
    EXPECT_EQ(s.smoothing_level(), 1);
    EXPECT_TRUE(s.columns()[0] == b.columns()[0]);
    EXPECT_NEAR(s.columns()[1][1], std::pow(1.0 + pi * pi, -3), 1e-15);
    EXPECT_LE(s.hilbert_schmidt_norm(), b.hilbert_schmidt_norm());
    EXPECT_THROW(b.smooth(0), PreconditionViolated);
}

TEST(Diffusion, SmoothedOperatorConverges)
{
    const auto basis = Basis::make(Domain::interval(10.0, 32));
    const auto b = DiffusionOperator::additive(basis, 16, 1.0, 0.25, true);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {1, 10, 100, 1000}) {
        const auto s = b.smooth(n);
        double d = 0.0;
        for (int k = 0; k < b.mode_count(); ++k) {
            d += std::pow(norm(s.columns()[static_cast<std::size_t>(k)] - b.columns()[static_cast<std::size_t>(k)], norm_h), 2);
        }
        d = std::sqrt(d);
        EXPECT_LT(d, prev);
        EXPECT_LE(s.hilbert_schmidt_norm(), b.hilbert_schmidt_norm());
        prev = d;
    }
    EXPECT_LT(prev, 0.1 * b.hilbert_schmidt_norm());
}

TEST(Diffusion, MultiplicativeIsMeanZeroAndLipschitz)
{
    const auto basis = Basis::make(Domain::interval(1.0, 16));
    const auto b = DiffusionOperator::multiplicative(basis, 8, 0.5, 0.5, 0.7);
    EXPECT_EQ(b.kind(), NoiseKind::Multiplicative);
    EXPECT_TRUE(b.mean_zero());
    const double nb = b.lipschitz_constant();
    EXPECT_GT(nb, 0.0);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        auto c1 = oracle::random_coefficients(rng, 16, 0.5, false);
        auto c2 = oracle::random_coefficients(rng, 16, 0.5, false);
        const SpectralField v1(basis, c1), v2(basis, c2);
        double hs = 0.0;
        for (int k = 0; k < b.mode_count(); ++k) {
            const auto a1 = b.column(v1, k), a2 = b.column(v2, k);
            EXPECT_EQ(a1.mean(), 0.0);
            hs += std::pow(norm(a1 - a2, norm_h), 2);
        }
        EXPECT_LE(std::sqrt(hs), nb * norm(v1 - v2, norm_h) * (1 + 1e-12));
        // apply() is the increment-weighted sum of the columns
        std::vector<double> dw(8);
        std::normal_distribution<double> z;
        for (auto& x : dw) {
            x = z(rng);
        }
        SpectralField sum = SpectralField::zeros(basis);
        for (int k = 0; k < 8; ++k) {
            sum += dw[static_cast<std::size_t>(k)] * b.column(v1, k);
        }
        EXPECT_LE(norm(b.apply(v1, dw) - sum, norm_h), 1e-12);
    }
    EXPECT_THROW(DiffusionOperator::multiplicative(basis, 8, 0.5, 0.5, 0.0), ValidationError);
}

TEST(Diffusion, ConstantMapIgnoresState)
{
    const auto basis = Basis::make(Domain::interval(1.0, 16));
    const auto b = DiffusionOperator::multiplicative(basis, 8, 0.5, 0.5, 1.0, MultiplicativeMap::Constant);
    const auto add = DiffusionOperator::additive(basis, 8, 0.5, 0.5, true);
    std::mt19937_64 rng(12);
    const SpectralField v(basis, oracle::random_coefficients(rng, 16, 0.5, false));
    const std::vector<double> dw{0.1, -0.2, 0.3, 0.05, 0.0, 1.0, -1.0, 0.5};
    EXPECT_TRUE(b.apply(v, dw) == add.apply(v, dw));
    EXPECT_EQ(b.lipschitz_constant(), 0.0);
}

TEST(Ledger, EmptyAndMeanZeroCases)
{
    const auto basis = Basis::make(Domain::interval(1.0, 16));
    const auto b = DiffusionOperator::additive(basis, 8, 0.5, 0.5, true);
    NoiseLedger ledger(b);
    EXPECT_EQ(norm(ledger.value(), norm_h), 0.0);
    WienerProcess w(8, 13);
    for (int n = 0; n < 1000; ++n) {
        ledger.accumulate(w.sample_increment(1e-3));
    }
    EXPECT_EQ(ledger.steps(), 1000);
    EXPECT_LE(std::abs(ledger.mean()), 1e-13);
    EXPECT_GT(norm(ledger.value(), norm_h), 0.0);
}

TEST(Ledger, ConstantColumnTracksScalarBrownianSum)
{
    const auto basis = Basis::make(Domain::interval(3.0, 8));
    const auto b = DiffusionOperator::from_columns(
        basis, {SpectralField::constant(basis, 1.0), SpectralField::cosine(basis, 0.5, 2)});
    EXPECT_FALSE(b.mean_zero());
    NoiseLedger ledger(b);
    WienerProcess w(2, 14);
    double w0 = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const auto inc = w.sample_increment(1e-2);
        w0 += inc[0];
        ledger.accumulate(inc);
        ASSERT_LE(std::abs(ledger.mean() - w0), 1e-13);
    }
}

TEST(Ledger, RejectsMultiplicativeNoise)
{
    const auto basis = Basis::make(Domain::interval(1.0, 16));
    EXPECT_THROW(NoiseLedger(DiffusionOperator::multiplicative(basis, 4, 0.5, 0.5, 1.0)), KindMismatch);
}

}  // namespace
