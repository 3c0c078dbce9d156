#include "oracles.hpp"

#include "sch/errors.hpp"
#include "sch/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace {

using namespace sch;
constexpr double pi = std::numbers::pi;

BasisPtr unit_interval(int modes = 8) { return Basis::make(Domain::interval(1.0, modes)); }

SpectralField random_field(const BasisPtr& basis, std::mt19937_64& rng, bool mean_zero = false)
{
    return SpectralField(basis, oracle::random_coefficients(rng, static_cast<std::size_t>(basis->size()), 1.0,
                                                            mean_zero));
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

TEST(Domain, RejectsInvalidShapes)
{
    EXPECT_THROW(Domain::interval(1.0, 1).validate(), ValidationError);
    EXPECT_THROW(Domain::interval(-1.0, 8).validate(), ValidationError);
    EXPECT_THROW(Domain::rectangle(1.0, 1.0, 8, 1).validate(), ValidationError);
    EXPECT_THROW(Basis(Domain{3, {1.0, 1.0}, {4, 4}}), ValidationError);
    EXPECT_NO_THROW(Domain::rectangle(1.0, 2.0, 2, 2).validate());
}

TEST(Eigensystem, UnitIntervalMatchesFiniteDifferenceOracle)
{
    const auto basis = Basis::make(Domain::interval(1.0, 3));
    const auto mu = basis->eigenvalues();
    ASSERT_EQ(mu.size(), 3u);
    EXPECT_EQ(mu[0], 0.0);
    EXPECT_NEAR(mu[1], pi * pi, 1e-12);
    EXPECT_NEAR(mu[2], 4 * pi * pi, 1e-12);
    const auto fd = oracle::fd_neumann_eigenvalues_1d(1.0, 800);
    EXPECT_NEAR(fd[0], 0.0, 1e-8);
    for (int k = 1; k < 3; ++k) {
        EXPECT_LE(rel(mu[static_cast<std::size_t>(k)], fd[static_cast<std::size_t>(k)]), 1e-3);
    }
}

TEST(Eigensystem, ConstantModeHasZeroEigenvalueForAnyLength)
{
    for (double length : {0.3, 1.0, 7.5, 100.0}) {
        const auto basis = Basis::make(Domain::interval(length, 5));
        EXPECT_EQ(basis->eigenvalues()[0], 0.0);
        for (std::size_t k = 1; k < 5; ++k) {
            EXPECT_NEAR(basis->eigenvalues()[k], std::pow(k * pi / length, 2), 1e-12 * basis->eigenvalues()[k]);
        }
    }
}

TEST(Eigensystem, RectangleMatchesFiniteDifferenceOracle)
{
    const auto basis = Basis::make(Domain::rectangle(1.0, 1.0, 3, 3));
    EXPECT_NEAR(basis->eigenvalues()[static_cast<std::size_t>(basis->flat_index(1, 1))], 2 * pi * pi, 1e-12);
    const auto fd = oracle::fd_neumann_eigenvalues_2d(1.0, 1.0, 40, 40);
    // ascending spectrum: 0, pi^2 (twice), 2 pi^2, ...
    EXPECT_LE(rel(fd[3], 2 * pi * pi), 1e-3);
    const auto& sys = basis->eigensystem();
    ASSERT_EQ(sys.modes.size(), 9u);
    EXPECT_NEAR(fd[0], 0.0, 1e-8);
    for (std::size_t i = 1; i < 4; ++i) {
        EXPECT_LE(rel(sys.modes[i].value, fd[i]), 1e-3) << i;
    }
}

TEST(Eigensystem, SortedWithConstantModeFirst)
{
    const auto basis = Basis::make(Domain::rectangle(2.0, 0.7, 6, 5));
    const auto& modes = basis->eigensystem().modes;
    ASSERT_EQ(static_cast<int>(modes.size()), basis->size());
    EXPECT_EQ(modes[0].value, 0.0);
    EXPECT_EQ(modes[0].flat, 0);
    for (std::size_t i = 1; i < modes.size(); ++i) {
        EXPECT_GT(modes[i].value, 0.0);
        EXPECT_LE(modes[i - 1].value, modes[i].value);
        EXPECT_EQ(basis->eigenvalues()[static_cast<std::size_t>(modes[i].flat)], modes[i].value);
    }
}

TEST(Field, MeanIsConstantCoefficientAndMatchesQuadrature)
{
    std::mt19937_64 rng(3);
    const auto basis = Basis::make(Domain::interval(2.5, 12));
    const auto v = random_field(basis, rng);
    std::vector<double> c(v.coefficients().begin(), v.coefficients().end());
    const double q = oracle::quadrature([&](double x) { return oracle::cosine_series(c, 2.5, x); }, 0.0, 2.5) / 2.5;
    EXPECT_EQ(v.mean(), v[0]);
    EXPECT_NEAR(q, v.mean(), 1e-12);
}

TEST(Field, ParsevalAgainstQuadrature1D)
{
    std::mt19937_64 rng(4);
    const auto basis = Basis::make(Domain::interval(3.0, 16));
    const auto v = random_field(basis, rng);
    std::vector<double> c(v.coefficients().begin(), v.coefficients().end());
    const double q = oracle::quadrature(
        [&](double x) {
            const double f = oracle::cosine_series(c, 3.0, x);
            return f * f;
        },
        0.0, 3.0);
    EXPECT_LE(rel(norm(v, norm_h), std::sqrt(q)), 1e-12);
    EXPECT_LE(rel(inner(v, v), q), 1e-12);
}

TEST(Field, ParsevalAgainstQuadrature2D)
{
    std::mt19937_64 rng(5);
    const auto basis = Basis::make(Domain::rectangle(1.0, 2.0, 5, 4));
    const auto v = random_field(basis, rng);
    std::vector<double> c(v.coefficients().begin(), v.coefficients().end());
    const double q = oracle::quadrature(
        [&](double x) {
            return oracle::quadrature(
                [&](double y) {
                    const double f = oracle::cosine_series_2d(c, 5, 4, 1.0, 2.0, x, y);
                    return f * f;
                },
                0.0, 2.0, 20);
        },
        0.0, 1.0, 20);
    EXPECT_LE(rel(inner(v, v), q), 1e-11);
}

TEST(Field, GridValuesMatchDirectSummation)
{
    std::mt19937_64 rng(6);
    const auto basis = Basis::make(Domain::interval(1.7, 10));
    const auto v = random_field(basis, rng);
    std::vector<double> c(v.coefficients().begin(), v.coefficients().end());
    const auto pts = basis->grid_points();
    const auto vals = v.grid_values();
    ASSERT_EQ(vals.size(), 20u);
    for (std::size_t j = 0; j < vals.size(); ++j) {
        EXPECT_NEAR(pts[j][0], (j + 0.5) * 1.7 / 20, 1e-15);
        EXPECT_NEAR(vals[j], oracle::cosine_series(c, 1.7, pts[j][0]), 1e-13);
    }
    const auto fine = v.grid_values({64, 1});
    ASSERT_EQ(fine.size(), 64u);
    for (std::size_t j = 0; j < 64; ++j) {
        EXPECT_NEAR(fine[j], oracle::cosine_series(c, 1.7, (j + 0.5) * 1.7 / 64), 1e-13);
    }
    EXPECT_LE(norm(SpectralField::from_grid(basis, vals) - v, norm_h), 1e-14);
}

TEST(Transform, FastMatchesDense)
{
    std::mt19937_64 rng(7);
    for (const Domain& d : {Domain::interval(1.0, 33), Domain::rectangle(1.0, 2.0, 12, 7)}) {
        const auto fast = Basis::make(d, TransformBackend::Fast);
        const auto dense = Basis::make(d, TransformBackend::Dense);
        const auto c = oracle::random_coefficients(rng, static_cast<std::size_t>(fast->size()), 0.0, false);
        std::vector<double> gf(static_cast<std::size_t>(fast->grid_size())), gd(gf.size());
        fast->transform().synthesize(c, gf);
        dense->transform().synthesize(c, gd);
        for (std::size_t j = 0; j < gf.size(); ++j) {
            EXPECT_NEAR(gf[j], gd[j], 1e-12);
        }
        std::vector<double> grid(gf.size());
        std::normal_distribution<double> z;
        for (auto& g : grid) {
            g = z(rng);
        }
        std::vector<double> cf(c.size()), cd(c.size()), back(c.size());
        fast->transform().analyze(grid, cf);
        dense->transform().analyze(grid, cd);
        for (std::size_t k = 0; k < c.size(); ++k) {
            EXPECT_NEAR(cf[k], cd[k], 1e-12);
        }
        fast->transform().analyze(gf, back);
        for (std::size_t k = 0; k < c.size(); ++k) {
            EXPECT_NEAR(back[k], c[k], 1e-12);
        }
    }
}

TEST(Transform, RejectsWrongSizes)
{
    const auto basis = unit_interval(4);
    std::vector<double> c(4), g(7);
    EXPECT_THROW(basis->transform().synthesize(c, g), DimensionMismatch);
}

TEST(Laplacian, ConstantMapsToZero)
{
    const auto basis = unit_interval();
    const auto z = apply_laplacian(SpectralField::constant(basis, 3.2));
    EXPECT_EQ(norm(z, norm_h), 0.0);
}

TEST(Laplacian, CosineEigenRelationAgainstFiniteDifferences)
{
    const auto basis = unit_interval();
    const auto lap = apply_laplacian(SpectralField::cosine(basis, 1.0, 1));
    EXPECT_NEAR(lap[1], -pi * pi, 1e-12);
    // second difference of cos(pi x) on a fine grid approximates the same values
    const int n = 2000;
    const double h = 1.0 / n;
    const auto fine = lap.grid_values({n, 1});
    for (int j = 1; j < n - 1; j += 97) {
        const double x = (j + 0.5) * h;
        const double fd = (std::cos(pi * (x + h)) - 2 * std::cos(pi * x) + std::cos(pi * (x - h))) / (h * h);
        EXPECT_NEAR(fine[static_cast<std::size_t>(j)], fd, 1e-4);
    }
}

TEST(Laplacian, Linear)
{
    std::mt19937_64 rng(8);
    const auto basis = unit_interval(16);
    const auto v = random_field(basis, rng), z = random_field(basis, rng);
    const auto lhs = apply_laplacian(2.5 * v + (-0.75) * z);
    const auto rhs = 2.5 * apply_laplacian(v) + (-0.75) * apply_laplacian(z);
    EXPECT_LE(norm(lhs - rhs, norm_h), 1e-14 * norm(lhs, norm_h));
}

TEST(InverseNeumann, CosineAndZero)
{
    const auto basis = unit_interval();
    const auto n = apply_inverse_neumann(SpectralField::cosine(basis, 1.0, 1));
    EXPECT_NEAR(n[1], 1.0 / (pi * pi), 1e-15);
    EXPECT_EQ(n.mean(), 0.0);
    EXPECT_EQ(norm(apply_inverse_neumann(SpectralField::zeros(basis)), norm_h), 0.0);
}

TEST(InverseNeumann, RoundTripOnMeanZeroFields)
{
    std::mt19937_64 rng(9);
    for (const Domain& d : {Domain::interval(4.0, 32), Domain::rectangle(1.0, 3.0, 8, 6)}) {
        const auto basis = Basis::make(d);
        for (int i = 0; i < 20; ++i) {
            const auto v = random_field(basis, rng, true);
            const auto back = apply_laplacian(apply_inverse_neumann(v));
            EXPECT_LE(norm(back + v, norm_h), 1e-12 * norm(v, norm_h));
        }
    }
}

TEST(InverseNeumann, RejectsNonzeroMean)
{
    const auto basis = unit_interval();
    auto v = SpectralField::cosine(basis, 1.0, 2);
    v[0] = 1e-6;
    EXPECT_THROW(apply_inverse_neumann(v), NonZeroMean);
    v[0] = 1e-14;
    EXPECT_NO_THROW(apply_inverse_neumann(v));
}

TEST(Resolvent, IdentityAtZeroViscosity)
{
    std::mt19937_64 rng(10);
    const auto basis = unit_interval(16);
    const auto v = random_field(basis, rng);
    EXPECT_TRUE(apply_resolvent(v, 0.0) == v);
    EXPECT_TRUE(apply_viscous_operator(v, 0.0) == v);
}

TEST(Resolvent, CosineEigenRelation)
{
    const auto basis = unit_interval();
    const auto r = apply_resolvent(SpectralField::cosine(basis, 1.0, 1), 1.0);
    EXPECT_NEAR(r[1], 1.0 / (1.0 + pi * pi), 1e-15);
}

TEST(Resolvent, NonexpansiveAndMeanPreserving)
{
    std::mt19937_64 rng(11);
    const auto basis = Basis::make(Domain::interval(5.0, 24));
    for (int i = 0; i < 100; ++i) {
        const auto v = random_field(basis, rng);
        for (double eps : {1e-3, 1e-1, 1.0}) {
            const auto r = apply_resolvent(v, eps);
            EXPECT_EQ(r.mean(), v.mean());
            for (Norm kind : {norm_h, norm_v1, norm_star}) {
                EXPECT_LE(norm(r, kind), norm(v, kind) * (1 + 1e-12));
            }
            EXPECT_LE(norm(apply_viscous_operator(r, eps) - v, norm_h), 1e-12 * norm(v, norm_h));
        }
    }
}

TEST(Operators, CommutePairwise)
{
    std::mt19937_64 rng(12);
    const auto basis = Basis::make(Domain::rectangle(1.0, 1.5, 8, 8));
    const auto v = random_field(basis, rng, true);
    const double eps = 0.05;
    const auto a = apply_laplacian(apply_resolvent(v, eps));
    const auto b = apply_resolvent(apply_laplacian(v), eps);
    EXPECT_LE(norm(a - b, norm_h), 1e-12 * norm(a, norm_h));
    const auto c = apply_inverse_neumann(apply_resolvent(v, eps));
    const auto d = apply_resolvent(apply_inverse_neumann(v), eps);
    EXPECT_LE(norm(c - d, norm_h), 1e-12 * norm(c, norm_h));
    const auto e = apply_inverse_neumann(apply_laplacian(v)) * -1.0;
    EXPECT_LE(norm(e - v, norm_h), 1e-12 * norm(v, norm_h));
}

TEST(Norms, ConstantHasDualNormEqualToItsValue)
{
    const auto basis = unit_interval();
    EXPECT_DOUBLE_EQ(norm(SpectralField::constant(basis, -2.5), norm_star), 2.5);
}

TEST(Norms, CosineDualNormAgainstQuadrature)
{
    const auto basis = unit_interval();
    const auto v = SpectralField::cosine(basis, 1.0, 1);
    // N v = cos(pi x) / pi^2, so grad N v = -sin(pi x) / pi
    const double grad_sq =
        oracle::quadrature([](double x) { return std::pow(std::sin(pi * x) / pi, 2); }, 0.0, 1.0);
    const double h_sq = oracle::quadrature([](double x) { return std::pow(std::cos(pi * x), 2); }, 0.0, 1.0);
    EXPECT_NEAR(norm(v, norm_star), std::sqrt(grad_sq), 1e-14);
    EXPECT_NEAR(norm(v, norm_h), std::sqrt(h_sq), 1e-14);
    EXPECT_NEAR(norm(v, norm_star), norm(v, norm_h) / pi, 1e-15);
}

TEST(Norms, DualNormBoundedBySpectralConstant)
{
    std::mt19937_64 rng(13);
    // C = max(1, mu_1^{-1/2}) covers |D| >= 1; the mean part needs |D|^{-1/2} otherwise
    for (double length : {0.5, 1.0, 10.0}) {
        const auto basis = Basis::make(Domain::interval(length, 16));
        const double c = std::max({1.0, 1.0 / std::sqrt(length), 1.0 / std::sqrt(basis->eigenvalues()[1])});
        for (int i = 0; i < 100; ++i) {
            const auto v = random_field(basis, rng);
            EXPECT_LE(norm(v, norm_star), c * norm(v, norm_h) * (1 + 1e-14));
        }
    }
}

TEST(Norms, DefinitionsFromCoefficients)
{
    std::mt19937_64 rng(14);
    const auto basis = Basis::make(Domain::interval(2.0, 12));
    const auto v = random_field(basis, rng);
    const double g = grad_norm_sq(v);
    std::vector<double> c(v.coefficients().begin(), v.coefficients().end());
    const double gq = oracle::quadrature(
        [&](double x) {
            double s = 0.0;
            for (std::size_t k = 1; k < c.size(); ++k) {
                s -= c[k] * (k * pi / 2.0) * std::sin(k * pi * x / 2.0);
            }
            return s * s;
        },
        0.0, 2.0);
    EXPECT_LE(rel(g, gq), 1e-12);
    const double h2 = inner(v, v);
    EXPECT_NEAR(norm(v, norm_v1), std::sqrt(v.mean() * v.mean() + g), 1e-13);
    EXPECT_NEAR(norm(v, Norm::one_eps(0.3)), std::sqrt(h2 + 0.3 * g), 1e-13);
    const auto lap = apply_laplacian(v);
    EXPECT_NEAR(norm(v, norm_v2), std::sqrt(h2 + inner(lap, lap)), 1e-10);
    EXPECT_NEAR(norm(v, norm_v3), std::sqrt(h2 + grad_norm_sq(lap)), 1e-9 * norm(v, norm_v3));
}

TEST(PhiEps, IdentityAndSymmetry)
{
    std::mt19937_64 rng(15);
    const auto basis = Basis::make(Domain::rectangle(1.0, 2.0, 10, 9));
    for (int i = 0; i < 30; ++i) {
        const auto v = random_field(basis, rng), v2 = random_field(basis, rng);
        for (double eps : {0.0, 1e-3, 1e-2, 1e-1}) {
            const auto z = apply_resolvent(v.without_mean(), eps);
            const double lhs = inner(v, phi_eps(v, eps));
            const double mid = grad_norm_sq(apply_inverse_neumann(z)) + eps * inner(z, z);
            EXPECT_LE(rel(lhs, mid), 1e-12);
            EXPECT_LE(rel(lhs, 2 * Phi_eps(v, eps)), 1e-12);
            EXPECT_GE(Phi_eps(v, eps), 0.0);
            EXPECT_LE(rel(inner(v, phi_eps(v2, eps)), inner(v2, phi_eps(v, eps))), 1e-12);
        }
    }
}

TEST(Quadrature, PointwiseIntegralsAndLpNorms)
{
    const auto basis = unit_interval(16);
    const auto v = SpectralField::constant(basis, 0.5) + SpectralField::cosine(basis, 0.25, 3);
    const double q = oracle::quadrature(
        [](double x) { return std::pow(0.5 + 0.25 * std::cos(3 * pi * x), 4); }, 0.0, 1.0);
    EXPECT_NEAR(integrate_pointwise(v, [](double r) { return r * r * r * r; }), q, 1e-14);
    EXPECT_NEAR(lp_norm(v, 4.0), std::pow(q, 0.25), 1e-14);
    EXPECT_NEAR(lp_norm(SpectralField::constant(basis, -2.0), 1.0), 2.0, 1e-14);
}

TEST(Field, ArithmeticChecksBasis)
{
    const auto a = SpectralField::zeros(unit_interval(4));
    const auto b = SpectralField::zeros(unit_interval(5));
    EXPECT_THROW(a + b, DimensionMismatch);
}

}  // namespace
