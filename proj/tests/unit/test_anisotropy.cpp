#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "wulffflow/anisotropy.hpp"
#include "wulffflow/errors.hpp"
#include "wulffflow/identities.hpp"

using namespace wulffflow;

namespace {

Anisotropy diag41() { return Anisotropy::bgn(2.0, {Mat(vec({4.0, 1.0}).asDiagonal())}); }

// Two rotated ellipses with q = 3: no closed-form polar.
Anisotropy two_ellipses()
{
    Mat G1(2, 2), G2(2, 2);
    G1 << 3.0, 0.5, 0.5, 1.0;
    G2 << 1.0, -0.3, -0.3, 2.0;
    return Anisotropy::bgn(3.0, {G1, G2});
}

Anisotropy ellipsoid3()
{
    Mat G(3, 3);
    G << 2.0, 0.2, 0.0, 0.2, 1.0, 0.1, 0.0, 0.1, 0.5;
    Mat H = Mat::Identity(3, 3);
    return Anisotropy::bgn(2.5, {G, H});
}

Vec unit(std::mt19937_64& rng, int d)
{
    std::normal_distribution<double> g;
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = g(rng);
    return v / v.norm();
}

}  // namespace

TEST(Sigma, Examples)
{
    EXPECT_DOUBLE_EQ(Anisotropy::euclidean(2).sigma(vec({3, 4})), 5.0);
    EXPECT_DOUBLE_EQ(diag41().sigma(vec({1, 0})), 2.0);
    EXPECT_EQ(diag41().sigma(vec({0, 0})), 0.0);
    EXPECT_EQ(two_ellipses().sigma(vec({0, 0})), 0.0);
    EXPECT_THROW(diag41().sigma(vec({std::numeric_limits<double>::quiet_NaN(), 0})), InputError);
    EXPECT_THROW(diag41().sigma(vec({1, 0, 0})), InputError);
}

TEST(Sigma, RejectsInadmissibleMatrices)
{
    Mat singular(2, 2);
    singular << 1.0, 0.0, 0.0, 0.0;
    EXPECT_THROW(Anisotropy::bgn(2.0, {singular}), InputError);
    Mat asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    EXPECT_THROW(Anisotropy::bgn(2.0, {asym}), InputError);
    EXPECT_THROW(Anisotropy::bgn(0.5, {Mat::Identity(2, 2)}), InputError);
    EXPECT_THROW(Anisotropy::bgn(2.0, {}), InputError);
}

TEST(Dsigma, Examples)
{
    const Vec g = Anisotropy::euclidean(2).dsigma(vec({0, 1}));
    EXPECT_NEAR(g(0), 0.0, 1e-15);
    EXPECT_NEAR(g(1), 1.0, 1e-15);

    const Anisotropy a = diag41();
    const Vec d = a.dsigma(vec({1, 0}));
    EXPECT_NEAR(d(0), 2.0, 1e-14);
    EXPECT_NEAR(d(1), 0.0, 1e-14);
    // central-difference oracle at step 1e-6
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
        Vec e = Vec::Zero(2);
        e(j) = h;
        const double fd = (a.sigma(Vec(vec({1, 0}) + e)) - a.sigma(Vec(vec({1, 0}) - e))) / (2 * h);
        EXPECT_NEAR(fd, d(j), 1e-6);
    }
    const Anisotropy b = two_ellipses();
    const Vec p = vec({0.3, -0.7});
    EXPECT_LT((b.dsigma(p) - b.dsigma(Vec(7.0 * p))).norm(), 1e-14);
    EXPECT_THROW(a.dsigma(vec({0, 0})), DomainError);
}

TEST(D2sigma, Examples)
{
    const Mat H = Anisotropy::euclidean(2).d2sigma(vec({1, 0}));
    EXPECT_NEAR(H(0, 0), 0.0, 1e-15);
    EXPECT_NEAR(H(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(H(1, 1), 1.0, 1e-15);
    EXPECT_LT((diag41().d2sigma(vec({1, 0})) * vec({1, 0})).norm(), 1e-14);
    EXPECT_THROW(diag41().d2sigma(vec({0, 0})), DomainError);

    // finite-difference Hessian oracle on a random BGN anisotropy, and
    // (−1)-homogeneity
    std::mt19937_64 rng(7);
    for (const Anisotropy& a : {two_ellipses(), ellipsoid3()}) {
        for (int i = 0; i < 50; ++i) {
            const Vec p = unit(rng, a.dim());
            const Mat Hp = a.d2sigma(p);
            const double h = 1e-5;
            for (int j = 0; j < a.dim(); ++j) {
                Vec e = Vec::Zero(a.dim());
                e(j) = h;
                const Vec col = (a.dsigma(Vec(p + e)) - a.dsigma(Vec(p - e))) / (2 * h);
                EXPECT_LT((col - Hp.col(j)).cwiseAbs().maxCoeff(), 1e-5);
            }
            EXPECT_LT((a.d2sigma(Vec(3.0 * p)) - Hp / 3.0).norm(), 1e-12 * Hp.norm());
        }
    }
}

TEST(Polar, Examples)
{
    EXPECT_NEAR(Anisotropy::euclidean(2).polar(vec({3, 4})), 5.0, 1e-14);
    const Anisotropy a = diag41();
    EXPECT_NEAR(a.polar(vec({1, 0})), 0.5, 1e-14);
    // independent oracle: sup of p·q over 4096 samples of the σ-unit circle
    const Vec q = vec({1, 0});
    double sup = 0.0;
    for (int k = 0; k < 4096; ++k) {
        const double th = 2 * std::numbers::pi * k / 4096;
        const Vec p = vec({std::cos(th), std::sin(th)});
        sup = std::max(sup, p.dot(q) / a.sigma(p));
    }
    EXPECT_NEAR(a.polar(q), sup, 1e-6);
}

TEST(Polar, DualityOfDsigma)
{
    std::mt19937_64 rng(11);
    for (const Anisotropy& a : {diag41(), two_ellipses(), ellipsoid3()}) {
        for (int i = 0; i < 40; ++i) {
            const Vec p = unit(rng, a.dim());
            EXPECT_NEAR(a.polar(a.dsigma(p)), 1.0, 1e-8) << a.describe();
            // generalized Cauchy–Schwarz p·q ≤ σ(p)σ°(q)
            const Vec q = unit(rng, a.dim());
            EXPECT_LE(p.dot(q), a.sigma(p) * a.polar(q) + 1e-12);
        }
    }
}

TEST(Polar, MultiEllipsoidAgainstSampledSupremum)
{
    const Anisotropy a = two_ellipses();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10; ++i) {
        const Vec q = unit(rng, 2) * 1.7;
        double sup = 0.0;
        for (int k = 0; k < 20000; ++k) {
            const double th = 2 * std::numbers::pi * k / 20000;
            const Vec p = vec({std::cos(th), std::sin(th)});
            sup = std::max(sup, p.dot(q) / a.sigma(p));
        }
        EXPECT_NEAR(a.polar(q), sup, 1e-7);
    }
}

TEST(Cutoff, Shape)
{
    const Cutoff psi;
    EXPECT_EQ(psi(0.2), 0.0);
    EXPECT_EQ(psi(0.6), 1.0);
    double prev = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double r = 0.7 * k / 1000.0;
        const double v = psi(r);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_GE(v, prev);
        EXPECT_GE(psi.derivative(r), 0.0);
        prev = v;
    }
    // derivative matches the function
    for (double r : {0.3, 0.375, 0.45}) EXPECT_NEAR((psi(r + 1e-6) - psi(r - 1e-6)) / 2e-6, psi.derivative(r), 1e-6);
}

TEST(CahnHoffman, Examples)
{
    const Cutoff psi;
    const Anisotropy e = Anisotropy::euclidean(2);
    EXPECT_EQ(cahn_hoffman_trunc(e, psi, vec({0, 0})).norm(), 0.0);
    EXPECT_EQ(cahn_hoffman_trunc(diag41(), psi, vec({0.2, 0.1})).norm(), 0.0);
    const Vec f = cahn_hoffman_trunc(e, psi, vec({0.8, 0}));
    EXPECT_NEAR(f(0), 0.8, 1e-15);
    EXPECT_NEAR(f(1), 0.0, 1e-15);
}

TEST(Dziuk, GapExamples)
{
    const Cutoff psi;
    const Anisotropy a = diag41();
    const Vec p = vec({0.6, 0.8});
    EXPECT_NEAR(dziuk_gap(a, psi, p, p), 0.0, 1e-14);
    EXPECT_NEAR(dziuk_gap(a, psi, p, vec({0, 0})), a.sigma(p), 1e-15);
    EXPECT_THROW(dziuk_gap(a, psi, vec({1, 1}), p), InputError);
    EXPECT_THROW(dziuk_gap(a, psi, p, vec({1, 1})), InputError);
}

TEST(Dziuk, FittedConstants)
{
    const Cutoff psi;
    const auto ce = fit_dziuk_constants(Anisotropy::euclidean(2), psi, 20000);
    EXPECT_GE(ce.c_sigma, 0.49);
    EXPECT_LE(ce.c_sigma, ce.C_sigma);
    for (const Anisotropy& a : {diag41(), two_ellipses(), ellipsoid3()}) {
        const auto k = fit_dziuk_constants(a, psi, 5000);
        EXPECT_GT(k.c_sigma, 0.0);
        EXPECT_TRUE(std::isfinite(k.C_sigma));
        EXPECT_LE(k.c_sigma, k.C_sigma);
    }
    EXPECT_THROW(fit_dziuk_constants(diag41(), psi, 999), InputError);
}

// Sandwich on 10⁵ fresh pairs (the fit's four-way sampling mixture, new
// seed) against constants fitted on 10⁵ others. Fresh draws may probe
// slightly beyond the fitted extremes, hence the factor-2 margin.
TEST(Dziuk, SandwichOnFreshSamples)
{
    const Cutoff psi;
    for (const Anisotropy& a : {diag41(), two_ellipses()}) {
        const auto k = fit_dziuk_constants(a, psi, 100000, 1);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (int i = 0; i < 100000; ++i) {
            const Vec p = unit(rng, 2);
            Vec pp;
            switch (i % 4) {
            case 0: pp = unit(rng, 2) * std::sqrt(u01(rng)); break;
            case 1: pp = unit(rng, 2); break;
            case 2:
                pp = p + std::pow(10.0, -3.0 + 3.0 * u01(rng)) * unit(rng, 2);
                if (pp.norm() > 1.0) pp /= pp.norm();
                break;
            default: {
                const Vec dir = p + std::pow(10.0, -3.0 + 3.0 * u01(rng)) * unit(rng, 2);
                pp = dir / dir.norm() * (0.25 + 0.75 * u01(rng));
            }
            }
            const double gap = dziuk_gap(a, psi, p, pp);
            const double d2 = (p - pp).squaredNorm();
            ASSERT_GE(gap, -1e-14);
            if (d2 > 1e-6) ASSERT_GE(gap, 0.5 * k.c_sigma * d2);
            ASSERT_LE(gap, 2.0 * k.C_sigma * (d2 + 1.0 - pp.norm()) + 1e-14);
        }
    }
}

TEST(Wulff, BoundaryPointsAndContainment)
{
    const Anisotropy e = Anisotropy::euclidean(2);
    for (const Vec& p : wulff_boundary_points(e, 1.0, 64)) EXPECT_NEAR(p.norm(), 1.0, 1e-14);
    const Anisotropy a = diag41();
    for (const Vec& p : wulff_boundary_points(a, 1.0, 128)) EXPECT_NEAR(a.polar(p), 1.0, 1e-8);
    const Vec x = vec({0.6, 0.0});  // σ°(x) = 0.3
    EXPECT_TRUE(wulff_contains(a, x, 0.3));
    EXPECT_FALSE(wulff_contains(a, x, 0.3 - 1e-9));
    EXPECT_THROW(wulff_boundary_points(ellipsoid3(), 1.0, 16), InputError);
}

TEST(Identities, AllPass)
{
    for (const Anisotropy& a : {Anisotropy::euclidean(2), Anisotropy::euclidean(3), diag41(), two_ellipses(),
                                ellipsoid3()}) {
        for (const auto& row : anisotropy_identities(a)) {
            EXPECT_TRUE(row.ok) << a.describe() << " " << row.name << " = " << row.max_abs_error;
            EXPECT_GT(row.samples, 0);
        }
    }
}

TEST(Identities, EuclideanTableIsExact)
{
    for (const auto& row : anisotropy_identities(Anisotropy::euclidean(2))) EXPECT_LE(row.max_abs_error, 1e-10) << row.name;
}

TEST(Identities, DoublePolarMatchesSigma)
{
    std::mt19937_64 rng(3);
    const Anisotropy a = two_ellipses();
    for (int i = 0; i < 10; ++i) {
        const Vec q = unit(rng, 2);
        EXPECT_NEAR(double_polar(a, q), a.sigma(q), 1e-5);
    }
}

TEST(Mobility, Lipschitz)
{
    // sampled difference quotients on the unit sphere stay bounded
    const Anisotropy a = two_ellipses();
    const auto dirs = sphere_directions(2, 2000);
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < dirs.size(); ++i)
        L = std::max(L, std::abs(a.sigma(dirs[i + 1]) - a.sigma(dirs[i])) / (dirs[i + 1] - dirs[i]).norm());
    EXPECT_LE(L, a.dsigma_max() * 1.01);
}
