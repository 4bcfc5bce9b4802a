#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "wulffflow/errors.hpp"
#include "wulffflow/field.hpp"

using namespace wulffflow;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

PeriodicField random_field(const Grid& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PeriodicField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = u(rng);
    return f;
}

PeriodicField sampled(const Grid& g, double (*fn)(const Vec&))
{
    PeriodicField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = fn(g.center(k));
    return f;
}

double smooth(const Vec& x)
{
    double v = std::sin(kTwoPi * x(0));
    if (x.size() > 1) v *= std::cos(kTwoPi * x(1)) + 2.0;
    return v;
}

// Max error of the forward gradient (component 0, at the staggered
// position) and of div∘grad (at cell centres) against the analytic values.
std::pair<double, double> errors(int n)
{
    const Grid g(2, n);
    const PeriodicField u = sampled(g, smooth);
    const VectorField G = forward_gradient(u);
    const PeriodicField L = neg_adjoint_divergence(G);
    double eg = 0.0, el = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        Vec x = g.center(k);
        const double y = x(1);
        Vec xs = x;
        xs(0) += 0.5 * g.dx();
        eg = std::max(eg, std::abs(G.comp[0][k] - kTwoPi * std::cos(kTwoPi * xs(0)) * (std::cos(kTwoPi * y) + 2.0)));
        // Δ[sin(2πx)(cos(2πy) + 2)] = −(2π)²[sin(2πx)(2cos(2πy) + 2)]
        const double lap = -kTwoPi * kTwoPi * std::sin(kTwoPi * x(0)) * (2.0 * std::cos(kTwoPi * y) + 2.0);
        el = std::max(el, std::abs(L[k] - lap));
    }
    return {eg, el};
}

}  // namespace

TEST(Grid, Geometry)
{
    const Grid g(3, 4, 2.0);
    EXPECT_EQ(g.size(), 64u);
    EXPECT_DOUBLE_EQ(g.dx(), 0.5);
    EXPECT_DOUBLE_EQ(g.cell_volume(), 0.125);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(g.flat(g.index(k)), k);
    const Vec c = g.center(g.flat({1, 2, 3}));
    EXPECT_DOUBLE_EQ(c(0), 0.75);
    EXPECT_DOUBLE_EQ(c(1), 1.25);
    EXPECT_DOUBLE_EQ(c(2), 1.75);
    EXPECT_THROW(Grid(4, 8), InputError);
    EXPECT_THROW(Grid(2, 1), InputError);
    EXPECT_THROW(Grid(2, 8, 0.0), InputError);
}

TEST(Gradient, ConstantIsZero)
{
    const VectorField G = forward_gradient(PeriodicField(Grid(2, 8), 3.0));
    for (const auto& c : G.comp)
        for (std::size_t k = 0; k < c.size(); ++k) EXPECT_EQ(c[k], 0.0);
}

TEST(Gradient, TwoPointAlternating)
{
    const Grid g(1, 2);
    const VectorField G = forward_gradient(PeriodicField(g, {1.0, -1.0}));
    EXPECT_DOUBLE_EQ(G.comp[0][0], -2.0 / g.dx());
    EXPECT_DOUBLE_EQ(G.comp[0][1], 2.0 / g.dx());
}

TEST(Gradient, SineWave)
{
    const Grid g(1, 256);
    PeriodicField u(g);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::sin(kTwoPi * g.center(k)(0));
    const VectorField G = forward_gradient(u);
    const PeriodicField L = neg_adjoint_divergence(G);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double x = g.center(k)(0);
        EXPECT_NEAR(G.comp[0][k], kTwoPi * std::cos(kTwoPi * (x + 0.5 * g.dx())), 1e-3);
        EXPECT_NEAR(L[k], -kTwoPi * kTwoPi * std::sin(kTwoPi * x), 1e-2);
    }
}

TEST(Divergence, ConstantIsZero)
{
    VectorField F(Grid(3, 4));
    for (auto& c : F.comp)
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = 1.7;
    const PeriodicField d = neg_adjoint_divergence(F);
    for (std::size_t k = 0; k < d.size(); ++k) EXPECT_EQ(d[k], 0.0);
}

TEST(Divergence, ExactAdjoint)
{
    std::mt19937_64 rng(1);
    for (int dim = 1; dim <= 3; ++dim) {
        for (int n : {4, 8, 16}) {
            const Grid g(dim, n);
            const PeriodicField u = random_field(g, rng);
            VectorField F(g);
            for (auto& c : F.comp) c = random_field(g, rng);
            const VectorField G = forward_gradient(u);
            const PeriodicField D = neg_adjoint_divergence(F);
            double lhs = 0.0, rhs = 0.0, scale = 0.0;
            for (int a = 0; a < dim; ++a)
                for (std::size_t k = 0; k < u.size(); ++k) {
                    lhs += G.comp[a][k] * F.comp[a][k];
                    scale += std::abs(G.comp[a][k] * F.comp[a][k]);
                }
            for (std::size_t k = 0; k < u.size(); ++k) rhs -= u[k] * D[k];
            EXPECT_LE(std::abs(lhs - rhs), 1e-12 * scale) << "d=" << dim << " n=" << n;
        }
    }
}

TEST(Gradient, SecondOrderConsistency)
{
    auto [g1, l1] = errors(32);
    auto [g2, l2] = errors(64);
    auto [g3, l3] = errors(128);
    for (double r : {g1 / g2, g2 / g3, l1 / l2, l2 / l3}) {
        EXPECT_GE(r, 3.5);
        EXPECT_LE(r, 4.5);
    }
}

TEST(Gradient, ShiftEquivariance)
{
    std::mt19937_64 rng(4);
    const Grid g(2, 8);
    const PeriodicField u = random_field(g, rng);
    const std::array<int, 3> by{3, -2, 0};
    const VectorField a = forward_gradient(shift(u, by));
    const VectorField b = forward_gradient(u);
    for (int c = 0; c < 2; ++c) {
        const PeriodicField sb = shift(b.comp[c], by);
        for (std::size_t k = 0; k < u.size(); ++k) EXPECT_EQ(a.comp[c][k], sb[k]);
    }
}

TEST(Reductions, IntegrateAndCenterDistance)
{
    EXPECT_DOUBLE_EQ(integrate(PeriodicField(Grid(2, 16), 1.0)), 1.0);
    const Grid g(2, 16);
    PeriodicField half(g);
    for (std::size_t k = 0; k < half.size(); ++k) half[k] = g.center(k)(0) < 0.5 ? 1.0 : 0.0;
    EXPECT_DOUBLE_EQ(integrate(half), 0.5);
    EXPECT_EQ(linf_center_distance(PeriodicField(g, 0.5)), 0.0);
    EXPECT_DOUBLE_EQ(linf_center_distance(half), 0.5);
}

TEST(Interpolation, LinearIsExactOnAffineAlongAxis)
{
    const Grid g(1, 16);
    PeriodicField u(g);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = 2.0 * g.center(k)(0);
    EXPECT_NEAR(sample_linear(u, vec({0.5})), 1.0, 1e-14);
    const Vec m = minimal_image(vec({0.95, 0.1}), vec({0.05, 0.9}), 1.0);
    EXPECT_NEAR(m(0), -0.1, 1e-14);
    EXPECT_NEAR(m(1), 0.2, 1e-14);
}

TEST(Snapshot, RoundTrip)
{
    std::mt19937_64 rng(8);
    const Grid g(2, 8, 2.0);
    const PeriodicField u = random_field(g, rng);
    const auto dir = std::filesystem::temp_directory_path() / "wulffflow_snapshot_test";
    std::filesystem::remove_all(dir);
    const std::string path = write_snapshot(dir.string(), 12, u, 0.25, 0.05);
    EXPECT_TRUE(std::filesystem::exists(dir / "snap_12.f64"));
    EXPECT_TRUE(std::filesystem::exists(dir / "snap_12.json"));
    EXPECT_EQ(std::filesystem::file_size(dir / "snap_12.f64"), 64u * 8u);
    for (const std::string& p : {path, (dir / "snap_12.json").string()}) {
        SnapshotMeta meta;
        const PeriodicField v = read_snapshot(p, &meta);
        EXPECT_EQ(v.grid(), g);
        EXPECT_EQ(v.values(), u.values());
        EXPECT_EQ(meta.dims, 2);
        EXPECT_EQ(meta.n, 8);
        EXPECT_DOUBLE_EQ(meta.L, 2.0);
        EXPECT_DOUBLE_EQ(meta.time, 0.25);
        EXPECT_DOUBLE_EQ(meta.epsilon, 0.05);
    }
    std::filesystem::remove_all(dir);
    EXPECT_THROW(read_snapshot((dir / "missing.f64").string()), InputError);
}

TEST(Field, RejectsWrongSize)
{
    EXPECT_THROW(PeriodicField(Grid(2, 4), std::vector<double>(15, 0.0)), InputError);
}
