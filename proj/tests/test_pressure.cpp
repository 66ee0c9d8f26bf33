#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "scns/pressure.hpp"

using namespace scns;

TEST(Kernel, UnitSigmaValues)
{
    const auto k = build_kernel(1, 1.0);
    ASSERT_EQ(k.weights.size(), 3u);
    EXPECT_NEAR(k.at(-1), 0.27406, 1e-5);
    EXPECT_NEAR(k.at(0), 0.45186, 1e-5);
    EXPECT_NEAR(k.at(1), 0.27406, 1e-5);
    // e^{-1/2} / (1 + 2 e^{-1/2}) and 1 / (1 + 2 e^{-1/2})
    EXPECT_NEAR(k.at(1), 0.274068619061197, 1e-15);
    EXPECT_NEAR(k.at(0), 0.45186276187760605, 1e-15);
}

TEST(Kernel, FlatLimit)
{
    const auto k = build_kernel(1, 1e6);
    for (double w : k.weights) EXPECT_NEAR(w, 1.0 / 3.0, 1e-6);
}

TEST(Kernel, NormalizedSymmetricPositive)
{
    for (int r : {1, 2, 3, 5})
        for (double s : {0.3, 0.7, 1.0, 2.5, 10.0}) {
            const auto k = build_kernel(r, s);
            double sum = 0.0;
            for (double w : k.weights) {
                EXPECT_GT(w, 0.0);
                sum += w;
            }
            EXPECT_NEAR(sum, 1.0, 1e-15);
            for (int d = 1; d <= r; ++d) EXPECT_EQ(k.at(d), k.at(-d));
        }
}

TEST(Kernel, InvalidArgumentsThrow)
{
    EXPECT_THROW(build_kernel(0, 1.0), PreconditionError);
    EXPECT_THROW(build_kernel(1, 0.0), PreconditionError);
    EXPECT_THROW(build_kernel(1, -2.0), PreconditionError);
}

TEST(GaussianFilter, PreservesConstants)
{
    const GridSpec g(6, 7, 5);
    const auto out = gaussian_filter(ScalarField(g, 2.75), build_kernel(2, 1.3));
    for (double x : out.data()) EXPECT_NEAR(x, 2.75, 1e-15);
}

TEST(GaussianFilter, ImpulseGivesCubedCentreWeight)
{
    const GridSpec g = GridSpec::cube(7);
    ScalarField f(g);
    f(3, 3, 3) = 1.0;
    const auto k = build_kernel(1, 1.0);
    const auto out = gaussian_filter(f, k);
    EXPECT_NEAR(out(3, 3, 3), std::pow(k.at(0), 3), 1e-16);
    EXPECT_NEAR(out(4, 3, 3), k.at(1) * k.at(0) * k.at(0), 1e-16);
    EXPECT_NEAR(out(4, 4, 4), std::pow(k.at(1), 3), 1e-16);
}

TEST(GaussianFilter, LinearFieldUnchangedInInterior)
{
    const GridSpec g = GridSpec::cube(9);
    const auto f = ScalarField::from_function(g, [](double x, double, double) { return 3.0 * x; });
    const auto out = gaussian_filter(f, build_kernel(1, 1.0));
    for (int k = 1; k < 8; ++k)
        for (int j = 1; j < 8; ++j)
            for (int i = 1; i < 8; ++i) EXPECT_NEAR(out(i, j, k), f(i, j, k), 1e-14);
}

TEST(GaussianFilter, CommutesWithConstantAndContracts)
{
    std::mt19937_64 rng(12);
    const GridSpec g(8, 6, 7);
    const auto f = oracle::random_field(g, rng, -3, 3);
    ScalarField shifted = f;
    shifted += 1.5;
    const auto k = build_kernel(2, 1.0);
    const auto a = gaussian_filter(f, k);
    const auto b = gaussian_filter(shifted, k);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(b.data()[i], a.data()[i] + 1.5, 1e-13);
    EXPECT_LE(reduce(a, Reduction::max_abs), reduce(f, Reduction::max_abs));
}

TEST(CorrectPressure, ZeroDivergenceBaselineUnchanged)
{
    std::mt19937_64 rng(13);
    const GridSpec g = GridSpec::cube(6);
    auto pr = oracle::random_field(g, rng, -1, 1);
    apply_pressure_neumann(pr);
    PressureConfig cfg;
    cfg.filter_enabled = false;
    const auto out = correct_pressure(pr, ScalarField(g), cfg);
    EXPECT_EQ(out.data(), pr.data());
}

TEST(CorrectPressure, ConstantPressureFilteredUnchanged)
{
    const GridSpec g = GridSpec::cube(6);
    PressureConfig cfg;
    const auto out = correct_pressure(ScalarField(g, 0.4), ScalarField(g), cfg);
    for (double x : out.data()) EXPECT_NEAR(x, 0.4, 1e-15);
}

TEST(CorrectPressure, UnitDivergenceBothModes)
{
    const GridSpec g = GridSpec::cube(5);
    for (bool filt : {false, true}) {
        PressureConfig cfg;
        cfg.lambda = 0.06;
        cfg.filter_enabled = filt;
        const auto out = correct_pressure(ScalarField(g), ScalarField(g, 1.0), cfg);
        for (double x : out.data()) EXPECT_NEAR(x, -0.06, 1e-16);
    }
}

TEST(CorrectPressure, NeumannClosureCopiesNormalNeighbour)
{
    std::mt19937_64 rng(14);
    const GridSpec g = GridSpec::cube(6);
    PressureConfig cfg;
    cfg.filter_enabled = false;
    const auto out =
        correct_pressure(oracle::random_field(g, rng, -1, 1), oracle::random_field(g, rng, -1, 1), cfg);
    EXPECT_EQ(out(0, 2, 3), out(1, 2, 3));
    EXPECT_EQ(out(5, 2, 3), out(4, 2, 3));
    EXPECT_EQ(out(2, 0, 3), out(2, 1, 3));
    EXPECT_EQ(out(2, 3, 5), out(2, 3, 4));
}

TEST(PressureLoop, ZeroStateNeedsNoCorrection)
{
    const GridSpec g = GridSpec::cube(5);
    int calls = 0;
    const auto res = pressure_loop(ScalarField(g), PressureConfig{}, [&](const ScalarField&) {
        ++calls;
        return VectorField(g);
    });
    EXPECT_EQ(res.iterations, 0);
    EXPECT_EQ(calls, 1);
}

TEST(PressureLoop, ConvergesAndMeetsTolerance)
{
    // Toy momentum response: v = v0 - grad p, so div v = div v0 - lap p.
    const GridSpec g = GridSpec::cube(9);
    const auto v0x = ScalarField::from_function(
        g, [](double x, double y, double z) { return 0.2 * std::sin(3.14159 * x) * y * z; });
    PressureConfig cfg;
    cfg.filter_enabled = false;
    cfg.lambda = 0.002;
    cfg.max_pressure_iters = 20000;
    const auto res = pressure_loop(ScalarField(g), cfg, [&](const ScalarField& p) {
        VectorField v = pressure_gradient(p);
        for (Axis a : kAxes)
            for (double& x : v.component(a).data()) x = -x;
        for (std::size_t i = 0; i < g.size(); ++i) v.u.data()[i] += v0x.data()[i];
        return v;
    });
    EXPECT_GT(res.iterations, 0);
    EXPECT_LE(interior_max_abs(divergence(res.v)), cfg.tol);
    EXPECT_EQ(res.div_history.size(), static_cast<std::size_t>(res.iterations) + 1);
}

TEST(PressureLoop, CapRaisesWithHistory)
{
    const GridSpec g = GridSpec::cube(5);
    PressureConfig cfg;
    cfg.max_pressure_iters = 4;
    try {
        pressure_loop(ScalarField(g), cfg, [&](const ScalarField&) {
            return VectorField(ScalarField::from_function(g, [](double x, double, double) { return x; }),
                               ScalarField(g), ScalarField(g));
        });
        FAIL() << "expected NonConvergenceError";
    } catch (const NonConvergenceError& e) {
        EXPECT_EQ(e.history().size(), 5u);
        EXPECT_NEAR(e.history().front(), 1.0, 1e-12);
    }
}
