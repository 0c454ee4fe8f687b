#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fracmono/mesh.hpp"

using namespace fracmono;

TEST(FracParams, DerivedFields) {
    for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const auto p = FracParams::from_s(s);
        EXPECT_NEAR(p.alpha, 1 - 2 * s, 1e-15);
        EXPECT_NEAR(p.zexp, (1 - 2 * s) / s, 1e-15);
        EXPECT_NEAR(p.underline_s, (1 - s) / (2 * s), 1e-15);
        EXPECT_NEAR(p.overline_s, (3 * s - 1) / (2 * s), 1e-15);
        EXPECT_NEAR(p.trace_const, std::pow(2 * s, 1 - 2 * s), 1e-15);
    }
    EXPECT_EQ(FracParams::from_s(0.5).trace_const, 1.0);
    EXPECT_THROW(FracParams::from_s(0.0), InvalidArgument);
    EXPECT_THROW(FracParams::from_s(1.0), InvalidArgument);
    EXPECT_THROW(FracParams::from_s(1.5), InvalidArgument);
}

TEST(GradedMesh, Examples) {
    const auto u = graded_zmesh(8, 1.0, 1.0);
    for (int i = 0; i <= 8; ++i) EXPECT_NEAR(u.nodes[i], i / 8.0, 1e-15);
    const auto q = graded_zmesh(8, 1.0, 2.0);
    for (int i = 0; i <= 8; ++i) EXPECT_NEAR(q.nodes[i], i * i / 64.0, 1e-15);
    EXPECT_EQ(q.Z, 1.0);
    EXPECT_THROW(graded_zmesh(7, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(graded_zmesh(8, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(graded_zmesh(8, 1.0, 0.5), InvalidArgument);
}

TEST(GradedMesh, RefinementDoesNotCoarsenNearZero) {
    for (double g : {1.0, 2.0, 3.5}) {
        const auto a = graded_zmesh(16, 5.0, g), b = graded_zmesh(32, 5.0, g);
        EXPECT_LE(b.nodes[1], a.nodes[1]);
        for (int i = 0; i < 16; ++i) EXPECT_LE(b.nodes[2 * i + 2] - b.nodes[2 * i], a.nodes[i + 1] - a.nodes[i] + 1e-15);
    }
}

TEST(ChangeOfVariable, Examples) {
    const auto half = FracParams::from_s(0.5);
    for (double t : {0.0, 0.3, 2.0, 17.0}) EXPECT_NEAR(z_of_t(half, t), t, 1e-15);
    const auto q = FracParams::from_s(0.25);
    EXPECT_NEAR(t_of_z(q, 2.0), 2.0, 1e-15);
    EXPECT_NEAR(t_of_z(q, 3.0), 0.5 * 9.0, 1e-14);
    EXPECT_THROW(z_of_t(q, -1.0), InvalidArgument);
    EXPECT_THROW(t_of_z(q, -1.0), InvalidArgument);
}

TEST(ChangeOfVariable, RoundTrip) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(0.0, 50.0);
    for (double s : {0.1, 0.25, 0.75, 0.95}) {
        const auto p = FracParams::from_s(s);
        for (int k = 0; k < 100; ++k) {
            const double z = ud(rng);
            EXPECT_NEAR(z_of_t(p, t_of_z(p, z)), z, 1e-13 * z);
        }
    }
}

TEST(Pullback, Examples) {
    GridFunction f;
    const auto m = graded_zmesh(16, 4.0, 2.0);
    f.nodes = m.nodes;
    for (double z : m.nodes) f.values.push_back(HVector::Constant(1, std::exp(-2.0 * z)));
    const auto id = pullback_to_t(FracParams::from_s(0.5), f);
    EXPECT_EQ(id.nodes, f.nodes);

    const auto p = FracParams::from_s(0.25);
    const auto g = pullback_to_t(p, f);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(g.values[i][0], std::exp(-2.0 * std::sqrt(2.0 * g.nodes[i])), 1e-14);

    GridFunction c = f;
    for (auto& v : c.values) v.setConstant(3.0);
    for (const auto& v : pullback_to_t(p, c).values) EXPECT_EQ(v[0], 3.0);
}

TEST(Pullback, DerivativeChainRule) {
    // v(z) = e^{-z}; u(t) = v(z(t)), so u'(t) = v'(z) dz/dt checked against a central difference of u
    for (double s : {0.25, 0.5, 0.75}) {
        const auto p = FracParams::from_s(s);
        const auto m = graded_zmesh(64, 6.0, 1.0);
        GridFunction dv;
        dv.nodes = m.nodes;
        for (double z : m.nodes) dv.values.push_back(HVector::Constant(1, -std::exp(-z)));
        const auto du = pullback_derivative_to_t(p, dv);
        if (s < 0.5) EXPECT_EQ(du.size(), dv.size() - 1);
        for (std::size_t i = 0; i < du.size(); ++i) {
            const double t = du.nodes[i];
            if (t < 1e-3) continue;
            const double e = 1e-6 * t;
            const double fd = (std::exp(-z_of_t(p, t + e)) - std::exp(-z_of_t(p, t - e))) / (2 * e);
            EXPECT_NEAR(du.values[i][0], fd, 1e-6 * (1.0 + std::abs(fd)));
        }
    }
}

TEST(Truncation, AutoZ) {
    for (double s : {0.25, 0.5, 0.75}) {
        const auto p = FracParams::from_s(s);
        const double Z = auto_truncation(p, 0.1);
        EXPECT_NEAR(std::exp(-std::sqrt(0.1) * t_of_z(p, Z)), 1e-10, 1e-16);
    }
    EXPECT_THROW(auto_truncation(FracParams::from_s(0.5), 0.0), InvalidArgument);
    EXPECT_EQ(default_grading(FracParams::from_s(0.75)), 2.0);
    EXPECT_EQ(default_grading(FracParams::from_s(0.125)), 4.0);
}
