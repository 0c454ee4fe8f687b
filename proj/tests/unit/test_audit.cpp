#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fracmono/audit.hpp"
#include "fracmono/leray_lions.hpp"

using namespace fracmono;

namespace {

HVector one(double x) { return HVector::Constant(1, x); }

ExtensionProblem scalar_problem(double a, double s, double phi, int N = 1024, double Z = 30.0) {
    const auto p = FracParams::from_s(s);
    return {make_scalar(a), p, graded_zmesh(N, Z, default_grading(p)), Boundary::dirichlet(one(phi)), {}, std::nullopt};
}

}  // namespace

TEST(Audit, HalfPowerDerivativeEnergy) {
    // ‖t u'‖_* with u = e^{-2t}: ∫ 4 t e^{-4t} dt = 1/4
    const auto p = scalar_problem(4.0, 0.5, 1.0);
    const auto rep = audit_estimates(solve(p), p);
    const auto* e = rep.find("t_derivative_energy");
    ASSERT_NE(e, nullptr);
    EXPECT_NEAR(e->lhs, 0.5, 1e-3);
    EXPECT_NEAR(e->rhs, std::sqrt(0.5), 1e-15);
    EXPECT_TRUE(e->pass);
    EXPECT_LE(rep.eps_disc, 0.05);
}

TEST(Audit, StationarySolutionPassesEverything) {
    const auto p = scalar_problem(4.0, 0.3, 0.0, 128, 10.0);
    const auto rep = audit_estimates(solve(p), p);
    for (const auto& e : rep.entries) {
        EXPECT_EQ(e.lhs, 0.0) << e.name;
        EXPECT_TRUE(e.pass) << e.name;
    }
}

TEST(Audit, LowerBranchCoefficient) {
    const auto p = scalar_problem(1.0, 0.25, 1.0);
    const auto rep = audit_estimates(solve(p), p);
    const auto* e = rep.find("t_second_derivative_energy");
    ASSERT_NE(e, nullptr);
    EXPECT_NEAR(e->rhs, 0.5 * std::sqrt(0.25 + 3.0) / std::sqrt(2.0), 1e-14);
    EXPECT_TRUE(e->pass) << e->lhs << " " << e->rhs;
}

TEST(Audit, SecondDerivativeNormMatchesClosedForm) {
    // s = 1/2, u = e^{-2t}: ‖t² u''‖_*² = ∫ 16 t³ e^{-4t} dt = 16·3!/4⁴
    const auto p = scalar_problem(4.0, 0.5, 1.0, 2048, 30.0);
    const auto rep = audit_estimates(solve(p), p);
    EXPECT_NEAR(rep.find("t_second_derivative_energy")->lhs, std::sqrt(16.0 * 6.0 / 256.0), 2e-3);
}

TEST(Audit, DomainBoundsPresentForDirectEval) {
    const auto p = scalar_problem(2.0, 0.5, 1.0);
    const auto rep = audit_estimates(solve(p), p);
    EXPECT_NEAR(rep.a0_norm, 2.0, 1e-15);
    for (const char* n : {"trace_flux", "weighted_flux_energy", "weighted_flux_derivative_energy"}) {
        ASSERT_NE(rep.find(n), nullptr) << n;
        EXPECT_TRUE(rep.find(n)->pass) << n;
    }
    // s = 1/2: ‖v'‖_{L²(dz)}² = ∫ 2 e^{-2√2 z} dz = 1/√2
    EXPECT_NEAR(rep.find("weighted_flux_energy")->lhs, std::pow(0.5, 0.25), 1e-3);
}

TEST(Contraction, Examples) {
    const auto p1 = scalar_problem(4.0, 0.5, 1.0, 256, 15.0);
    auto p2 = p1;
    p2.boundary.phi = one(2.0);
    const auto a = solve(p1), b = solve(p2);
    EXPECT_EQ(contraction_check(a, a).max_increase, 0.0);
    const auto r = contraction_check(a, b);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.initial_distance, 1.0, 1e-15);
    auto p3 = p1;
    p3.mesh = graded_zmesh(128, 15.0, 2.0);
    EXPECT_THROW(contraction_check(a, solve(p3)), InvalidArgument);
}

TEST(Contraction, PLaplacianRandomPairs) {
    GridSpec g;
    g.nx = 8;
    const auto op = make_plap_grid(LerayLionsField::p_laplacian(3.0), g);
    const auto fp = FracParams::from_s(0.5);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 3; ++k) {
        HVector a(8), b(8);
        for (int i = 0; i < 8; ++i) {
            a[i] = nd(rng);
            b[i] = nd(rng);
        }
        ExtensionProblem pa{op, fp, graded_zmesh(128, 20.0, 2.0), Boundary::dirichlet(a), {}, std::nullopt};
        auto pb = pa;
        pb.boundary.phi = b;
        EXPECT_TRUE(contraction_check(solve(pa), solve(pb), eps_disc(pa)).pass);
    }
}

TEST(CauchyBound, Examples) {
    const auto fp = FracParams::from_s(0.5);
    const auto mesh = graded_zmesh(256, 40.0, 2.0);
    const auto same = cauchy_bound_check(make_scalar(1.0), fp, mesh, one(1.0), 0.1, {{1e-2, 1e-2}});
    EXPECT_EQ(same[0].lhs, 0.0);
    EXPECT_TRUE(same[0].pass);
    const auto r = cauchy_bound_check(make_scalar(1.0), fp, mesh, one(1.0), 0.1, {{1e-2, 5e-3}});
    EXPECT_GT(r[0].lhs, 0.0);
    EXPECT_LT(r[0].lhs / r[0].rhs, 1.0);
}

TEST(CauchyBound, RegularizedLinearSystemOracle) {
    // For linear M the regularized operator is M_λ + δ I = M (I + λM)^{-1} + δ I, itself linear.
    Matrix M(4, 4);
    M << 4, 1, 0, 0, 1, 3, 1, 0, 0, 1, 2, 0.5, 0, 0, 0.5, 1;
    const auto fp = FracParams::from_s(0.4);
    const auto mesh = graded_zmesh(256, 30.0, 2.5);
    HVector phi(4);
    phi << 1.0, -1.0, 0.5, 2.0;
    const double lam = 0.05, delta = 0.1;
    const ExtensionProblem prob{make_linear_spd(M), fp, mesh, Boundary::dirichlet(phi), {}, std::nullopt};
    const auto reg = solve_regularized(prob, lam, delta);
    const Matrix Mr = M * (Matrix::Identity(4, 4) + lam * M).inverse() + delta * Matrix::Identity(4, 4);
    const ExtensionProblem direct{make_linear_spd(0.5 * (Mr + Mr.transpose())), fp, mesh, Boundary::dirichlet(phi), {}, std::nullopt};
    const auto ref = solve(direct);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.v.size(); ++i) worst = std::max(worst, (ref.v.values[i] - reg.v.values[i]).norm());
    EXPECT_LT(worst, 1e-8);
}
