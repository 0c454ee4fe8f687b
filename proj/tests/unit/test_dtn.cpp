#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fracmono/dtn.hpp"
#include "fracmono/leray_lions.hpp"
#include "fracmono/verify/bessel.hpp"
#include "fracmono/verify/brute_force.hpp"
#include "fracmono/verify/contraction.hpp"
#include "fracmono/verify/spectral.hpp"

using namespace fracmono;

namespace {

HVector one(double x) { return HVector::Constant(1, x); }

Matrix random_spd(int n, double lo, double hi, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Matrix G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = nd(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    const Matrix Q = qr.householderQ();
    Eigen::VectorXd ev(n);
    for (int i = 0; i < n; ++i) ev[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return Q * ev.asDiagonal() * Q.transpose();
}

MonotoneOp plap8() {
    GridSpec g;
    g.nx = 8;
    return make_plap_grid(LerayLionsField::p_laplacian(3.0), g);
}

}  // namespace

TEST(ApplyLambda, ZeroData) {
    const auto op = make_scalar(4.0);
    const auto fp = FracParams::from_s(0.5);
    EXPECT_EQ(apply_lambda_s(op, fp, one(0.0), default_zmesh(op, fp, 256)).lambda_s_phi[0], 0.0);
}

TEST(ApplyLambda, HalfPowerScalar) {
    const auto op = make_scalar(4.0);
    const auto fp = FracParams::from_s(0.5);
    const auto r = apply_lambda_s(op, fp, one(1.0), default_zmesh(op, fp, 1024));
    EXPECT_NEAR(r.lambda_s_phi[0], 2.0, 1e-4);
    EXPECT_FALSE(r.outside_domain);
}

TEST(ApplyLambda, ScalarBesselConstant) {
    for (double s : {0.25, 0.5, 0.75})
        for (double a : {0.1, 1.0, 10.0}) {
            const auto op = make_scalar(a);
            const auto fp = FracParams::from_s(s);
            const double ref = verify::dtn_constant(s) * std::pow(a, s);
            const auto r = apply_lambda_s(op, fp, one(1.0), default_zmesh(op, fp, 1024));
            EXPECT_NEAR(r.lambda_s_phi[0] / ref, 1.0, 1e-4) << s << " " << a;
        }
}

TEST(ApplyLambda, SpectralOracle) {
    const Matrix M = random_spd(16, 0.1, 10.0, 8);
    const auto op = make_linear_spd(M);
    const HVector phi = HVector::LinSpaced(16, -2.0, 1.0);
    for (double s : {0.25, 0.5, 0.75}) {
        const auto fp = FracParams::from_s(s);
        const HVector ref = verify::dtn_constant(s) * verify::spectral_frac_power(M, s) * phi;
        const auto r = apply_lambda_s(op, fp, phi, default_zmesh(op, fp, 1024));
        EXPECT_LT((r.lambda_s_phi - ref).norm() / ref.norm(), 1e-3) << s;
    }
}

TEST(ApplyLambda, OutsideDomainWarning) {
    auto op = make_box(-1.0, 1.0, 1);
    const auto fp = FracParams::from_s(0.5);
    const auto mesh = graded_zmesh(64, 5.0, 2.0);
    EXPECT_FALSE(apply_lambda_s(op, fp, one(0.5), mesh).outside_domain);
    EXPECT_TRUE(apply_lambda_s(op, fp, one(3.0), mesh).outside_domain);
}

TEST(ResolveLambda, Examples) {
    const auto op = make_scalar(4.0);
    const auto fp = FracParams::from_s(0.5);
    const auto mesh = default_zmesh(op, fp, 1024);
    EXPECT_NEAR(resolve_lambda_s(op, fp, 1.0, one(3.0), mesh)[0], 1.0, 1e-4);
    EXPECT_EQ(resolve_lambda_s(op, fp, 2.5, one(0.0), mesh)[0], 0.0);
    EXPECT_THROW(resolve_lambda_s(op, fp, 0.0, one(1.0), mesh), InvalidArgument);
}

TEST(ResolveLambda, ReSolveIdentity) {
    const auto fp = FracParams::from_s(0.5);
    const auto op = plap8();
    const auto mesh = graded_zmesh(256, 20.0, 2.0);
    HVector phi(8);
    phi << 1, -2, 0.5, 3, 0, -1, 2, 1;
    const SolverConfig cfg;
    const HVector u = resolve_lambda_s(op, fp, 1.0, phi, mesh, cfg);
    EXPECT_LE(resolvent_identity_residual(op, fp, 1.0, phi, u, mesh, cfg), 5.0 * cfg.tol);
}

TEST(ResolveLambda, TwoNodePLaplacianAgainstBruteForce) {
    GridSpec g;
    g.nx = 2;
    const auto op = make_plap_grid(LerayLionsField::p_laplacian(3.0), g);
    const auto fp = FracParams::from_s(0.5);
    const auto mesh = graded_zmesh(9, 6.0, 1.0);
    HVector phi(2);
    phi << 2.0, 0.0;
    const double lambda = 1.0;
    const HVector u = resolve_lambda_s(op, fp, lambda, phi, mesh);
    EXPECT_LE(resolvent_identity_residual(op, fp, lambda, phi, u, mesh), 5e-10);
    const auto bf = verify::brute_force_bvp(op, fp, Boundary::robin(1.0 / lambda, phi / lambda), mesh);
    ASSERT_TRUE(bf.converged);
    EXPECT_LT((bf.v.values[0] - u).norm(), 1e-8);
}

TEST(ResolveLambda, Contraction) {
    const auto op = plap8();
    const auto fp = FracParams::from_s(0.25);
    const auto mesh = graded_zmesh(64, 20.0, 2.0);
    std::mt19937_64 rng(2);
    const auto pairs = verify::sample_pairs(8, 4, rng, 3.0);
    for (const auto& [a, b] : pairs) {
        const HVector ja = resolve_lambda_s(op, fp, 0.5, a, mesh), jb = resolve_lambda_s(op, fp, 0.5, b, mesh);
        EXPECT_LE((ja - jb).norm(), (a - b).norm() * (1 + 1e-9));
    }
}

TEST(Monotonicity, Examples) {
    const auto fp = FracParams::from_s(0.5);
    const auto op = make_scalar(2.0);
    const auto mesh = default_zmesh(op, fp, 256);
    EXPECT_NEAR(monotonicity_probe(op, fp, {{one(1.0), one(1.0)}}, mesh).values[0], 0.0, 1e-15);
    const auto r = monotonicity_probe(op, fp, {{one(1.0), one(-2.0)}}, mesh);
    EXPECT_NEAR(r.values[0], std::sqrt(2.0) * 9.0, 1e-2);
    EXPECT_TRUE(r.pass);
}

TEST(Monotonicity, PLaplacianPairs) {
    const auto fp = FracParams::from_s(0.5);
    std::mt19937_64 rng(3);
    const auto pairs = verify::sample_pairs(8, 20, rng, 3.0);
    const auto r = monotonicity_probe(plap8(), fp, pairs, graded_zmesh(128, 20.0, 2.0));
    EXPECT_GE(r.min_value, -1e-8);
}

TEST(SquareProperty, LinearHalfPower) {
    const Matrix M = random_spd(6, 0.2, 5.0, 1);
    const auto op = make_linear_spd(M);
    const auto fp = FracParams::from_s(0.5);
    const auto mesh = default_zmesh(op, fp, 1024);
    HVector phi(6);
    phi << 1, 0, -1, 2, 0.5, 0.1;
    const HVector l1 = apply_lambda_s(op, fp, phi, mesh).lambda_s_phi;
    const HVector l2 = apply_lambda_s(op, fp, l1, mesh).lambda_s_phi;
    const HVector a0 = M * phi;
    EXPECT_LE((l2 - a0).norm() / (1.0 + a0.norm()), 2e-2);
}

TEST(SquareProperty, PLaplacianSquarePower) {
    GridSpec g;
    g.nx = 8;
    const auto op = make_plap_grid(LerayLionsField::p_laplacian(3.0), g);
    const auto fp = FracParams::from_s(0.5);
    const auto mesh = graded_zmesh(256, 20.0, 2.0);
    HVector phi(8);
    phi << 0.3, 0.8, 1.0, 0.6, -0.2, -0.7, -0.4, 0.1;
    const HVector a0 = op.direct_eval(phi);
    const HVector sq = square_power(op, fp, phi, mesh);
    EXPECT_LE((sq - a0).norm() / (1.0 + a0.norm()), 2e-3);
    // composition differs from the square power for nonlinear A
    const HVector l1 = apply_lambda_s(op, fp, phi, mesh).lambda_s_phi;
    const HVector comp = apply_lambda_s(op, fp, l1, mesh).lambda_s_phi;
    EXPECT_GT((comp - a0).norm() / (1.0 + a0.norm()), 0.1);
}

TEST(SquareProperty, LinearSquarePowerMatchesComposition) {
    Matrix M(3, 3);
    M << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 0.5;
    const auto op = make_linear_spd(M);
    const auto fp = FracParams::from_s(0.5);
    const auto mesh = default_zmesh(op, fp, 512);
    const HVector phi = HVector::LinSpaced(3, 1.0, -0.5);
    const HVector a0 = M * phi;
    EXPECT_LE((square_power(op, fp, phi, mesh) - a0).norm() / (1.0 + a0.norm()), 2e-3);
}

TEST(CompleteAccretivity, RobinResolventOfPLaplacian) {
    const auto op = plap8();
    const auto fp = FracParams::from_s(0.5);
    const auto mesh = graded_zmesh(128, 20.0, 2.0);
    std::mt19937_64 rng(5);
    const auto pairs = verify::sample_pairs(8, 20, rng, 3.0);
    const auto rep = verify::check_complete_contraction(
        [&](const HVector& w) { return resolve_lambda_s(op, fp, 1.0, w, mesh); }, pairs, verify::default_j_set());
    EXPECT_TRUE(rep.pass) << rep.worst_margin;
}
