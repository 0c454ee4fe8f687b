#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fracmono/leray_lions.hpp"
#include "fracmono/monops.hpp"

using namespace fracmono;

namespace {

HVector vec(std::initializer_list<double> xs) {
    HVector v(static_cast<long>(xs.size()));
    long i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

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

HVector randvec(long n, std::mt19937_64& rng, double scale = 3.0) {
    std::normal_distribution<double> nd(0.0, scale);
    HVector v(n);
    for (long i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

MonotoneOp two_node_plap() {
    GridSpec g;
    g.nx = 2;
    g.project_mean = false;
    return make_plap_grid(LerayLionsField::p_laplacian(3.0, LateralBC::Neumann), g);
}

MonotoneOp without_direct_eval(MonotoneOp op) {
    op.direct_eval = nullptr;
    return op;
}

std::vector<MonotoneOp> operator_zoo() {
    std::vector<MonotoneOp> ops;
    ops.push_back(make_scalar(3.0, 4));
    ops.push_back(make_box(0.0, 1.0, 4));
    ops.push_back(make_power_prox(3.0, 4));
    ops.push_back(make_power_prox(1.5, 4, 2.0));
    ops.push_back(make_linear_spd(random_spd(6, 0.1, 10.0, 3)));
    GridSpec g;
    g.nx = 8;
    ops.push_back(make_plap_grid(LerayLionsField::p_laplacian(3.0, LateralBC::Dirichlet), g));
    ops.push_back(make_plap_grid(LerayLionsField::p_laplacian(1.5, LateralBC::Robin), g));
    ops.push_back(make_plap_grid(LerayLionsField::p_laplacian(4.0, LateralBC::Neumann), g));
    GridSpec g2{3, 3, 0.5, true};
    ops.push_back(make_plap_grid(
        LerayLionsField::weighted_power(3.0, [](GridPoint x) { return 1.0 + x.x * x.y; }, 1.0, 0.1), g2));
    return ops;
}

}  // namespace

TEST(Resolve, ScalarExample) { EXPECT_NEAR(resolve(make_scalar(3.0), 1.0, vec({8.0}))[0], 2.0, 1e-15); }

TEST(Resolve, BoxIsClamp) {
    const auto op = make_box(0.0, 1.0, 3);
    for (double mu : {0.1, 1.0, 7.0}) EXPECT_TRUE(resolve(op, mu, vec({-2.0, 0.3, 4.0})).isApprox(vec({0.0, 0.3, 1.0})));
}

TEST(Resolve, TwoNodePLaplacian) {
    // d = u0 - u1 solves d + d² = 2 with mean preserved
    const HVector u = resolve(two_node_plap(), 0.5, vec({2.0, 0.0}));
    EXPECT_NEAR(u[0], 1.5, 1e-11);
    EXPECT_NEAR(u[1], 0.5, 1e-11);
}

TEST(Resolve, RejectsBadArguments) {
    const auto op = make_scalar(1.0, 2);
    EXPECT_THROW(resolve(op, 0.0, vec({1.0, 1.0})), InvalidArgument);
    EXPECT_THROW(resolve(op, -1.0, vec({1.0, 1.0})), InvalidArgument);
    EXPECT_THROW(resolve(op, 1.0, vec({1.0})), DimensionMismatch);
}

TEST(Yosida, Examples) {
    EXPECT_NEAR(yosida(make_scalar(1.0), 1.0, vec({2.0}))[0], 1.0, 1e-15);
    EXPECT_EQ(yosida(make_power_prox(3.0, 2), 0.3, vec({0.0, 0.0})).norm(), 0.0);
    EXPECT_NEAR(yosida(make_box(0.0, 1.0, 1), 0.5, vec({2.0}))[0], 2.0, 1e-15);
}

TEST(MinimalSelection, Examples) {
    EXPECT_NEAR(minimal_selection(make_linear_spd(Matrix::Constant(1, 1, 4.0)), vec({1.0}))[0], 4.0, 1e-15);
    EXPECT_EQ(minimal_selection(make_box(0.0, 1.0, 1), vec({0.0}))[0], 0.0);
    EXPECT_EQ(minimal_selection(without_direct_eval(make_box(0.0, 1.0, 1)), vec({0.0}))[0], 0.0);
    const HVector a = minimal_selection(two_node_plap(), vec({1.0, 0.0}));
    EXPECT_NEAR(a[0], 1.0, 1e-15);
    EXPECT_NEAR(a[1], -1.0, 1e-15);
}

TEST(MinimalSelection, RichardsonMatchesDirect) {
    const auto op = make_power_prox(3.0, 2);
    const HVector u = vec({1.5, -0.7});
    // O(λ³) remainder at λ = 1e-2
    EXPECT_LT((minimal_selection(without_direct_eval(op), u) - op.direct_eval(u)).norm(), 5e-5);
    const Matrix M = random_spd(5, 0.1, 10.0, 11);
    const auto lin = make_linear_spd(M);
    const HVector x = vec({1, -2, 0.5, 0.3, 1});
    auto yos = [&](double l) -> HVector {
        return M * (Matrix::Identity(5, 5) + l * M).ldlt().solve(x);
    };
    const HVector r1 = 2.0 * yos(5e-3) - yos(1e-2), r2 = 2.0 * yos(2.5e-3) - yos(5e-3);
    const HVector expect = (4.0 * r2 - r1) / 3.0;
    EXPECT_LT((minimal_selection(without_direct_eval(lin), x) - expect).norm(), 1e-10 * expect.norm());
    EXPECT_LT((expect - M * x).norm(), 5e-3 * (M * x).norm());
}

TEST(MinimalSelection, OutsideDomainIsError) {
    auto op = without_direct_eval(make_box(0.0, 1.0, 1));
    EXPECT_THROW(minimal_selection(op, vec({2.0})), NotInDomain);
    op.domain_projection = nullptr;
    EXPECT_THROW(minimal_selection(op, vec({2.0})), NotInDomain);
    EXPECT_THROW(make_box(0.0, 1.0, 1).direct_eval(vec({2.0})), NotInDomain);
}

TEST(LinearSpd, Construction) {
    const auto I = make_linear_spd(Matrix::Identity(3, 3));
    EXPECT_TRUE(resolve(I, 2.0, vec({3.0, 6.0, 9.0})).isApprox(vec({1.0, 2.0, 3.0})));
    Matrix A(2, 2);
    A << 1.0, 0.5, 0.4, 1.0;
    EXPECT_THROW(make_linear_spd(A), InvalidArgument);
    Matrix Nd(2, 2);
    Nd << 1.0, 0.0, 0.0, -1.0;
    EXPECT_THROW(make_linear_spd(Nd), InvalidArgument);
}

TEST(LinearSpd, ResolventMatchesDirectSolve) {
    const Matrix M = random_spd(16, 0.1, 10.0, 5);
    const auto op = make_linear_spd(M);
    std::mt19937_64 rng(1);
    for (double mu : {0.01, 1.0, 30.0}) {
        const HVector w = randvec(16, rng);
        const HVector ref = (Matrix::Identity(16, 16) + mu * M).ldlt().solve(w);
        EXPECT_LT((resolve(op, mu, w) - ref).norm(), 1e-12 * (1.0 + ref.norm()));
    }
    ASSERT_TRUE(op.linear_spectrum.has_value());
    EXPECT_NEAR(op.linear_spectrum->first, 0.1, 1e-12);
    EXPECT_NEAR(op.linear_spectrum->second, 10.0, 1e-11);
}

TEST(ResolveRows, MatchesRowwiseResolve) {
    std::mt19937_64 rng(2);
    for (const auto& op : operator_zoo()) {
        Matrix X(5, op.dim);
        for (int i = 0; i < 5; ++i) X.row(i) = randvec(op.dim, rng).transpose();
        const Matrix U = resolve_rows(op, 0.7, X);
        for (int i = 0; i < 5; ++i)
            EXPECT_LT((U.row(i).transpose() - resolve(op, 0.7, X.row(i).transpose())).norm(), 1e-12) << op.label;
    }
}

TEST(Properties, ResolventContractionOnRandomPairs) {
    std::mt19937_64 rng(3);
    for (const auto& op : operator_zoo()) {
        for (int k = 0; k < 100; ++k) {
            const double mu = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
            const HVector w = randvec(op.dim, rng), wh = randvec(op.dim, rng);
            const double lhs = (resolve(op, mu, w) - resolve(op, mu, wh)).norm();
            EXPECT_LE(lhs, (w - wh).norm() * (1.0 + 1e-9)) << op.label;
        }
    }
}

TEST(Properties, ZeroIsFixed) {
    for (const auto& op : operator_zoo())
        for (double mu : {0.1, 1.0, 10.0}) EXPECT_LT((resolve(op, mu, op.zero) - op.zero).norm(), 1e-12) << op.label;
}

TEST(Properties, ResolventInvertsDirectEval) {
    std::mt19937_64 rng(4);
    for (const auto& op : operator_zoo()) {
        if (!op.direct_eval) continue;
        for (int k = 0; k < 20; ++k) {
            HVector u = randvec(op.dim, rng);
            if (op.domain_projection) u = op.domain_projection(u);
            const double mu = 0.5;
            const HVector w = u + mu * op.direct_eval(u);
            EXPECT_LT((resolve(op, mu, w) - u).norm(), 1e-9 * (1.0 + w.norm())) << op.label;
        }
    }
}

TEST(Properties, ResolventIdentity) {
    std::mt19937_64 rng(5);
    for (const auto& op : operator_zoo()) {
        for (int k = 0; k < 20; ++k) {
            const HVector w = randvec(op.dim, rng);
            const double mu = 1.3, nu = 0.4;
            const HVector jm = resolve(op, mu, w);
            const HVector rhs = resolve(op, nu, (nu / mu) * w + (1.0 - nu / mu) * jm);
            EXPECT_LT((jm - rhs).norm(), 1e-8 * (1.0 + w.norm())) << op.label;
        }
    }
}

TEST(Properties, YosidaMonotoneAndLipschitz) {
    std::mt19937_64 rng(6);
    for (const auto& op : operator_zoo()) {
        for (int k = 0; k < 50; ++k) {
            const HVector u = randvec(op.dim, rng), uh = randvec(op.dim, rng);
            const double lam = 0.25;
            const HVector d = yosida(op, lam, u) - yosida(op, lam, uh);
            EXPECT_GE(d.dot(u - uh), -1e-10) << op.label;
            EXPECT_LE(d.norm(), (u - uh).norm() / lam * (1.0 + 1e-9)) << op.label;
        }
    }
}

TEST(PowerProx, Errors) {
    EXPECT_THROW(make_power_prox(1.0, 2), InvalidArgument);
    EXPECT_THROW(make_scalar(-1.0), InvalidArgument);
    EXPECT_THROW(make_box(1.0, 0.0, 1), InvalidArgument);
}
