#pragma once

// Maximal monotone operators on R^n, exposed through their resolvents
// J_mu = (I + mu A)^{-1}, plus the Yosida approximation and the minimal
// selection built on top of them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "fracmono/errors.hpp"
#include "fracmono/hilbert.hpp"

namespace fracmono {

struct MonotoneOp {
    long dim = 0;
    /// (mu, w) -> u with u + mu A u ∋ w.
    std::function<HVector(double, const HVector&)> resolvent;
    /// Single-valued selection A⁰u on D(A); empty when not available.
    std::function<HVector(const HVector&)> direct_eval;
    /// An element of A^{-1}(0).
    HVector zero;
    /// Nearest point of the closure of D(A); empty when D(A) is dense.
    std::function<HVector(const HVector&)> domain_projection;
    std::string label;
    /// Coordinates are values on the points of a measure space, so order
    /// and L^p comparisons of states are meaningful.
    bool lattice = false;
    /// Spectral bounds {min, max} when A is linear.
    std::optional<std::pair<double, double>> linear_spectrum;
    /// Optional batched resolvent applied to every row of X (rows are points of H).
    /// Row-wise resolvent with a step per row; optional batch path.
    std::function<Matrix(const Eigen::VectorXd&, const Matrix&)> resolvent_rows;
};

inline HVector resolve(const MonotoneOp& op, double mu, const HVector& w) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("resolve: step must be positive");
    require_dim(w, op.dim);
    HVector u = op.resolvent(mu, w);
    if (!u.allFinite()) throw SolverFailure("resolve: non-finite resolvent output", INFINITY);
    return u;
}

/// J_mu applied to every row of X.
inline Matrix resolve_rows(const MonotoneOp& op, const Eigen::VectorXd& mu, const Matrix& X) {
    if (X.cols() != op.dim) throw DimensionMismatch(op.dim, X.cols());
    if (mu.size() != X.rows()) throw InvalidArgument("resolve_rows: one step per row required");
    if (op.resolvent_rows) return op.resolvent_rows(mu, X);
    Matrix U(X.rows(), X.cols());
    for (long i = 0; i < X.rows(); ++i) U.row(i) = op.resolvent(mu[i], X.row(i).transpose()).transpose();
    return U;
}

inline Matrix resolve_rows(const MonotoneOp& op, double mu, const Matrix& X) {
    return resolve_rows(op, Eigen::VectorXd::Constant(X.rows(), mu), X);
}

/// A_λ u = (u − J_λ u)/λ.
inline HVector yosida(const MonotoneOp& op, double lambda, const HVector& u) {
    if (!(lambda > 0.0)) throw InvalidArgument("yosida: lambda must be positive");
    return (u - resolve(op, lambda, u)) / lambda;
}

/// Least-norm element of A u. Uses direct_eval when present, otherwise
/// Richardson extrapolation of A_λ u over λ ∈ {1e-2, 5e-3, 2.5e-3}.
///
/// Off D(A), ‖A_λ u‖ grows like dist(u, D(A))/λ, i.e. doubles per halving of λ;
/// growth by more than 10× in one step, or by more than 1.5× in both steps, is
/// reported as NotInDomain.
inline HVector minimal_selection(const MonotoneOp& op, const HVector& u) {
    require_dim(u, op.dim);
    if (op.domain_projection && (op.domain_projection(u) - u).norm() > 1e-12 * (1.0 + u.norm()))
        throw NotInDomain("minimal_selection: point outside the closure of D(A)");
    if (op.direct_eval) return op.direct_eval(u);

    const double lam[3] = {1e-2, 5e-3, 2.5e-3};
    HVector y[3];
    for (int i = 0; i < 3; ++i) y[i] = yosida(op, lam[i], u);
    const double n0 = y[0].norm(), n1 = y[1].norm(), n2 = y[2].norm();
    const double floor = 1e-8 * (1.0 + u.norm());
    if ((n1 > 10.0 * n0 && n1 > floor) || (n2 > 10.0 * n1 && n2 > floor) ||
        (n1 > 1.5 * n0 && n2 > 1.5 * n1 && n2 > floor))
        throw NotInDomain("minimal_selection: Yosida sequence diverges; point outside D(A)");
    // A_λ u = A⁰u + c1 λ + c2 λ² + ... on D(A); two halvings eliminate c1, c2.
    const HVector r1 = 2.0 * y[1] - y[0];
    const HVector r2 = 2.0 * y[2] - y[1];
    return (4.0 * r2 - r1) / 3.0;
}

namespace detail {

// Root of an increasing scalar function on [lo, hi] with f(lo) <= 0 <= f(hi):
// Newton steps, falling back to bisection whenever a step leaves the bracket.
template <class F, class DF>
double increasing_root(F&& f, DF&& df, double lo, double hi, double x0) {
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (fx < 0.0) lo = x; else hi = x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return 0.5 * (lo + hi);
        const double d = df(x);
        double xn = d > 0.0 ? x - fx / d : lo - 1.0;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-16 * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

}  // namespace detail

/// Linear operator u -> M u for symmetric positive semidefinite M.
inline MonotoneOp make_linear_spd(const Matrix& M) {
    if (M.rows() != M.cols() || M.rows() == 0) throw InvalidArgument("make_linear_spd: matrix must be square");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument("make_linear_spd: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()));
    if (eig.info() != Eigen::Success) throw Error("make_linear_spd: eigendecomposition failed");
    Eigen::VectorXd evals = eig.eigenvalues();
    if (evals.minCoeff() < -1e-12 * scale)
        throw InvalidArgument("make_linear_spd: matrix has a negative eigenvalue");
    evals = evals.cwiseMax(0.0);
    const Matrix Q = eig.eigenvectors();
    const Matrix Ms = 0.5 * (M + M.transpose());

    MonotoneOp op;
    op.dim = M.rows();
    op.label = "linear_spd(" + std::to_string(M.rows()) + ")";
    op.zero = HVector::Zero(op.dim);
    op.resolvent = [Q, evals](double mu, const HVector& w) -> HVector {
        HVector c = Q.transpose() * w;
        c.array() /= (1.0 + mu * evals.array());
        return Q * c;
    };
    op.resolvent_rows = [Q, evals](const Eigen::VectorXd& mu, const Matrix& X) -> Matrix {
        const Matrix d = ((mu * evals.transpose()).array() + 1.0).inverse().matrix();
        return Matrix((X * Q).cwiseProduct(d)) * Q.transpose();
    };
    op.direct_eval = [Ms](const HVector& u) -> HVector { return Ms * u; };
    op.linear_spectrum = std::make_pair(evals.minCoeff(), evals.maxCoeff());
    return op;
}

/// A = a·I on R^dim, a >= 0.
inline MonotoneOp make_scalar(double a, long dim = 1) {
    if (!(a >= 0.0)) throw InvalidArgument("make_scalar: coefficient must be nonnegative");
    if (dim < 1) throw InvalidArgument("make_scalar: dim must be >= 1");
    MonotoneOp op;
    op.dim = dim;
    op.label = "scalar(" + std::to_string(a) + ")";
    op.zero = HVector::Zero(dim);
    op.resolvent = [a](double mu, const HVector& w) -> HVector { return w / (1.0 + mu * a); };
    op.resolvent_rows = [a](const Eigen::VectorXd& mu, const Matrix& X) -> Matrix {
        return (1.0 + a * mu.array()).inverse().matrix().asDiagonal() * X;
    };
    op.direct_eval = [a](const HVector& u) -> HVector { return a * u; };
    op.linear_spectrum = std::make_pair(a, a);
    op.lattice = true;
    return op;
}

/// Subdifferential of the indicator of the box [lo, hi]^dim.
inline MonotoneOp make_box(double lo, double hi, long dim) {
    if (!(lo <= hi)) throw InvalidArgument("make_box: need lo <= hi");
    if (dim < 1) throw InvalidArgument("make_box: dim must be >= 1");
    MonotoneOp op;
    op.dim = dim;
    op.label = "box[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
    op.zero = HVector::Constant(dim, std::clamp(0.0, lo, hi));
    auto clamp = [lo, hi](const HVector& w) -> HVector { return w.cwiseMax(lo).cwiseMin(hi); };
    op.resolvent = [clamp](double, const HVector& w) -> HVector { return clamp(w); };
    op.direct_eval = [lo, hi](const HVector& u) -> HVector {
        if ((u.array() < lo).any() || (u.array() > hi).any())
            throw NotInDomain("box: point outside the box");
        return HVector::Zero(u.size());
    };
    op.domain_projection = clamp;
    op.lattice = true;
    return op;
}

/// Componentwise A u = c·|u|^{q-2} u, the gradient of Σ c|u_i|^q / q, q > 1.
inline MonotoneOp make_power_prox(double q, long dim, double c = 1.0) {
    if (!(q > 1.0)) throw InvalidArgument("make_power_prox: exponent must exceed 1");
    if (!(c > 0.0)) throw InvalidArgument("make_power_prox: coefficient must be positive");
    if (dim < 1) throw InvalidArgument("make_power_prox: dim must be >= 1");
    MonotoneOp op;
    op.dim = dim;
    op.label = "power_prox(q=" + std::to_string(q) + ")";
    op.zero = HVector::Zero(dim);
    op.resolvent = [q, c](double mu, const HVector& w) -> HVector {
        HVector u(w.size());
        for (long i = 0; i < w.size(); ++i) {
            const double b = std::abs(w[i]);
            if (b == 0.0) { u[i] = 0.0; continue; }
            auto f = [&](double r) { return r + mu * c * std::pow(r, q - 1.0) - b; };
            auto df = [&](double r) { return 1.0 + mu * c * (q - 1.0) * std::pow(r, q - 2.0); };
            const double r = detail::increasing_root(f, df, 0.0, b, b);
            u[i] = std::copysign(r, w[i]);
        }
        return u;
    };
    op.direct_eval = [q, c](const HVector& u) -> HVector {
        HVector v(u.size());
        for (long i = 0; i < u.size(); ++i)
            v[i] = u[i] == 0.0 ? 0.0 : c * std::pow(std::abs(u[i]), q - 2.0) * u[i];
        return v;
    };
    op.lattice = true;
    return op;
}

}  // namespace fracmono
