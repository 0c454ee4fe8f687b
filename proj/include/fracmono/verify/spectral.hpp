#pragma once

// Spectral calculus for symmetric positive semidefinite matrices.

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "fracmono/errors.hpp"
#include "fracmono/hilbert.hpp"

namespace fracmono::verify {

/// V f(Λ) V^T for symmetric M; eigenvalues below -1e-12·scale are rejected.
inline Matrix spectral_function(const Matrix& M, const std::function<double(double)>& f) {
    if (M.rows() != M.cols()) throw InvalidArgument("spectral_function: matrix must be square");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument("spectral_function: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()));
    Eigen::VectorXd ev = eig.eigenvalues();
    if (ev.minCoeff() < -1e-12 * scale) throw InvalidArgument("spectral_function: matrix is not PSD");
    for (long i = 0; i < ev.size(); ++i) ev[i] = f(std::max(ev[i], 0.0));
    return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

inline Matrix spectral_frac_power(const Matrix& M, double s) {
    if (!(s >= 0.0)) throw InvalidArgument("spectral_frac_power: exponent must be nonnegative");
    return spectral_function(M, [s](double l) { return l == 0.0 ? (s == 0.0 ? 1.0 : 0.0) : std::pow(l, s); });
}

/// exp(-t c M^s).
inline Matrix spectral_semigroup(const Matrix& M, double s, double c, double t) {
    return spectral_function(M, [=](double l) { return std::exp(-t * c * (l == 0.0 ? 0.0 : std::pow(l, s))); });
}

}  // namespace fracmono::verify
