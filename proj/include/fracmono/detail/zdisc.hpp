#pragma once

// P1 discretization of v'' = z^k w, w ∈ A v, on a ZMesh with lumped, exactly
// integrated weight masses m_i = ∫ z^k φ_i dz.
//
// Node equations (free nodes): (K v)_i + m_i w_i = b_i, where K is the P1
// stiffness matrix and b collects fixed-node values and the Robin datum.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "fracmono/errors.hpp"
#include "fracmono/hilbert.hpp"
#include "fracmono/mesh.hpp"

namespace fracmono::detail {

// (∫ z^k (z1 - z) dz, ∫ z^k (z - z0) dz) / h over [z0, z1].
inline std::pair<double, double> cell_masses(double z0, double z1, double k) {
    const double h = z1 - z0;
    if (z0 == 0.0 || h > 0.05 * z0) {
        auto mom = [&](double q) { return (std::pow(z1, q + 1.0) - std::pow(z0, q + 1.0)) / (q + 1.0); };
        const double m0 = mom(k), m1 = mom(k + 1.0);
        return {(z1 * m0 - m1) / h, (m1 - z0 * m0) / h};
    }
    // Smooth weight on a short cell away from 0: 5-point Gauss–Legendre.
    static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                0.9061798459386640};
    static const double wt[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    double a = 0.0, b = 0.0;
    for (int i = 0; i < 5; ++i) {
        const double r = 0.5 * (1.0 + x[i]);
        const double f = std::pow(z0 + r * h, k) * 0.5 * h * wt[i];
        a += f * (1.0 - r);
        b += f * r;
    }
    return {a, b};
}

/// Symmetric positive definite tridiagonal factorization A = L D L^T.
struct TriLDL {
    Eigen::VectorXd d, l;  // l[i] = L(i+1, i)

    TriLDL() = default;
    TriLDL(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
        const long n = diag.size();
        d.resize(n);
        l.resize(n > 0 ? n - 1 : 0);
        d[0] = diag[0];
        for (long i = 1; i < n; ++i) {
            l[i - 1] = off[i - 1] / d[i - 1];
            d[i] = diag[i] - l[i - 1] * off[i - 1];
            if (!(d[i] > 0.0)) throw SolverFailure("tridiagonal factorization lost definiteness", d[i]);
        }
    }

    void solve_in_place(Matrix& B) const {
        const long n = d.size();
        for (long i = 1; i < n; ++i) B.row(i) -= l[i - 1] * B.row(i - 1);
        for (long i = 0; i < n; ++i) B.row(i) /= d[i];
        for (long i = n - 2; i >= 0; --i) B.row(i) -= l[i] * B.row(i + 1);
    }
};

struct ZDisc {
    FracParams p;
    std::vector<double> z;
    std::vector<double> h;
    std::vector<double> m;        // lumped masses per node
    std::vector<double> m_left;   // share of m_i from cell i-1
    std::vector<double> m_right;  // share of m_i from cell i
    bool robin = false;
    double robin_coef = 0.0;  // λ / trace_const
    bool far_dirichlet = true;
    long first = 1, last = 0;  // free node range [first, last]

    ZDisc(const FracParams& params, const ZMesh& mesh, bool robin_boundary, double robin_lambda)
        : p(params), z(mesh.nodes), robin(robin_boundary) {
        const long N = static_cast<long>(z.size()) - 1;
        if (N < 2) throw InvalidArgument("extension: mesh too small");
        if (z[0] != 0.0) throw InvalidArgument("extension: mesh must start at z = 0");
        h.resize(N);
        m.assign(N + 1, 0.0);
        m_left.assign(N + 1, 0.0);
        m_right.assign(N + 1, 0.0);
        for (long i = 0; i < N; ++i) {
            h[i] = z[i + 1] - z[i];
            if (!(h[i] > 0.0)) throw InvalidArgument("extension: mesh not strictly increasing");
            const auto [a, b] = cell_masses(z[i], z[i + 1], p.zexp);
            m_right[i] = a;
            m_left[i + 1] = b;
            m[i] += a;
            m[i + 1] += b;
        }
        far_dirichlet = mesh.far_bc == FarBC::DirichletAtZero;
        robin_coef = robin ? robin_lambda / p.trace_const : 0.0;
        first = robin ? 0 : 1;
        last = far_dirichlet ? N - 1 : N;
    }

    long N() const { return static_cast<long>(z.size()) - 1; }
    long nfree() const { return last - first + 1; }

    /// Diagonal of the stiffness (with the Robin term) on free nodes.
    Eigen::VectorXd stiffness_diag() const {
        Eigen::VectorXd kd = Eigen::VectorXd::Zero(nfree());
        for (long r = 0; r < nfree(); ++r) {
            const long i = first + r;
            if (i > 0) kd[r] += 1.0 / h[i - 1];
            if (i < N()) kd[r] += 1.0 / h[i];
            if (i == 0) kd[r] += robin_coef;
        }
        return kd;
    }

    /// Splitting metric P = M + (gamma / kappa) diag(K): the lumped masses,
    /// raised near z = 0 so that gamma P^{-1} K stays below kappa.
    Eigen::VectorXd metric(double gamma, double kappa) const {
        Eigen::VectorXd P = stiffness_diag() * (gamma / kappa);
        for (long r = 0; r < nfree(); ++r) P[r] += m[first + r];
        return P;
    }

    /// Factorization of P + gamma (K + Robin) on free nodes.
    TriLDL factor(const Eigen::VectorXd& P, double gamma) const {
        const long n = nfree();
        Eigen::VectorXd diag = P + gamma * stiffness_diag(), off(n > 0 ? n - 1 : 0);
        for (long r = 0; r + 1 < n; ++r) off[r] = -gamma / h[first + r];
        return TriLDL(diag, off);
    }

    /// Right-hand side b on free nodes (rows) for fixed data.
    Matrix rhs(const HVector& phi, const HVector& y) const {
        Matrix b = Matrix::Zero(nfree(), phi.size());
        if (robin) b.row(0) += phi.transpose() / p.trace_const;
        else b.row(0) += phi.transpose() / h[0];
        if (far_dirichlet) b.row(nfree() - 1) += y.transpose() / h[N() - 1];
        return b;
    }

    /// Full nodal array from free values and fixed data.
    Matrix expand(const Matrix& free, const HVector& phi, const HVector& y) const {
        Matrix V(N() + 1, phi.size());
        if (!robin) V.row(0) = phi.transpose();
        if (far_dirichlet) V.row(N()) = y.transpose();
        V.middleRows(first, nfree()) = free;
        return V;
    }

    /// (K v)_i on all nodes, without boundary contributions.
    Matrix stiffness_apply(const Matrix& V) const {
        Matrix R = Matrix::Zero(V.rows(), V.cols());
        for (long i = 0; i < N(); ++i) {
            const Eigen::RowVectorXd f = (V.row(i + 1) - V.row(i)) / h[i];
            R.row(i) -= f;
            R.row(i + 1) += f;
        }
        return R;
    }
};

}  // namespace fracmono::detail
