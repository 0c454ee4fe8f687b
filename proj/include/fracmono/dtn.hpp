#pragma once

// Dirichlet-to-Neumann operator Λ_s φ = -lim t^{1-2s} u'(t) = -(2s)^{1-2s} v'(0)
// and its resolvent, realized through the Robin problem.

#include <optional>
#include <utility>
#include <vector>

#include "fracmono/extension.hpp"
#include "fracmono/mesh.hpp"
#include "fracmono/monops.hpp"

namespace fracmono {

struct DtNResult {
    HVector lambda_s_phi;
    double fit_residual = 0.0;  ///< misfit between the 4-node line fit and the consistent flux
    int fit_nodes = 4;
    /// φ may lie outside D(A): no selection of A φ was available, or φ is not
    /// fixed by the domain projection.
    bool outside_domain = false;
    ExtensionSolution solution;
};

/// Graded mesh with N cells. Z defaults to the spectral-gap truncation for
/// linear operators and must be given otherwise; grading defaults to max(2, 1/(2s)).
inline ZMesh default_zmesh(const MonotoneOp& op, const FracParams& p, int N, std::optional<double> Z = {},
                           std::optional<double> grading = {}, FarBC far_bc = FarBC::DirichletAtZero) {
    double zmax;
    if (Z) {
        zmax = *Z;
    } else {
        if (!op.linear_spectrum || !(op.linear_spectrum->first > 0.0))
            throw InvalidArgument("default_zmesh: automatic Z needs a linear operator with positive spectrum");
        zmax = auto_truncation(p, op.linear_spectrum->first);
    }
    return graded_zmesh(N, zmax, grading ? *grading : default_grading(p), far_bc);
}

inline DtNResult apply_lambda_s(const MonotoneOp& op, const FracParams& p, const HVector& phi, const ZMesh& mesh,
                                const SolverConfig& cfg = {}, std::optional<Matrix> warm = {}) {
    ExtensionProblem prob{op, p, mesh, Boundary::dirichlet(phi), cfg, std::move(warm)};
    DtNResult r;
    r.solution = solve(prob);
    if (!r.solution.converged)
        throw SolverFailure("apply_lambda_s: extension solve did not converge", r.solution.inclusion_residual);
    r.lambda_s_phi = -p.trace_const * r.solution.trace_dv0;
    r.fit_residual = r.solution.fit_residual;
    r.outside_domain = r.solution.selection == TraceSelection::NeighborNode;
    if (op.domain_projection && (op.domain_projection(phi) - phi).norm() > 1e-12 * (1.0 + phi.norm()))
        r.outside_domain = true;
    return r;
}

/// Robin solve whose boundary value is J_λ^{Λ_s} φ, i.e. u + λ Λ_s u = φ.
/// Uses -(2s)^{1-2s} v'(0) + (1/λ) v(0) = φ/λ.
inline ExtensionSolution resolve_lambda_s_solution(const MonotoneOp& op, const FracParams& p, double lambda,
                                                   const HVector& phi, const ZMesh& mesh,
                                                   const SolverConfig& cfg = {}, std::optional<Matrix> warm = {}) {
    if (!(lambda > 0.0)) throw InvalidArgument("resolve_lambda_s: λ must be positive");
    require_dim(phi, op.dim);
    ExtensionProblem prob{op, p, mesh, Boundary::robin(1.0 / lambda, phi / lambda), cfg, std::move(warm)};
    auto sol = solve(prob);
    if (!sol.converged)
        throw SolverFailure("resolve_lambda_s: Robin solve did not converge", sol.inclusion_residual);
    return sol;
}

inline HVector resolve_lambda_s(const MonotoneOp& op, const FracParams& p, double lambda, const HVector& phi,
                                const ZMesh& mesh, const SolverConfig& cfg = {}) {
    return resolve_lambda_s_solution(op, p, lambda, phi, mesh, cfg).trace_v0;
}

/// ‖u + λ Λ_s u - φ‖ / (1 + ‖φ‖) with Λ_s u recomputed by a Dirichlet solve.
inline double resolvent_identity_residual(const MonotoneOp& op, const FracParams& p, double lambda,
                                          const HVector& phi, const HVector& u, const ZMesh& mesh,
                                          const SolverConfig& cfg = {}) {
    const auto L = apply_lambda_s(op, p, u, mesh, cfg);
    return (u + lambda * L.lambda_s_phi - phi).norm() / (1.0 + phi.norm());
}

/// Square power of Λ_s at φ in the sense of Alraabiou–Bénilan,
///   B²φ = lim_{λ→0} (Bφ - B_λ φ)/λ,   B_λ = (I - J_λ^B)/λ,
/// from λ ∈ {4h, 2h, h} with two Richardson eliminations. Equals Λ_s(Λ_s φ)
/// only for linear A.
inline HVector square_power(const MonotoneOp& op, const FracParams& p, const HVector& phi, const ZMesh& mesh,
                            const SolverConfig& cfg = {}, double h = 0.01) {
    if (!(h > 0.0)) throw InvalidArgument("square_power: h must be positive");
    const HVector L = apply_lambda_s(op, p, phi, mesh, cfg).lambda_s_phi;
    HVector q[3];
    const double lam[3] = {4.0 * h, 2.0 * h, h};
    for (int i = 0; i < 3; ++i) {
        const HVector J = resolve_lambda_s(op, p, lam[i], phi, mesh, cfg);
        q[i] = (L - (phi - J) / lam[i]) / lam[i];
    }
    const HVector r1 = 2.0 * q[1] - q[0], r2 = 2.0 * q[2] - q[1];
    return (4.0 * r2 - r1) / 3.0;
}

struct MonotonicityReport {
    std::vector<double> values;  ///< (Λφ - Λψ, φ - ψ) per pair
    double min_value = 0.0;
    bool pass = true;
};

inline MonotonicityReport monotonicity_probe(const MonotoneOp& op, const FracParams& p,
                                             const std::vector<std::pair<HVector, HVector>>& pairs,
                                             const ZMesh& mesh, const SolverConfig& cfg = {}, double tol = 1e-8) {
    MonotonicityReport r;
    r.min_value = INFINITY;
    for (const auto& [a, b] : pairs) {
        const HVector la = apply_lambda_s(op, p, a, mesh, cfg).lambda_s_phi;
        const HVector lb = apply_lambda_s(op, p, b, mesh, cfg).lambda_s_phi;
        const double v = (la - lb).dot(a - b);
        r.values.push_back(v);
        r.min_value = std::min(r.min_value, v);
    }
    if (pairs.empty()) r.min_value = 0.0;
    r.pass = r.min_value >= -tol;
    return r;
}

}  // namespace fracmono
