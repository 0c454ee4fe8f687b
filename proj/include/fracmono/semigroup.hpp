#pragma once

// The contraction semigroup generated by -Λ_s, through the exponential formula
// T(t)φ = lim (J_{t/m})^m φ with J_λ computed by Robin solves.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fracmono/dtn.hpp"
#include "fracmono/mesh.hpp"
#include "fracmono/monops.hpp"

namespace fracmono {

struct SemigroupTrajectory {
    std::vector<double> times;
    std::vector<HVector> states;
    int substeps = 0;
    /// U(r, t_k) for recorded k: Dirichlet extension of states[k] on nodes r_i = t(z_i).
    std::vector<std::size_t> u_time_index;
    std::vector<GridFunction> u_field;
};

/// J_dt^{Λ_s}(state).
inline HVector step(const MonotoneOp& op, const FracParams& p, double dt, const HVector& state, const ZMesh& mesh,
                    const SolverConfig& cfg = {}) {
    if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
    return resolve_lambda_s(op, p, dt, state, mesh, cfg);
}

inline SemigroupTrajectory evolve(const MonotoneOp& op, const FracParams& p, const HVector& phi, double t_final,
                                  int m, const ZMesh& mesh, const SolverConfig& cfg = {}, bool record_u = false,
                                  int u_stride = 1) {
    if (!(t_final > 0.0)) throw InvalidArgument("evolve: t_final must be positive");
    if (m < 1) throw InvalidArgument("evolve: m must be >= 1");
    if (u_stride < 1) throw InvalidArgument("evolve: u_stride must be >= 1");
    require_dim(phi, op.dim);
    const double dt = t_final / m;

    SemigroupTrajectory tr;
    tr.substeps = m;
    tr.times.push_back(0.0);
    tr.states.push_back(phi);
    std::optional<Matrix> warm;
    for (int k = 1; k <= m; ++k) {
        auto sol = resolve_lambda_s_solution(op, p, dt, tr.states.back(), mesh, cfg, warm);
        warm = std::move(sol.state);
        tr.times.push_back(k == m ? t_final : k * dt);
        tr.states.push_back(std::move(sol.trace_v0));
    }
    if (record_u) {
        for (std::size_t k = 0; k < tr.states.size(); k += u_stride) {
            ExtensionProblem prob{op, p, mesh, Boundary::dirichlet(tr.states[k]), cfg, std::nullopt};
            tr.u_time_index.push_back(k);
            tr.u_field.push_back(pullback_to_t(p, solve(prob).v));
        }
    }
    return tr;
}

struct TrajectoryReport {
    double max_distance_increase = 0.0;
    bool contraction_pass = true;
    bool lattice_checked = false;
    double order_violation = 0.0;  ///< for initially ordered pairs
    double l1_increase = 0.0;
    double linf_increase = 0.0;
    bool pass = true;
};

/// Pairwise distance nonincreasing in time; for lattice operators also order
/// preservation and L¹ / L^∞ non-expansion.
inline TrajectoryReport trajectory_audit(const SemigroupTrajectory& a, const SemigroupTrajectory& b, bool lattice,
                                         double eps = 1e-8) {
    if (a.times != b.times) throw InvalidArgument("trajectory_audit: trajectories on different time grids");
    TrajectoryReport r;
    const std::size_t n = a.states.size();
    const HVector d0 = a.states[0] - b.states[0];
    const double scale = 1.0 + d0.norm();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const HVector dk = a.states[k] - b.states[k], dn = a.states[k + 1] - b.states[k + 1];
        r.max_distance_increase = std::max(r.max_distance_increase, dn.norm() - dk.norm());
        if (lattice) {
            r.l1_increase = std::max(r.l1_increase, dn.lpNorm<1>() - dk.lpNorm<1>());
            r.linf_increase = std::max(r.linf_increase, dn.lpNorm<Eigen::Infinity>() - dk.lpNorm<Eigen::Infinity>());
        }
    }
    r.contraction_pass = r.max_distance_increase <= eps * scale;
    r.pass = r.contraction_pass;
    if (lattice) {
        r.lattice_checked = true;
        const bool le = (d0.array() <= 0.0).all(), ge = (d0.array() >= 0.0).all();
        for (std::size_t k = 0; k < n; ++k) {
            const HVector dk = a.states[k] - b.states[k];
            if (le) r.order_violation = std::max(r.order_violation, dk.maxCoeff());
            if (ge) r.order_violation = std::max(r.order_violation, -dk.minCoeff());
        }
        r.pass = r.pass && r.order_violation <= eps * scale && r.l1_increase <= eps * scale &&
                 r.linf_increase <= eps * scale;
    }
    return r;
}

/// max_k ‖Λ_s(states[k]) + (states[k] - states[k-1])/dt‖ / (1 + ‖Λ_s(states[k])‖).
inline double generator_residual(const SemigroupTrajectory& tr, const MonotoneOp& op, const FracParams& p,
                                 const ZMesh& mesh, const SolverConfig& cfg = {}) {
    double worst = 0.0;
    for (std::size_t k = 1; k < tr.states.size(); ++k) {
        const double dt = tr.times[k] - tr.times[k - 1];
        const HVector L = apply_lambda_s(op, p, tr.states[k], mesh, cfg).lambda_s_phi;
        const HVector bd = (tr.states[k] - tr.states[k - 1]) / dt;
        worst = std::max(worst, (L + bd).norm() / (1.0 + L.norm()));
    }
    return worst;
}

}  // namespace fracmono
