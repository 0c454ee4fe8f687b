#pragma once

// The extension problem in the z variable,
//
//     z^{-(1-2s)/s} v'' ∈ A v on (0, Z),   v(0) = φ  or  -(2s)^{1-2s} v'(0) + λ v(0) = φ,
//
// with v(Z) = y (a zero of A) or v'(Z) = 0 at the far end.
//
// Two solvers: Douglas–Rachford splitting between the weighted stiffness
// operator and the node-wise resolvents of A, and a regularization path that
// replaces A by A_λ + δ(· - y) and sends λ, δ to 0 with warm starts.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fracmono/detail/zdisc.hpp"
#include "fracmono/errors.hpp"
#include "fracmono/hilbert.hpp"
#include "fracmono/mesh.hpp"
#include "fracmono/monops.hpp"

namespace fracmono {

enum class SolverMethod { Splitting, RegularizedPath };

inline const char* to_string(SolverMethod m) {
    return m == SolverMethod::Splitting ? "splitting" : "regularized_path";
}

struct RegularizationSchedule {
    std::vector<double> lambda_seq;
    std::vector<double> delta_seq;
    bool warm_start = true;

    /// λ_k = δ_k = 2^{-k}, k = 0..k_max.
    static RegularizationSchedule geometric(int k_max = 20) {
        RegularizationSchedule r;
        for (int k = 0; k <= k_max; ++k) {
            r.lambda_seq.push_back(std::ldexp(1.0, -k));
            r.delta_seq.push_back(std::ldexp(1.0, -k));
        }
        return r;
    }

    void validate() const {
        if (lambda_seq.empty() || lambda_seq.size() != delta_seq.size())
            throw InvalidArgument("schedule: λ and δ sequences must be nonempty and of equal length");
        for (std::size_t i = 0; i < lambda_seq.size(); ++i) {
            if (!(lambda_seq[i] > 0.0 && delta_seq[i] > 0.0))
                throw InvalidArgument("schedule: entries must be positive");
            if (i > 0 && (lambda_seq[i] >= lambda_seq[i - 1] || delta_seq[i] >= delta_seq[i - 1]))
                throw InvalidArgument("schedule: sequences must be decreasing");
        }
        if (lambda_seq.back() > 1e-6 * lambda_seq.front() || delta_seq.back() > 1e-6 * delta_seq.front())
            throw InvalidArgument("schedule: last entry must be <= 1e-6 times the first");
    }
};

struct SolverConfig {
    SolverMethod method = SolverMethod::Splitting;
    /// Douglas–Rachford step γ; unset picks the per-method default below.
    std::optional<double> step;
    double relaxation = 1.0;
    long max_iters = 50000;
    double tol = 1e-10;
    RegularizationSchedule schedule = RegularizationSchedule::geometric();

    // Splitting converges fastest with a large step because the metric P then
    // leans on diag(K); the Yosida stages of the path prefer γ ~ 1.
    double step_for(SolverMethod m) const {
        return step ? *step : (m == SolverMethod::Splitting ? 100.0 : 1.0);
    }

    void validate() const {
        if (step && !(*step > 0.0)) throw InvalidArgument("solver: step must be positive");
        if (!(relaxation > 0.0 && relaxation < 2.0)) throw InvalidArgument("solver: relaxation must lie in (0,2)");
        if (max_iters < 1) throw InvalidArgument("solver: max_iters must be >= 1");
        if (!(tol > 0.0)) throw InvalidArgument("solver: tol must be positive");
        if (method == SolverMethod::RegularizedPath) schedule.validate();
    }
};

struct Boundary {
    enum class Kind { Dirichlet, Robin };
    Kind kind = Kind::Dirichlet;
    double lambda = 0.0;
    HVector phi;

    static Boundary dirichlet(HVector phi) { return {Kind::Dirichlet, 0.0, std::move(phi)}; }
    static Boundary robin(double lambda, HVector phi) {
        if (!(lambda > 0.0)) throw InvalidArgument("Robin boundary: λ must be positive");
        return {Kind::Robin, lambda, std::move(phi)};
    }
    bool is_robin() const { return kind == Kind::Robin; }
};

struct ExtensionProblem {
    MonotoneOp op;
    FracParams params;
    ZMesh mesh;
    Boundary boundary;
    SolverConfig solver;
    /// Optional splitting state from a previous solve on the same mesh.
    std::optional<Matrix> warm_start;

    void validate() const {
        require_dim(boundary.phi, op.dim);
        require_finite(boundary.phi, "extension: φ");
        if (boundary.is_robin() && !(boundary.lambda > 0.0))
            throw InvalidArgument("extension: Robin requires λ > 0");
        solver.validate();
        if (mesh.nodes.size() < 3) throw InvalidArgument("extension: mesh too small");
    }
};

/// Where the boundary selection w_0 ∈ A φ of a Dirichlet solve came from.
enum class TraceSelection { Solved, DirectEval, MinimalSelection, NeighborNode };

struct ExtensionSolution {
    GridFunction v;
    GridFunction v_prime;           ///< nodal flux recovery
    GridFunction w;                 ///< selection w_i ∈ A v_i
    std::vector<HVector> cell_slope;  ///< (v_{i+1} - v_i)/h_i per cell
    HVector trace_v0;
    HVector trace_dv0;              ///< consistent flux v'(0) = (v_1 - v_0)/h_0 - m_0 w_0
    HVector fit_slope;              ///< least-squares slope of v on nodes 1..4 (diagnostic)
    double fit_residual = 0.0;      ///< relative misfit between fit_slope and trace_dv0
    TraceSelection selection = TraceSelection::Solved;
    double inclusion_residual = 0.0;
    long iterations = 0;
    bool converged = false;
    SolverMethod method = SolverMethod::Splitting;
    Matrix state;  ///< splitting state, reusable as a warm start
};

namespace detail {

struct NodeResolvent {
    std::function<Matrix(const Eigen::VectorXd&, const Matrix&)> apply;
};

inline NodeResolvent plain_node_resolvent(const MonotoneOp& op) {
    return {[&op](const Eigen::VectorXd& g, const Matrix& X) { return resolve_rows(op, g, X); }};
}

// Resolvent of A_λ + δ(· - y):
//   J_γ(x) = J_{γ'}^{A_λ}(x'),  γ' = γ/(1+γδ),  x' = (x + γδ y)/(1+γδ),
//   J_μ^{A_λ}(x) = (λ x + μ J_{λ+μ}^{A}(x))/(λ + μ).
inline NodeResolvent regularized_node_resolvent(const MonotoneOp& op, double lambda, double delta) {
    return {[&op, lambda, delta](const Eigen::VectorXd& g, const Matrix& X) {
        const Eigen::ArrayXd gd = g.array() * delta;
        const Eigen::VectorXd gp = (g.array() / (1.0 + gd)).matrix();
        Matrix Xp = X + gd.matrix() * op.zero.transpose();
        Xp = (1.0 + gd).inverse().matrix().asDiagonal() * Xp;
        const Matrix J = resolve_rows(op, (gp.array() + lambda).matrix(), Xp);
        const Eigen::VectorXd den = (gp.array() + lambda).inverse().matrix();
        return Matrix(den.asDiagonal() * (lambda * Xp + gp.asDiagonal() * J));
    }};
}

struct DRResult {
    Matrix X, U, W;
    double residual = INFINITY;
    long iterations = 0;
};

// Largest value of γ P^{-1} K the splitting metric allows.
// Douglas–Rachford for 0 ∈ (K v - b) + M A(v) in the metric P = M + (γ/cap) diag(K):
// linear step (P + γK) U = P X + γ b, node step J^A_{γ m_i / p_i}.
inline DRResult douglas_rachford(const ZDisc& D, const NodeResolvent& node, const Matrix& B, Matrix X,
                                 double gamma, double theta, double tol_abs, long max_iters, double cap) {
    const Eigen::VectorXd P = D.metric(gamma, cap);
    const TriLDL F = D.factor(P, gamma);
    Eigen::Map<const Eigen::VectorXd> mfree(D.m.data() + D.first, D.nfree());
    const Eigen::VectorXd mu = gamma * mfree.cwiseQuotient(P);
    DRResult r;
    for (long it = 1; it <= max_iters; ++it) {
        Matrix U = P.asDiagonal() * X + gamma * B;
        F.solve_in_place(U);
        const Matrix Y = 2.0 * U - X;
        const Matrix A = node.apply(mu, Y);
        const Matrix diff = A - U;
        X += theta * diff;
        r.residual = diff.rowwise().norm().maxCoeff();
        r.iterations = it;
        if (r.residual <= tol_abs || it == max_iters) {
            r.W = mu.cwiseInverse().asDiagonal() * (Y - A);  // element of A at the node-step output
            r.U = std::move(U);
            break;
        }
    }
    r.X = std::move(X);
    return r;
}

// Re-express a splitting state for the metric with cap `cap`: X = U - γ P^{-1} M W.
inline Matrix convert_state(const ZDisc& D, const DRResult& r, double gamma, double cap) {
    const Eigen::VectorXd P = D.metric(gamma, cap);
    Eigen::Map<const Eigen::VectorXd> mfree(D.m.data() + D.first, D.nfree());
    return r.U - (gamma * mfree.cwiseQuotient(P)).asDiagonal() * r.W;
}

// Metric caps tried in turn: a near-mass metric suits smooth A, a stiffer cap
// handles constraints and steep monotone graphs near z = 0.
inline constexpr double kCapFast = 4096.0, kCapRobust = 512.0;
inline constexpr long kFastBudget = 4000;

inline DRResult split(const ZDisc& D, const NodeResolvent& node, const Matrix& B, const Matrix& X, double gamma,
                      double theta, double tol_abs, long max_iters) {
    auto r = douglas_rachford(D, node, B, X, gamma, theta, tol_abs, std::min(max_iters, kFastBudget), kCapFast);
    if (r.residual <= tol_abs || r.iterations >= max_iters) return r;
    const long used = r.iterations;
    auto r2 = douglas_rachford(D, node, B, convert_state(D, r, gamma, kCapRobust), gamma, theta, tol_abs,
                               max_iters - used, kCapRobust);
    r2.iterations += used;
    r2.X = convert_state(D, r2, gamma, kCapFast);
    return r2;
}

inline Matrix initial_state(const ExtensionProblem& prob, const ZDisc& D) {
    if (prob.warm_start && prob.warm_start->rows() == D.nfree() && prob.warm_start->cols() == prob.op.dim)
        return *prob.warm_start;
    return prob.op.zero.transpose().replicate(D.nfree(), 1);
}

inline ExtensionSolution finish_solution(const ExtensionProblem& prob, const ZDisc& D, const DRResult& dr,
                                         long iterations) {
    const auto& op = prob.op;
    const HVector& phi = prob.boundary.phi;
    const long n = op.dim, N = D.N();
    const double scale = 1.0 + phi.norm();

    ExtensionSolution sol;
    sol.method = prob.solver.method;
    sol.iterations = iterations;
    sol.inclusion_residual = dr.residual / scale;
    sol.converged = sol.inclusion_residual <= prob.solver.tol;
    sol.state = dr.X;

    const Matrix V = D.expand(dr.U, phi, op.zero);
    Matrix W = Matrix::Zero(N + 1, n);
    W.middleRows(D.first, D.nfree()) = dr.W;

    if (!prob.boundary.is_robin()) {
        sol.selection = TraceSelection::NeighborNode;
        HVector w0 = W.row(1).transpose();
        try {
            if (op.direct_eval) {
                w0 = op.direct_eval(phi);
                sol.selection = TraceSelection::DirectEval;
            } else {
                w0 = minimal_selection(op, phi);
                sol.selection = TraceSelection::MinimalSelection;
            }
        } catch (const NotInDomain&) {
        }
        W.row(0) = w0.transpose();
    }

    sol.v.nodes = D.z;
    sol.w.nodes = D.z;
    sol.v_prime.nodes = D.z;
    for (long i = 0; i <= N; ++i) {
        sol.v.values.push_back(V.row(i).transpose());
        sol.w.values.push_back(W.row(i).transpose());
    }
    for (long i = 0; i < N; ++i) sol.cell_slope.push_back((V.row(i + 1) - V.row(i)).transpose() / D.h[i]);

    sol.trace_v0 = V.row(0).transpose();
    sol.trace_dv0 = sol.cell_slope[0] - D.m[0] * sol.w.values[0];
    sol.v_prime.values.push_back(sol.trace_dv0);
    for (long i = 1; i <= N; ++i)
        sol.v_prime.values.push_back(sol.cell_slope[i - 1] + D.m_left[i] * sol.w.values[i]);

    // Least-squares line through (z_i, v_i), i = 1..4.
    const long k = std::min<long>(4, N);
    double zb = 0.0;
    HVector vb = HVector::Zero(n);
    for (long i = 1; i <= k; ++i) {
        zb += D.z[i];
        vb += sol.v.values[i];
    }
    zb /= k;
    vb /= k;
    double szz = 0.0;
    HVector szv = HVector::Zero(n);
    for (long i = 1; i <= k; ++i) {
        szz += (D.z[i] - zb) * (D.z[i] - zb);
        szv += (D.z[i] - zb) * (sol.v.values[i] - vb);
    }
    sol.fit_slope = szv / szz;
    const double ref = std::max(sol.trace_dv0.norm(), sol.fit_slope.norm());
    sol.fit_residual = ref > 0.0 ? (sol.fit_slope - sol.trace_dv0).norm() / ref : 0.0;
    return sol;
}

}  // namespace detail

namespace detail {

// Node-wise strong-form residual, less the rounding floor of evaluating
// (K v)_i / m_i in double precision (m_i is tiny near z = 0 on graded meshes).
inline double nodal_residual(const ZDisc& D, const Matrix& V, const MonotoneOp& op) {
    const Matrix KV = D.stiffness_apply(V);
    const double eps = std::numeric_limits<double>::epsilon();
    double worst = 0.0;
    for (long i = 1; i < D.N(); ++i) {
        const HVector lhs = -KV.row(i).transpose() / D.m[i];
        const double mag = (V.row(i - 1).norm() / D.h[i - 1] + V.row(i).norm() * (1.0 / D.h[i - 1] + 1.0 / D.h[i]) +
                            V.row(i + 1).norm() / D.h[i]);
        const double floor = 8.0 * eps * mag / D.m[i];
        worst = std::max(worst, (lhs - op.direct_eval(V.row(i).transpose())).norm() - floor);
    }
    return std::max(worst, 0.0);
}

}  // namespace detail

inline ExtensionSolution solve(const ExtensionProblem& prob) {
    prob.validate();
    const auto& op = prob.op;
    const auto& cfg = prob.solver;
    const detail::ZDisc D(prob.params, prob.mesh, prob.boundary.is_robin(), prob.boundary.lambda);
    const Matrix B = D.rhs(prob.boundary.phi, op.zero);
    const double scale = 1.0 + prob.boundary.phi.norm();
    Matrix X = detail::initial_state(prob, D);

    if (cfg.method == SolverMethod::Splitting) {
        const auto node = detail::plain_node_resolvent(op);
        double tol_abs = cfg.tol * scale;
        auto dr = detail::split(D, node, B, std::move(X), cfg.step_for(cfg.method), cfg.relaxation, tol_abs, cfg.max_iters);
        long total = dr.iterations;
        // The fixed-point residual bounds the node-wise inclusion error only up to
        // the local Lipschitz constant of A; tighten until the latter is below tol.
        if (op.direct_eval && dr.residual <= tol_abs) {
            try {
                const double target = cfg.tol * (1.0 + op.direct_eval(prob.boundary.phi).norm());
                double prev = INFINITY;
                for (int round = 0; round < 8 && total < cfg.max_iters; ++round) {
                    const double r = detail::nodal_residual(D, D.expand(dr.U, prob.boundary.phi, op.zero), op);
                    if (r <= target || r > 0.5 * prev) break;
                    prev = r;
                    tol_abs *= std::max(0.5 * target / r, 1e-3);
                    const Matrix Xk = dr.X;
                    auto more = detail::split(D, node, B, Xk, cfg.step_for(cfg.method), cfg.relaxation, tol_abs,
                                                         cfg.max_iters - total);
                    total += more.iterations;
                    dr = std::move(more);
                }
            } catch (const NotInDomain&) {
            }
        }
        return detail::finish_solution(prob, D, dr, total);
    }

    const auto& sch = cfg.schedule;
    long budget = cfg.max_iters, total = 0;
    const Matrix X0 = X;
    detail::DRResult dr;
    for (std::size_t k = 0; k < sch.lambda_seq.size() && budget > 0; ++k) {
        const double lam = sch.lambda_seq[k], del = sch.delta_seq[k];
        const bool last = k + 1 == sch.lambda_seq.size();
        // Intermediate stages only need to land within the path increment.
        const double stage_tol = last ? cfg.tol : std::max(cfg.tol, 1e-3 * std::min(lam, del));
        dr = detail::split(D, detail::regularized_node_resolvent(op, lam, del), B,
                                      sch.warm_start ? X : X0, cfg.step_for(cfg.method), cfg.relaxation, stage_tol * scale, budget);
        budget -= dr.iterations;
        total += dr.iterations;
        X = dr.X;
    }
    return detail::finish_solution(prob, D, dr, total);
}

/// One stage of the regularization path: A replaced by A_λ + δ(· - y), Dirichlet or Robin data as given.
inline ExtensionSolution solve_regularized(const ExtensionProblem& prob, double lambda, double delta) {
    if (!(lambda > 0.0 && delta >= 0.0)) throw InvalidArgument("solve_regularized: need λ > 0, δ >= 0");
    ExtensionProblem p = prob;
    const double gamma = p.solver.step_for(SolverMethod::RegularizedPath);
    p.solver.method = SolverMethod::Splitting;
    p.validate();
    const detail::ZDisc D(p.params, p.mesh, p.boundary.is_robin(), p.boundary.lambda);
    const Matrix B = D.rhs(p.boundary.phi, p.op.zero);
    const double scale = 1.0 + p.boundary.phi.norm();
    const auto dr = detail::split(D, detail::regularized_node_resolvent(p.op, lambda, delta), B,
                                             detail::initial_state(p, D), gamma, p.solver.relaxation,
                                             p.solver.tol * scale, p.solver.max_iters);
    auto sol = detail::finish_solution(p, D, dr, dr.iterations);
    // The boundary selection belongs to the regularized operator.
    if (!p.boundary.is_robin()) {
        const HVector& phi = p.boundary.phi;
        sol.w.values[0] = yosida(p.op, lambda, phi) + delta * (phi - p.op.zero);
        sol.selection = TraceSelection::Solved;
        sol.trace_dv0 = sol.cell_slope[0] - D.m[0] * sol.w.values[0];
        sol.v_prime.values[0] = sol.trace_dv0;
    }
    return sol;
}

/// max_i ‖-(K v)_i / m_i - A⁰ v_i‖ / (1 + ‖A⁰ φ‖) over interior nodes; needs direct_eval.
inline double nodal_inclusion_residual(const ExtensionSolution& sol, const ExtensionProblem& prob) {
    if (!prob.op.direct_eval) throw InvalidArgument("nodal_inclusion_residual: operator has no direct_eval");
    const detail::ZDisc D(prob.params, prob.mesh, prob.boundary.is_robin(), prob.boundary.lambda);
    Matrix V(D.N() + 1, prob.op.dim);
    for (long i = 0; i <= D.N(); ++i) V.row(i) = sol.v.values[i].transpose();
    return detail::nodal_residual(D, V, prob.op) / (1.0 + prob.op.direct_eval(prob.boundary.phi).norm());
}

/// Change of v(0) (Robin) or v'(0) (Dirichlet) when Z and N are doubled with
/// the same grading: the empirical truncation test for nonlinear problems.
inline double truncation_doubling_check(const ExtensionProblem& prob) {
    ExtensionProblem p2 = prob;
    p2.warm_start.reset();
    const int N = static_cast<int>(prob.mesh.nodes.size()) - 1;
    p2.mesh = graded_zmesh(2 * N, 2.0 * prob.mesh.Z, prob.mesh.grading, prob.mesh.far_bc);
    ExtensionProblem p1 = prob;
    p1.warm_start.reset();
    const auto a = solve(p1), b = solve(p2);
    if (prob.boundary.is_robin()) return (a.trace_v0 - b.trace_v0).norm();
    return (a.trace_dv0 - b.trace_dv0).norm();
}

}  // namespace fracmono
