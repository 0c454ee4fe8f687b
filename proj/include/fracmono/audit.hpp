#pragma once

// A-priori estimate ledger for computed extension solutions, in both the
// t variable of the Bessel-type problem and the z variable of the solver.
//
// t-form norms are obtained exactly from z-form ones:
//   ‖t u'‖_*                    = sqrt(2s) ‖z v'‖_*
//   t ‖u'(t)‖                   = 2s z ‖v'(z)‖
//   ‖t^{1+2s}{t^{1-2s}u'}'‖_*   = (2s)^{3/2} ‖z² v''‖_*
//   ‖t^s {t^{1-2s}u'}‖_*        = (2s)^{(1-2s)/2} ‖v'‖_{L²(dz)}
//   ‖t^s {t^{1-2s}u'}'‖_*       = (2s)^{(1-2s)/2} ‖w‖_{L²(z^{(1-2s)/s} dz)}
//   lim t^{1-2s} u'             = (2s)^{1-2s} v'(0)

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fracmono/extension.hpp"
#include "fracmono/hilbert.hpp"
#include "fracmono/mesh.hpp"

namespace fracmono {

struct EstimateEntry {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  ///< rhs (1 + eps) - lhs, or the tolerance margin for zero-rhs checks
    bool pass = true;
    bool applicable = true;
};

struct EstimateReport {
    std::vector<EstimateEntry> entries;
    double eps_disc = 0.0;
    double distance = 0.0;  ///< ‖v(0) - y‖
    double a0_norm = -1.0;  ///< ‖A⁰φ‖, negative when unavailable

    bool all_pass() const {
        return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return !e.applicable || e.pass; });
    }
    const EstimateEntry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
};

/// 10 tol + 2 (first cell width)/Z.
inline double eps_disc(const ExtensionProblem& prob) {
    const auto& z = prob.mesh.nodes;
    return 10.0 * prob.solver.tol + 2.0 * (z[1] - z[0]) / z.back();
}

namespace detail {

inline void push_bound(EstimateReport& r, std::string name, double lhs, double rhs, bool applicable = true) {
    EstimateEntry e{std::move(name), lhs, rhs, rhs * (1.0 + r.eps_disc) - lhs, false, applicable};
    e.pass = e.slack >= 0.0;
    r.entries.push_back(e);
}

// Zero-rhs check: lhs measured relative to `scale`.
inline void push_zero(EstimateReport& r, std::string name, double lhs, double scale) {
    const double tol = r.eps_disc * scale;
    r.entries.push_back({std::move(name), lhs, 0.0, tol - lhs, lhs <= tol, true});
}

// Worst decrease of divided-difference slopes of g over nodes x, relative to max |slope|.
inline double convexity_violation(const std::vector<double>& x, const std::vector<double>& g) {
    std::vector<double> sl;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) sl.push_back((g[i + 1] - g[i]) / (x[i + 1] - x[i]));
    double smax = 0.0;
    for (double v : sl) smax = std::max(smax, std::abs(v));
    if (smax == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < sl.size(); ++i) worst = std::max(worst, (sl[i] - sl[i + 1]) / smax);
    return worst;
}

}  // namespace detail

inline EstimateReport audit_estimates(const ExtensionSolution& sol, const ExtensionProblem& prob) {
    const FracParams& p = prob.params;
    const double s = p.s;
    const HVector& y = prob.op.zero;
    const auto& z = sol.v.nodes;
    const std::size_t N = z.size() - 1;

    EstimateReport r;
    r.eps_disc = eps_disc(prob);
    // For Robin solutions the estimates are stated for the boundary value v(0).
    const double d = (sol.trace_v0 - y).norm();
    r.distance = d;

    // monotone decay of ‖v - y‖
    std::vector<double> dist(N + 1);
    for (std::size_t i = 0; i <= N; ++i) dist[i] = (sol.v.values[i] - y).norm();
    double inc = 0.0;
    for (std::size_t i = 0; i < N; ++i) inc = std::max(inc, dist[i + 1] - dist[i]);
    detail::push_zero(r, "distance_decay", inc, d);

    // energy of the first derivative
    const double zv = cellwise_l2_star_norm(z, sol.cell_slope, 1.0);
    detail::push_bound(r, "t_derivative_energy", std::sqrt(2.0 * s) * zv, std::sqrt(s) * d);
    detail::push_bound(r, "z_derivative_energy", zv, d / std::sqrt(2.0));

    // pointwise derivative bounds at cell midpoints
    double zmax = 0.0;
    for (std::size_t i = 0; i < N; ++i) zmax = std::max(zmax, 0.5 * (z[i] + z[i + 1]) * sol.cell_slope[i].norm());
    detail::push_bound(r, "t_derivative_pointwise", 2.0 * s * zmax, 2.0 * s * d);
    detail::push_bound(r, "z_derivative_pointwise", zmax, d);

    // ‖v'‖ nonincreasing
    double dinc = 0.0, dref = 0.0;
    for (std::size_t i = 0; i + 1 < N; ++i) {
        dinc = std::max(dinc, sol.cell_slope[i + 1].norm() - sol.cell_slope[i].norm());
        dref = std::max(dref, sol.cell_slope[i].norm());
    }
    detail::push_zero(r, "z_derivative_decay", dinc, dref);

    // second derivative: v'' = z^k w
    GridFunction g;
    g.nodes = z;
    for (std::size_t i = 0; i <= N; ++i)
        g.values.push_back((z[i] == 0.0 ? 0.0 : std::pow(z[i], 2.0 + p.zexp)) * sol.w.values[i]);
    const double z2v = weighted_l2_star_norm(g, 0.0);
    const bool upper_branch = s >= 0.5 || std::abs(s - 0.5) < 1e-3;
    const double t_rhs = upper_branch ? std::sqrt(s) * d
                                      : std::sqrt(s) * std::sqrt(s / (1.0 - 2.0 * s) * 0.5 + 3.0) / std::sqrt(2.0) * d;
    const double z_rhs = upper_branch ? d / std::sqrt(2.0) : 0.5 * std::sqrt(s / (1.0 - 2.0 * s) * 0.5 + 3.0) * d;
    detail::push_bound(r, "t_second_derivative_energy", std::pow(2.0 * s, 1.5) * z2v, t_rhs);
    detail::push_bound(r, "z_second_derivative_energy", z2v, z_rhs);

    // bounds for data in D(A)
    HVector a0;
    bool have_a0 = false;
    try {
        a0 = prob.op.direct_eval ? prob.op.direct_eval(sol.trace_v0) : minimal_selection(prob.op, sol.trace_v0);
        have_a0 = true;
    } catch (const NotInDomain&) {
    }
    if (have_a0) {
        const double A0 = a0.norm();
        r.a0_norm = A0;
        const double c = p.trace_const;
        const double ct = std::pow(2.0 * s, 0.5 * (1.0 - 2.0 * s));
        const double cr = std::pow(2.0 * s, 1.0 - s);
        const double sq = std::sqrt(A0) + std::sqrt(d);
        detail::push_bound(r, "trace_flux", c * sol.trace_dv0.norm(), c * sq * sq);
        double l2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) l2 += (z[i + 1] - z[i]) * sol.cell_slope[i].squaredNorm();
        detail::push_bound(r, "weighted_flux_energy", ct * std::sqrt(l2), cr * (std::sqrt(A0) + d));
        const double wn = weighted_l2_star_norm(sol.w, 0.5 * (p.zexp + 1.0));
        detail::push_bound(r, "weighted_flux_derivative_energy", ct * wn, cr * (A0 + std::sqrt(d) * std::sqrt(A0)));
    }

    // t ↦ ‖u(t) - y‖² convex and decreasing; z-convexity reported alongside
    std::vector<double> t(N + 1), sq(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        t[i] = t_of_z(p, z[i]);
        sq[i] = dist[i] * dist[i];
    }
    double sinc = 0.0;
    for (std::size_t i = 0; i < N; ++i) sinc = std::max(sinc, sq[i + 1] - sq[i]);
    detail::push_zero(r, "norm_square_decreasing", sinc, d * d);
    const double cv_t = detail::convexity_violation(t, sq);
    r.entries.push_back({"norm_square_convex_t", cv_t, 0.0, r.eps_disc - cv_t, cv_t <= r.eps_disc, true});
    const double cv_z = detail::convexity_violation(z, sq);
    r.entries.push_back({"norm_square_convex_z", cv_z, 0.0, r.eps_disc - cv_z, cv_z <= r.eps_disc, true});
    return r;
}

struct ContractionReport {
    double max_increase = 0.0;
    double initial_distance = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

/// ‖v_a(z) - v_b(z)‖ nonincreasing in z (equivalently in t).
inline ContractionReport contraction_check(const ExtensionSolution& a, const ExtensionSolution& b,
                                           double eps = 0.0) {
    if (a.v.nodes != b.v.nodes) throw InvalidArgument("contraction_check: solutions on different meshes");
    ContractionReport r;
    const std::size_t n = a.v.size();
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = (a.v.values[i] - b.v.values[i]).norm();
    for (std::size_t i = 0; i + 1 < n; ++i) r.max_increase = std::max(r.max_increase, diff[i + 1] - diff[i]);
    r.initial_distance = diff[0];
    r.tolerance = 1e-8 + eps * diff[0];
    r.pass = r.max_increase <= r.tolerance;
    return r;
}

struct CauchyBoundEntry {
    double lambda = 0.0, lambda_hat = 0.0;
    double lhs = 0.0, rhs = 0.0;
    bool pass = true;
};

/// For the regularized Dirichlet problems with A_λ + δ(· - y), checks
///   δ ‖v_λ - v_λ̂‖²_{L²(z^{(1-2s)/s} dz)}
///     ≤ (λ+λ̂)/4 [ (‖A⁰φ‖ + δ‖φ-y‖) + ‖φ-y‖^{1/2} (‖A⁰φ‖ + δ‖φ-y‖)^{1/2} ]².
inline std::vector<CauchyBoundEntry> cauchy_bound_check(const MonotoneOp& op, const FracParams& params,
                                                        const ZMesh& mesh, const HVector& phi, double delta,
                                                        const std::vector<std::pair<double, double>>& pairs,
                                                        SolverConfig cfg = {}) {
    if (!(delta > 0.0)) throw InvalidArgument("cauchy_bound_check: δ must be positive");
    ExtensionProblem prob{op, params, mesh, Boundary::dirichlet(phi), cfg, std::nullopt};
    const HVector a0 = op.direct_eval ? op.direct_eval(phi) : minimal_selection(op, phi);
    const double dn = (phi - op.zero).norm();
    const double q = a0.norm() + delta * dn;
    const double br = q + std::sqrt(dn) * std::sqrt(q);

    std::vector<CauchyBoundEntry> out;
    for (const auto& [l1, l2] : pairs) {
        const auto s1 = solve_regularized(prob, l1, delta);
        const auto s2 = solve_regularized(prob, l2, delta);
        GridFunction diff;
        diff.nodes = s1.v.nodes;
        for (std::size_t i = 0; i < s1.v.size(); ++i) diff.values.push_back(s1.v.values[i] - s2.v.values[i]);
        const double nrm = weighted_l2_star_norm(diff, 0.5 * (params.zexp + 1.0));
        CauchyBoundEntry e;
        e.lambda = l1;
        e.lambda_hat = l2;
        e.lhs = delta * nrm * nrm;
        e.rhs = 0.25 * (l1 + l2) * br * br;
        e.pass = e.lhs <= e.rhs;
        out.push_back(e);
    }
    return out;
}

}  // namespace fracmono
