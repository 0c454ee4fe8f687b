#pragma once

// Reference solver for the discrete extension system on small meshes.
//
// Solves 0 ∈ (K v - b) + M A(v) on all free nodes at once by a diagonally
// preconditioned forward-backward iteration,
//     v_i ← J^A_{m_i/p_i}( v_i - (K v - b)_i / p_i ),   p_i = Σ_j |K_ij|,
// which shares no code with the splitting solver (masses are re-integrated here).

#include <cmath>
#include <vector>

#include "fracmono/errors.hpp"
#include "fracmono/extension.hpp"
#include "fracmono/hilbert.hpp"
#include "fracmono/mesh.hpp"
#include "fracmono/monops.hpp"

namespace fracmono::verify {

struct BruteForceResult {
    GridFunction v;
    long iterations = 0;
    double step_norm = 0.0;
    bool converged = false;
};

inline BruteForceResult brute_force_bvp(const MonotoneOp& op, const FracParams& p, const Boundary& bd,
                                        const ZMesh& mesh, double tol = 1e-12, long max_iters = 5000000) {
    const long N = static_cast<long>(mesh.nodes.size()) - 1;
    if (N + 1 > 12 || op.dim * (N + 1) > 200) throw InvalidArgument("brute_force_bvp: instance too large");
    require_dim(bd.phi, op.dim);
    const auto& z = mesh.nodes;
    const double k = p.zexp;

    // ∫_{z_a}^{z_b} z^k (linear hat) dz in closed form.
    std::vector<double> m(N + 1, 0.0);
    for (long i = 0; i < N; ++i) {
        const double a = z[i], b = z[i + 1], h = b - a;
        const double I0 = (std::pow(b, k + 1) - std::pow(a, k + 1)) / (k + 1);
        const double I1 = (std::pow(b, k + 2) - std::pow(a, k + 2)) / (k + 2);
        m[i] += (b * I0 - I1) / h;
        m[i + 1] += (I1 - a * I0) / h;
    }
    const bool robin = bd.is_robin();
    const bool far_dir = mesh.far_bc == FarBC::DirichletAtZero;
    const double rc = robin ? bd.lambda / p.trace_const : 0.0;
    const long lo = robin ? 0 : 1, hi = far_dir ? N - 1 : N;

    std::vector<HVector> v(N + 1, op.zero);
    if (!robin) v[0] = bd.phi;
    auto residual = [&](long i) {
        HVector r = HVector::Zero(op.dim);
        if (i > 0) r += (v[i] - v[i - 1]) / (z[i] - z[i - 1]);
        if (i < N) r += (v[i] - v[i + 1]) / (z[i + 1] - z[i]);
        if (i == 0) r += rc * v[0] - bd.phi / p.trace_const;
        return r;
    };
    std::vector<double> pre(N + 1, 0.0);
    for (long i = lo; i <= hi; ++i) {
        if (i > 0) pre[i] += 2.0 / (z[i] - z[i - 1]);
        if (i < N) pre[i] += 2.0 / (z[i + 1] - z[i]);
        if (i == 0) pre[i] += rc;
    }

    BruteForceResult out;
    for (long it = 1; it <= max_iters; ++it) {
        std::vector<HVector> next = v;
        double step = 0.0;
        for (long i = lo; i <= hi; ++i) {
            next[i] = resolve(op, m[i] / pre[i], v[i] - residual(i) / pre[i]);
            step = std::max(step, (next[i] - v[i]).norm());
        }
        v.swap(next);
        out.iterations = it;
        out.step_norm = step;
        if (step <= tol * (1.0 + bd.phi.norm())) {
            out.converged = true;
            break;
        }
    }
    out.v.nodes = z;
    out.v.values = v;
    return out;
}

}  // namespace fracmono::verify
