#pragma once

// Exponent bookkeeping, graded grids in the extension variable z, and the
// change of variable z = (t/2s)^{2s} between the Bessel-type problem in t and
// the weighted problem z^{-(1-2s)/s} v'' ∈ A v.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fracmono/errors.hpp"
#include "fracmono/hilbert.hpp"

namespace fracmono {

struct FracParams {
    double s = 0.5;
    double alpha = 0.0;        ///< 1 - 2s
    double zexp = 0.0;         ///< (1 - 2s)/s, the weight exponent in z
    double underline_s = 0.5;  ///< (1 - s)/(2s)
    double overline_s = 0.5;   ///< (3s - 1)/(2s)
    double trace_const = 1.0;  ///< (2s)^{1-2s}

    static FracParams from_s(double s) {
        if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("FracParams: s must lie in (0,1)");
        FracParams p;
        p.s = s;
        p.alpha = 1.0 - 2.0 * s;
        p.zexp = (1.0 - 2.0 * s) / s;
        p.underline_s = (1.0 - s) / (2.0 * s);
        p.overline_s = (3.0 * s - 1.0) / (2.0 * s);
        p.trace_const = s == 0.5 ? 1.0 : std::pow(2.0 * s, 1.0 - 2.0 * s);
        return p;
    }
};

enum class FarBC { DirichletAtZero, HomogeneousNeumann };

inline const char* to_string(FarBC bc) {
    return bc == FarBC::DirichletAtZero ? "dirichlet_at_zero" : "neumann";
}

struct ZMesh {
    std::vector<double> nodes;
    double Z = 0.0;
    double grading = 1.0;
    FarBC far_bc = FarBC::DirichletAtZero;

    long n_cells() const { return static_cast<long>(nodes.size()) - 1; }
    double width(long i) const { return nodes[i + 1] - nodes[i]; }
};

/// nodes[i] = Z (i/N)^γ, i = 0..N.
inline ZMesh graded_zmesh(int N, double Z, double gamma, FarBC far_bc = FarBC::DirichletAtZero) {
    if (N < 8) throw InvalidArgument("graded_zmesh: need N >= 8");
    if (!(Z > 0.0) || !std::isfinite(Z)) throw InvalidArgument("graded_zmesh: Z must be positive");
    if (!(gamma >= 1.0)) throw InvalidArgument("graded_zmesh: grading must be >= 1");
    ZMesh m;
    m.Z = Z;
    m.grading = gamma;
    m.far_bc = far_bc;
    m.nodes.resize(N + 1);
    for (int i = 0; i <= N; ++i) m.nodes[i] = Z * std::pow(static_cast<double>(i) / N, gamma);
    m.nodes[N] = Z;
    for (int i = 1; i <= N; ++i)
        if (!(m.nodes[i] > m.nodes[i - 1])) throw InvalidArgument("graded_zmesh: nodes collapse");
    return m;
}

inline double default_grading(const FracParams& p) { return std::max(2.0, 1.0 / (2.0 * p.s)); }

inline double z_of_t(const FracParams& p, double t) {
    if (!(t >= 0.0)) throw InvalidArgument("z_of_t: negative argument");
    return std::pow(t / (2.0 * p.s), 2.0 * p.s);
}

inline double t_of_z(const FracParams& p, double z) {
    if (!(z >= 0.0)) throw InvalidArgument("t_of_z: negative argument");
    return 2.0 * p.s * std::pow(z, 1.0 / (2.0 * p.s));
}

/// Z such that exp(-sqrt(lambda_min) t(Z)) = decay, for linear problems whose
/// smallest curvature is lambda_min > 0.
inline double auto_truncation(const FracParams& p, double lambda_min, double decay = 1e-10) {
    if (!(lambda_min > 0.0)) throw InvalidArgument("auto_truncation: needs a positive spectral gap");
    const double tZ = -std::log(decay) / std::sqrt(lambda_min);
    return z_of_t(p, tZ);
}

/// u(t) = v(z(t)): same values on the image nodes t_i = t(z_i).
inline GridFunction pullback_to_t(const FracParams& p, const GridFunction& f) {
    f.validate();
    GridFunction g;
    g.values = f.values;
    g.nodes.reserve(f.size());
    for (double z : f.nodes) g.nodes.push_back(t_of_z(p, z));
    return g;
}

/// u'(t) = v'(z) z^{-(1-2s)/(2s)}. The factor is unbounded at z = 0 for
/// s < 1/2, so a node at z = 0 is dropped there.
inline GridFunction pullback_derivative_to_t(const FracParams& p, const GridFunction& df) {
    df.validate();
    const double e = -(1.0 - 2.0 * p.s) / (2.0 * p.s);
    GridFunction g;
    for (std::size_t i = 0; i < df.size(); ++i) {
        const double z = df.nodes[i];
        if (z == 0.0 && e < 0.0) continue;
        const double fac = z == 0.0 ? (e == 0.0 ? 1.0 : 0.0) : std::pow(z, e);
        g.nodes.push_back(t_of_z(p, z));
        g.values.push_back(fac * df.values[i]);
    }
    return g;
}

}  // namespace fracmono
