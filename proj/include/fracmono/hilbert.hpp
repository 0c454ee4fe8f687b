#pragma once

// Finite-dimensional Hilbert space primitives and the weighted norms of
// L^2_*(H) = L^2((0,inf), dz/z; H) evaluated on one-dimensional grids.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fracmono/errors.hpp"

namespace fracmono {

using HVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void require_same_dim(const HVector& a, const HVector& b) {
    if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
}

inline void require_dim(const HVector& a, long dim) {
    if (a.size() != dim) throw DimensionMismatch(dim, a.size());
}

inline bool all_finite(const HVector& a) { return a.allFinite(); }

inline void require_finite(const HVector& a, const char* what) {
    if (!a.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

inline double inner(const HVector& a, const HVector& b) {
    require_same_dim(a, b);
    return a.dot(b);
}

inline double norm(const HVector& a) { return a.norm(); }

/// Values of an H-valued function sampled on a strictly increasing 1-D grid.
struct GridFunction {
    std::vector<double> nodes;
    std::vector<HVector> values;

    std::size_t size() const noexcept { return nodes.size(); }
    long dim() const noexcept { return values.empty() ? 0 : values.front().size(); }

    void validate() const {
        if (nodes.size() != values.size())
            throw InvalidArgument("GridFunction: node count and value count differ");
        if (nodes.empty()) throw InvalidArgument("GridFunction: empty");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!(nodes[i] > nodes[i - 1]))
                throw InvalidArgument("GridFunction: nodes not strictly increasing");
        if (nodes.front() < 0.0) throw InvalidArgument("GridFunction: negative node");
        const long d = values.front().size();
        for (const auto& v : values) {
            if (v.size() != d) throw DimensionMismatch(d, v.size());
            require_finite(v, "GridFunction");
        }
    }
};

namespace detail {

// ∫_0^{z1} z^{2w-1} q(z) dz with q linear between q0 = q(0) and q1 = q(z1).
inline double first_cell_moment(double z1, double w, double q0, double q1) {
    const double e = 2.0 * w;
    if (q0 != 0.0 && e <= 0.0)
        throw SingularIntegrand("weighted L2_* norm: integrand not integrable at z = 0 (weight " +
                                std::to_string(w) + ")");
    if (e + 1.0 <= 0.0)
        throw SingularIntegrand("weighted L2_* norm: integrand not integrable at z = 0");
    const double zp = std::pow(z1, e);
    const double c0 = q0 == 0.0 ? 0.0 : q0 * zp * (1.0 / e - 1.0 / (e + 1.0));
    return c0 + q1 * zp / (e + 1.0);
}

}  // namespace detail

/// ‖z^w f‖_{L²_*(H)} = (∫ ‖z^w f(z)‖² dz/z)^{1/2}.
///
/// Trapezoidal rule in log z. When the grid starts at z = 0 the first cell is
/// integrated exactly with ‖f‖² interpolated linearly in z, which requires
/// w > 0 unless f(0) = 0.
inline double weighted_l2_star_norm(const GridFunction& f, double w) {
    f.validate();
    const auto& z = f.nodes;
    const std::size_t n = z.size();
    if (n < 2) return 0.0;
    auto g = [&](std::size_t i) { return std::pow(z[i], 2.0 * w) * f.values[i].squaredNorm(); };

    double acc = 0.0;
    std::size_t start = 0;
    if (z[0] == 0.0) {
        acc += detail::first_cell_moment(z[1], w, f.values[0].squaredNorm(),
                                         f.values[1].squaredNorm());
        start = 1;
    }
    for (std::size_t i = start; i + 1 < n; ++i)
        acc += 0.5 * std::log(z[i + 1] / z[i]) * (g(i) + g(i + 1));
    return std::sqrt(acc);
}

/// Exact ‖z^w f‖_{L²_*(H)} for f piecewise constant on the cells of `edges`
/// (cell i is [edges[i], edges[i+1]] with value cells[i]).
inline double cellwise_l2_star_norm(std::span<const double> edges, std::span<const HVector> cells,
                                    double w) {
    if (edges.size() != cells.size() + 1)
        throw InvalidArgument("cellwise_l2_star_norm: need one more edge than cells");
    const double e = 2.0 * w;
    double acc = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double a = edges[i], b = edges[i + 1];
        double mom;
        if (e == 0.0) {
            if (a == 0.0) throw SingularIntegrand("cellwise_l2_star_norm: log-divergent at z = 0");
            mom = std::log(b / a);
        } else {
            if (a == 0.0 && e < 0.0)
                throw SingularIntegrand("cellwise_l2_star_norm: divergent at z = 0");
            mom = (std::pow(b, e) - std::pow(a, e)) / e;
        }
        acc += mom * cells[i].squaredNorm();
    }
    return std::sqrt(acc);
}

/// Norm of the mixed-weight space W^{1,2}_{w1,w2}(H).
inline double sobolev_mixed_norm(const GridFunction& f, const GridFunction& df, double w1,
                                 double w2) {
    if (f.nodes != df.nodes) throw InvalidArgument("sobolev_mixed_norm: f and df on different grids");
    const double a = weighted_l2_star_norm(f, w1);
    const double b = weighted_l2_star_norm(df, w2);
    return std::sqrt(a * a + b * b);
}

}  // namespace fracmono
