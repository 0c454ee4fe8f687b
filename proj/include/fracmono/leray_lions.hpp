#pragma once

// Finite-difference Leray–Lions operators -div a(x, ∇u) on 1-D and 2-D grids
// with Dirichlet, Neumann or Robin lateral conditions.
//
// Fluxes are evaluated edge by edge: for an axis-aligned edge with direction
// e and difference quotient g, the flux across it is a(x_e, g) := a(x_e, g e)·e.
// Each edge flux is nondecreasing in g, so the assembled operator is
// monotone and T-accretive in the counting measure.

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracmono/errors.hpp"
#include "fracmono/hilbert.hpp"
#include "fracmono/monops.hpp"

namespace fracmono {

struct GridPoint {
    double x = 0.0;
    double y = 0.0;
};

enum class LateralBC { Dirichlet, Neumann, Robin };

inline const char* to_string(LateralBC bc) {
    switch (bc) {
        case LateralBC::Dirichlet: return "dirichlet";
        case LateralBC::Neumann: return "neumann";
        case LateralBC::Robin: return "robin";
    }
    return "?";
}

struct LerayLionsField {
    double p = 2.0;
    double eta = 1.0;  ///< coercivity constant: a(x,g) g >= eta |g|^p
    std::function<double(GridPoint, double)> flux;
    /// ∂a/∂g used by Newton; may be regularized at g = 0.
    std::function<double(GridPoint, double)> flux_slope;
    LateralBC lateral = LateralBC::Dirichlet;
    /// Robin coefficient b(x) >= 0 of a·ν + b |u|^{p-2} u = 0.
    std::function<double(GridPoint)> robin_b;

    /// a(x, g) = |g|^{p-2} g. The Newton slope uses (g² + eps²)^{(p-2)/2}.
    static LerayLionsField p_laplacian(double p, LateralBC bc = LateralBC::Dirichlet,
                                       double eps = 1e-12) {
        if (!(p > 1.0)) throw InvalidArgument("p_laplacian: p must exceed 1");
        LerayLionsField f;
        f.p = p;
        f.eta = 1.0;
        f.lateral = bc;
        f.flux = [p](GridPoint, double g) {
            return g == 0.0 ? 0.0 : std::pow(std::abs(g), p - 2.0) * g;
        };
        f.flux_slope = [p, eps](GridPoint, double g) {
            return (p - 1.0) * std::pow(g * g + eps * eps, 0.5 * (p - 2.0));
        };
        f.robin_b = [](GridPoint) { return 1.0; };
        return f;
    }

    /// a(x, g) = kappa(x) (eps² + g²)^{(p-2)/2} g for p >= 2, kappa >= kappa_min > 0.
    static LerayLionsField weighted_power(double p, std::function<double(GridPoint)> kappa,
                                          double kappa_min, double eps,
                                          LateralBC bc = LateralBC::Dirichlet) {
        if (!(p >= 2.0)) throw InvalidArgument("weighted_power: needs p >= 2");
        if (!(kappa_min > 0.0)) throw InvalidArgument("weighted_power: kappa_min must be positive");
        LerayLionsField f;
        f.p = p;
        f.eta = kappa_min;
        f.lateral = bc;
        f.flux = [p, kappa, eps](GridPoint x, double g) {
            return kappa(x) * std::pow(eps * eps + g * g, 0.5 * (p - 2.0)) * g;
        };
        f.flux_slope = [p, kappa, eps](GridPoint x, double g) {
            const double r = eps * eps + g * g;
            return kappa(x) * std::pow(r, 0.5 * (p - 2.0)) * (1.0 + (p - 2.0) * g * g / r);
        };
        f.robin_b = [](GridPoint) { return 1.0; };
        return f;
    }
};

/// Largest violation of a(x,g) g >= eta |g|^p over random samples (<= 0 means none).
template <class Rng>
double coercivity_violation(const LerayLionsField& f, Rng& rng, int samples = 1000) {
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::normal_distribution<double> ng(0.0, 3.0);
    double worst = -INFINITY;
    for (int i = 0; i < samples; ++i) {
        const GridPoint x{ux(rng), ux(rng)};
        const double g = ng(rng);
        const double lhs = f.flux(x, g) * g;
        const double rhs = f.eta * std::pow(std::abs(g), f.p);
        worst = std::max(worst, (rhs - lhs) / (1.0 + rhs));
    }
    return worst;
}

/// Largest violation of (a(x,g1) − a(x,g2))(g1 − g2) > 0 over random samples.
template <class Rng>
double monotonicity_violation(const LerayLionsField& f, Rng& rng, int samples = 1000) {
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::normal_distribution<double> ng(0.0, 3.0);
    double worst = -INFINITY;
    for (int i = 0; i < samples; ++i) {
        const GridPoint x{ux(rng), ux(rng)};
        const double g1 = ng(rng), g2 = ng(rng);
        if (g1 == g2) continue;
        worst = std::max(worst, -(f.flux(x, g1) - f.flux(x, g2)) * (g1 - g2));
    }
    return worst;
}

struct GridSpec {
    int nx = 2;
    int ny = 1;  ///< 1 for a 1-D grid
    double h = 1.0;
    /// Neumann only: act on the mean-zero subspace.
    bool project_mean = true;

    long size() const { return static_cast<long>(nx) * ny; }
};

namespace detail {

struct GridEdge {
    long i = -1;  ///< tail node, -1 for a Dirichlet ghost
    long j = -1;  ///< head node, -1 for a Dirichlet ghost
    GridPoint mid;
};

struct GridOperatorData {
    LerayLionsField field;
    GridSpec grid;
    std::vector<GridEdge> edges;
    std::vector<long> robin_nodes;  ///< one entry per boundary face
    std::vector<GridPoint> robin_points;

    long n() const { return grid.size(); }

    GridPoint point(long k) const {
        const long ix = k % grid.nx, iy = k / grid.nx;
        return {(ix + 1) * grid.h, grid.ny > 1 ? (iy + 1) * grid.h : 0.0};
    }

    HVector apply(const HVector& u) const {
        const double h = grid.h;
        HVector out = HVector::Zero(n());
        for (const auto& e : edges) {
            const double ui = e.i >= 0 ? u[e.i] : 0.0;
            const double uj = e.j >= 0 ? u[e.j] : 0.0;
            const double F = field.flux(e.mid, (uj - ui) / h);
            if (e.i >= 0) out[e.i] -= F / h;
            if (e.j >= 0) out[e.j] += F / h;
        }
        for (std::size_t r = 0; r < robin_nodes.size(); ++r) {
            const long k = robin_nodes[r];
            const double b = field.robin_b(robin_points[r]);
            const double v = u[k];
            if (v != 0.0) out[k] += b / h * std::pow(std::abs(v), field.p - 2.0) * v;
        }
        return out;
    }

    Matrix jacobian(const HVector& u, double eps = 1e-12) const {
        const double h = grid.h;
        Matrix J = Matrix::Zero(n(), n());
        for (const auto& e : edges) {
            const double ui = e.i >= 0 ? u[e.i] : 0.0;
            const double uj = e.j >= 0 ? u[e.j] : 0.0;
            const double d = field.flux_slope(e.mid, (uj - ui) / h) / (h * h);
            if (e.i >= 0) J(e.i, e.i) += d;
            if (e.j >= 0) J(e.j, e.j) += d;
            if (e.i >= 0 && e.j >= 0) {
                J(e.i, e.j) -= d;
                J(e.j, e.i) -= d;
            }
        }
        for (std::size_t r = 0; r < robin_nodes.size(); ++r) {
            const long k = robin_nodes[r];
            const double b = field.robin_b(robin_points[r]);
            J(k, k) += b / h * (field.p - 1.0) * std::pow(u[k] * u[k] + eps * eps, 0.5 * (field.p - 2.0));
        }
        return J;
    }

    bool projected() const { return field.lateral == LateralBC::Neumann && grid.project_mean; }

    // Solves u + mu A u = w.
    HVector resolve(double mu, HVector w) const {
        if (projected()) w.array() -= w.mean();
        const double tol = 1e-11 * (1.0 + w.norm());
        auto residual = [&](const HVector& u) -> HVector { return u + mu * apply(u) - w; };

        HVector u = w;
        HVector G = residual(u);
        double gn = G.norm();
        for (int round = 0; round < 4 && gn > tol; ++round) {
            // damped Newton
            for (int it = 0; it < 100 && gn > tol; ++it) {
                Matrix Jm = mu * jacobian(u);
                Jm.diagonal().array() += 1.0;
                const HVector step = Jm.ldlt().solve(G);
                double t = 1.0;
                bool accepted = false;
                for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
                    HVector cand = u - t * step;
                    HVector Gc = residual(cand);
                    const double gc = Gc.norm();
                    if (gc <= (1.0 - 1e-4 * t) * gn || gc <= tol) {
                        u = std::move(cand);
                        G = std::move(Gc);
                        gn = gc;
                        accepted = true;
                        break;
                    }
                }
                if (!accepted) break;
            }
            if (gn <= tol) break;
            // Nonlinear Gauss–Seidel: each coordinate equation is increasing in its own unknown.
            for (int sweep = 0; sweep < 200 && gn > tol; ++sweep) {
                for (long k = 0; k < n(); ++k) {
                    auto f = [&](double v) {
                        HVector t = u;
                        t[k] = v;
                        return v + mu * apply(t)[k] - w[k];
                    };
                    double lo = u[k] - 1.0, hi = u[k] + 1.0;
                    while (f(lo) > 0.0) lo -= 2.0 * (hi - lo);
                    while (f(hi) < 0.0) hi += 2.0 * (hi - lo);
                    for (int b = 0; b < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo)); ++b) {
                        const double m = 0.5 * (lo + hi);
                        (f(m) > 0.0 ? hi : lo) = m;
                    }
                    u[k] = 0.5 * (lo + hi);
                }
                G = residual(u);
                gn = G.norm();
            }
        }
        if (gn > tol) throw SolverFailure("plap_grid resolvent: Newton stagnated", gn);
        if (projected()) u.array() -= u.mean();
        return u;
    }
};

}  // namespace detail

/// Discrete −div a(x, ∇u) on the grid, as a maximal monotone operator on R^{nx·ny}.
inline MonotoneOp make_plap_grid(const LerayLionsField& field, const GridSpec& grid) {
    if (grid.nx < 1 || grid.ny < 1 || grid.size() < 2)
        throw InvalidArgument("make_plap_grid: grid needs at least 2 nodes");
    if (!(grid.h > 0.0)) throw InvalidArgument("make_plap_grid: spacing must be positive");
    if (!field.flux || !field.flux_slope) throw InvalidArgument("make_plap_grid: flux not set");

    auto data = std::make_shared<detail::GridOperatorData>();
    data->field = field;
    data->grid = grid;
    const double h = grid.h;
    const bool dir = field.lateral == LateralBC::Dirichlet;
    const bool rob = field.lateral == LateralBC::Robin;
    auto idx = [&](long ix, long iy) { return ix + grid.nx * iy; };
    auto mid = [&](double x, double y) { return GridPoint{x, y}; };

    for (long iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.ny > 1 ? (iy + 1) * h : 0.0;
        for (long ix = -1; ix < grid.nx; ++ix) {
            const bool left_ghost = ix < 0, right_ghost = ix + 1 >= grid.nx;
            const double xm = (ix + 1.5) * h;
            if (!left_ghost && !right_ghost) {
                data->edges.push_back({idx(ix, iy), idx(ix + 1, iy), mid(xm, y)});
            } else if (dir) {
                data->edges.push_back({left_ghost ? -1 : idx(ix, iy),
                                       right_ghost ? -1 : idx(ix + 1, iy), mid(xm, y)});
            } else if (rob) {
                const long k = left_ghost ? idx(0, iy) : idx(grid.nx - 1, iy);
                data->robin_nodes.push_back(k);
                data->robin_points.push_back(mid(left_ghost ? 0.5 * h : (grid.nx + 0.5) * h, y));
            }
        }
    }
    if (grid.ny > 1) {
        for (long ix = 0; ix < grid.nx; ++ix) {
            const double x = (ix + 1) * h;
            for (long iy = -1; iy < grid.ny; ++iy) {
                const bool low_ghost = iy < 0, high_ghost = iy + 1 >= grid.ny;
                const double ym = (iy + 1.5) * h;
                if (!low_ghost && !high_ghost) {
                    data->edges.push_back({idx(ix, iy), idx(ix, iy + 1), mid(x, ym)});
                } else if (dir) {
                    data->edges.push_back({low_ghost ? -1 : idx(ix, iy),
                                           high_ghost ? -1 : idx(ix, iy + 1), mid(x, ym)});
                } else if (rob) {
                    const long k = low_ghost ? idx(ix, 0) : idx(ix, grid.ny - 1);
                    data->robin_nodes.push_back(k);
                    data->robin_points.push_back(mid(x, low_ghost ? 0.5 * h : (grid.ny + 0.5) * h));
                }
            }
        }
    }
    if (rob)
        for (const auto& pt : data->robin_points)
            if (!(field.robin_b(pt) >= 0.0)) throw InvalidArgument("make_plap_grid: Robin b must be >= 0");

    MonotoneOp op;
    op.dim = grid.size();
    op.label = std::string("plap_grid(p=") + std::to_string(field.p) + "," + to_string(field.lateral) +
               "," + std::to_string(grid.nx) + "x" + std::to_string(grid.ny) + ")";
    op.zero = HVector::Zero(op.dim);
    op.lattice = !data->projected();
    op.resolvent = [data](double mu, const HVector& w) { return data->resolve(mu, w); };
    op.direct_eval = [data](const HVector& u) { return data->apply(u); };
    if (data->projected())
        op.domain_projection = [](const HVector& u) -> HVector {
            HVector v = u;
            v.array() -= v.mean();
            return v;
        };
    return op;
}

}  // namespace fracmono
