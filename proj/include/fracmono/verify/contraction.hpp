#pragma once

// Normal contractions j ∈ J₀ and a sampled complete-contraction check:
// S is a complete contraction iff Σ j(S u - S û) ≤ Σ j(u - û) for all j ∈ J₀,
// which for maps on R^n amounts to order preservation plus L¹ and L^∞ non-expansion.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fracmono/errors.hpp"
#include "fracmono/hilbert.hpp"

namespace fracmono::verify {

struct NormalContraction {
    enum class Kind { PositivePartPower, AbsolutePower, TruncatedPositivePart, TruncatedAbsolute };
    Kind kind = Kind::AbsolutePower;
    double param = 1.0;  ///< q for the powers, k for the truncations

    static NormalContraction positive_part_power(double q) { return make(Kind::PositivePartPower, q, q >= 1.0); }
    static NormalContraction absolute_power(double q) { return make(Kind::AbsolutePower, q, q >= 1.0); }
    static NormalContraction truncated_positive_part(double k) { return make(Kind::TruncatedPositivePart, k, k >= 0.0); }
    static NormalContraction truncated_absolute(double k) { return make(Kind::TruncatedAbsolute, k, k >= 0.0); }

    double operator()(double r) const {
        switch (kind) {
            case Kind::PositivePartPower: return r > 0.0 ? std::pow(r, param) : 0.0;
            case Kind::AbsolutePower: return std::pow(std::abs(r), param);
            case Kind::TruncatedPositivePart: return std::max(std::max(r, 0.0) - param, 0.0);
            case Kind::TruncatedAbsolute: return std::max(std::abs(r) - param, 0.0);
        }
        return 0.0;
    }

    double sum(const HVector& u) const {
        double acc = 0.0;
        for (long i = 0; i < u.size(); ++i) acc += (*this)(u[i]);
        return acc;
    }

    std::string name() const {
        const std::string p = std::to_string(param);
        switch (kind) {
            case Kind::PositivePartPower: return "positive_part_power(" + p + ")";
            case Kind::AbsolutePower: return "absolute_power(" + p + ")";
            case Kind::TruncatedPositivePart: return "truncated_positive_part(" + p + ")";
            case Kind::TruncatedAbsolute: return "truncated_absolute(" + p + ")";
        }
        return "?";
    }

    /// Sampled check of j(0) = 0, j >= 0 and midpoint convexity on [-10, 10].
    bool sampled_valid() const {
        if ((*this)(0.0) != 0.0) return false;
        for (int i = 0; i <= 200; ++i) {
            const double a = -10.0 + 0.1 * i;
            if ((*this)(a) < 0.0) return false;
            for (int j = i + 1; j <= 200; j += 7) {
                const double b = -10.0 + 0.1 * j;
                if ((*this)(0.5 * (a + b)) > 0.5 * ((*this)(a) + (*this)(b)) + 1e-12) return false;
            }
        }
        return true;
    }

private:
    static NormalContraction make(Kind k, double p, bool ok) {
        if (!ok) throw InvalidArgument("NormalContraction: invalid parameter");
        return {k, p};
    }
};

/// {[r]⁺², |r|, [|r| - 0.1]⁺, [|r| - 1]⁺}.
inline std::vector<NormalContraction> default_j_set() {
    return {NormalContraction::positive_part_power(2.0), NormalContraction::absolute_power(1.0),
            NormalContraction::truncated_absolute(0.1), NormalContraction::truncated_absolute(1.0)};
}

using SamplePairs = std::vector<std::pair<HVector, HVector>>;

/// Standard normal vector rescaled to norm at most `radius`.
template <class Rng>
HVector sample_vector(long dim, Rng& rng, double radius = 10.0) {
    std::normal_distribution<double> nd(0.0, 1.0);
    HVector v(dim);
    for (long i = 0; i < dim; ++i) v[i] = nd(rng);
    const double n = v.norm();
    if (n > radius) v *= radius / n;
    return v;
}

/// Half independent pairs, half ordered pairs (u, u + nonnegative perturbation).
template <class Rng>
SamplePairs sample_pairs(long dim, int count, Rng& rng, double radius = 10.0) {
    SamplePairs out;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
        HVector u = sample_vector(dim, rng, radius);
        if (i % 2 == 0) {
            out.emplace_back(u, sample_vector(dim, rng, radius));
        } else {
            HVector d(dim);
            for (long k = 0; k < dim; ++k) d[k] = ud(rng) * (ud(rng) < 0.3 ? 0.0 : 2.0);
            out.emplace_back(u, u + d);
        }
    }
    return out;
}

struct JCheck {
    std::string name;
    double worst_margin = INFINITY;  ///< min over pairs of Σ j(u-û) - Σ j(Su-Sû)
    bool pass = true;
};

struct CompleteContractionReport {
    std::vector<JCheck> per_j;
    double order_violation = 0.0;
    double l1_margin = INFINITY;
    double linf_margin = INFINITY;
    double worst_margin = INFINITY;
    int instances = 0;
    bool pass = true;
};

inline CompleteContractionReport check_complete_contraction(const std::function<HVector(const HVector&)>& map,
                                                            const SamplePairs& pairs,
                                                            const std::vector<NormalContraction>& j_set,
                                                            double tol = 1e-8) {
    CompleteContractionReport r;
    for (const auto& j : j_set) r.per_j.push_back({j.name(), INFINITY, true});
    for (const auto& [u, uh] : pairs) {
        const HVector su = map(u), suh = map(uh);
        const HVector d = u - uh, sd = su - suh;
        const double scale = 1.0 + d.lpNorm<Eigen::Infinity>();
        for (std::size_t k = 0; k < j_set.size(); ++k)
            r.per_j[k].worst_margin = std::min(r.per_j[k].worst_margin, (j_set[k].sum(d) - j_set[k].sum(sd)) / scale);
        if ((d.array() <= 0.0).all()) r.order_violation = std::max(r.order_violation, sd.maxCoeff() / scale);
        if ((d.array() >= 0.0).all()) r.order_violation = std::max(r.order_violation, -sd.minCoeff() / scale);
        r.l1_margin = std::min(r.l1_margin, (d.lpNorm<1>() - sd.lpNorm<1>()) / scale);
        r.linf_margin = std::min(r.linf_margin, (d.lpNorm<Eigen::Infinity>() - sd.lpNorm<Eigen::Infinity>()) / scale);
        ++r.instances;
    }
    r.worst_margin = std::min({r.l1_margin, r.linf_margin, -r.order_violation});
    for (auto& c : r.per_j) {
        c.pass = c.worst_margin >= -tol;
        r.worst_margin = std::min(r.worst_margin, c.worst_margin);
    }
    r.pass = r.worst_margin >= -tol;
    return r;
}

}  // namespace fracmono::verify
