#pragma once

// Bounded solution of u'' + ((1-2s)/t) u' = a u, u(0) = φ, for scalar a > 0:
//
//   u(t)  = φ 2^{1-s}/Γ(s) x^s K_s(x),          x = sqrt(a) t,
//   u'(t) = -φ 2^{1-s}/Γ(s) sqrt(a) x^s K_{1-s}(x),
//
// and the DtN constant C(s) = lim -t^{1-2s} u'(t)/(φ a^s) = 2^{1-2s} Γ(1-s)/Γ(s).

#include <cmath>

#include "fracmono/errors.hpp"

namespace fracmono::verify {

struct BesselValue {
    double value = 0.0;
    bool underflow = false;
};

/// K_ν(x) = ∫_0^∞ exp(-x cosh τ) cosh(ν τ) dτ, x > 0, by composite
/// Gauss–Legendre on [0, T] with T where the integrand drops below 1e-18 of its peak.
inline BesselValue bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw InvalidArgument("bessel_k: x must be positive");
    nu = std::abs(nu);
    if (x > 700.0) return {0.0, true};
    // Scaled integrand exp(-x (cosh τ - 1)) cosh(ν τ); the factor e^{-x} is applied at the end.
    auto f = [&](double t) { return std::exp(-x * (std::cosh(t) - 1.0)) * std::cosh(nu * t); };
    double T = 1.0;
    while (T < 700.0 && std::log(std::cosh(nu * T)) - x * (std::cosh(T) - 1.0) > std::log(1e-18)) T *= 1.25;
    static const double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                 0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    const int panels = 400;
    const double hpan = T / panels;
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = k * hpan;
        for (int i = 0; i < 8; ++i) acc += gw[i] * f(a + 0.5 * hpan * (1.0 + gx[i]));
    }
    acc *= 0.5 * hpan;
    BesselValue r;
    r.value = acc * std::exp(-x);
    r.underflow = r.value == 0.0 && acc > 0.0;
    return r;
}

struct ScalarExtensionValue {
    double u = 0.0;
    double du = 0.0;
    bool underflow = false;
};

inline ScalarExtensionValue bessel_scalar_extension(double a, double s, double phi, double t) {
    if (!(a > 0.0)) throw InvalidArgument("bessel_scalar_extension: a must be positive");
    if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("bessel_scalar_extension: s must lie in (0,1)");
    if (!(t >= 0.0)) throw InvalidArgument("bessel_scalar_extension: t must be nonnegative");
    ScalarExtensionValue r;
    if (t == 0.0) {
        r.u = phi;
        r.du = s > 0.5 ? 0.0 : (s == 0.5 ? -phi * std::sqrt(a) : -INFINITY * phi);
        return r;
    }
    const double x = std::sqrt(a) * t;
    const double pre = phi * std::pow(2.0, 1.0 - s) / std::tgamma(s);
    const auto ks = bessel_k(s, x), k1 = bessel_k(1.0 - s, x);
    r.u = pre * std::pow(x, s) * ks.value;
    r.du = -pre * std::sqrt(a) * std::pow(x, s) * k1.value;
    r.underflow = ks.underflow || k1.underflow;
    return r;
}

/// C(s) = 2^{1-2s} Γ(1-s)/Γ(s).
inline double dtn_constant(double s) {
    if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("dtn_constant: s must lie in (0,1)");
    return std::pow(2.0, 1.0 - 2.0 * s) * std::tgamma(1.0 - s) / std::tgamma(s);
}

/// The limit -t^{1-2s} u'(t) for a = φ = 1, taken numerically from the Bessel
/// solution at t and t/2 with the leading t^{2-2s} correction eliminated.
inline double dtn_constant_from_bessel(double s, double t = 1e-4) {
    auto g = [s](double tt) { return -std::pow(tt, 1.0 - 2.0 * s) * bessel_scalar_extension(1.0, s, 1.0, tt).du; };
    const double f1 = g(t), f2 = g(0.5 * t);
    const double r = std::pow(2.0, 2.0 - 2.0 * s);
    return (r * f2 - f1) / (r - 1.0);
}

}  // namespace fracmono::verify
