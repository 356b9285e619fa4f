#pragma once

// Strictly stable laws given by a Lévy density k(x) = c_pm |x|^{-1-alpha}.
//
// The (scale, skew) pair of the Chambers-Mallows-Stuck sampler is obtained
// by evaluating the characteristic exponent of the density numerically, so
// no closed-form Gamma-function constants are involved.

#include <cmath>
#include <complex>
#include <numbers>

#include "mlevy/errors.hpp"
#include "mlevy/quadrature.hpp"
#include "mlevy/rng.hpp"

namespace mlevy {

namespace detail {

inline constexpr int kStablePeriods = 4000;

// \int_0^inf (1 - cos t) t^{-1-alpha} dt, summed period by period.
inline double stable_cos_integral(double alpha) {
    const double two_pi = 2.0 * std::numbers::pi;
    QuadratureOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-15;
    auto g = [alpha](double t) {
        const double h = std::sin(0.5 * t);
        return 2.0 * h * h * std::pow(t, -1.0 - alpha);
    };
    const double eps = 1e-8;
    // (1 - cos t) ~ t^2/2 below eps
    double total = std::pow(eps, 2.0 - alpha) / (2.0 * (2.0 - alpha));
    total += integrate_log(g, eps, two_pi, opt);
    for (int k = 1; k < kStablePeriods; ++k) {
        total += integrate(g, two_pi * k, two_pi * (k + 1), opt);
    }
    const double T = two_pi * kStablePeriods;
    total += std::pow(T, -alpha) / alpha - (1.0 + alpha) * std::pow(T, -2.0 - alpha);
    return total;
}

// \int_0^inf (sin t - t) t^{-1-alpha} dt for 1 < alpha < 2 (negative).
inline double stable_sin_integral(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) {
        throw DomainError("compensated sine integral needs 1 < alpha < 2");
    }
    const double two_pi = 2.0 * std::numbers::pi;
    QuadratureOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-15;
    auto g = [alpha](double t) {
        const double s = t < 1e-3 ? -t * t * t / 6.0 + t * t * t * t * t / 120.0 : std::sin(t) - t;
        return s * std::pow(t, -1.0 - alpha);
    };
    const double eps = 1e-8;
    double total = -std::pow(eps, 3.0 - alpha) / (6.0 * (3.0 - alpha));
    total += integrate_log(g, eps, two_pi, opt);
    for (int k = 1; k < kStablePeriods; ++k) {
        total += integrate(g, two_pi * k, two_pi * (k + 1), opt);
    }
    const double T = two_pi * kStablePeriods;
    total += -std::pow(T, 1.0 - alpha) / (alpha - 1.0) + std::pow(T, -1.0 - alpha);
    return total;
}

}  // namespace detail

// S1 parametrisation: psi(u) = -scale^alpha |u|^alpha (1 - i skew sgn(u) tan(pi alpha / 2))
// for alpha != 1, psi(u) = -scale |u| for symmetric alpha = 1. Zero location.
struct StableLaw {
    double alpha = 1.0;
    double scale = 1.0;
    double skew = 0.0;

    std::complex<double> exponent(double u) const {
        const double a = std::pow(scale * std::abs(u), alpha);
        if (alpha == 1.0) {
            return {-a, 0.0};
        }
        const double sgn = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
        return {-a, a * skew * sgn * std::tan(std::numbers::pi * alpha / 2.0)};
    }

    // One draw of the time-dt increment (CMS; Weron's form for alpha != 1).
    template <class Engine>
    double sample(Engine& eng, double dt = 1.0) const {
        const double pi = std::numbers::pi;
        const double v = pi * (uniform_open01(eng) - 0.5);
        const double w = -std::log(uniform_open01(eng));
        double x;
        if (alpha == 1.0) {
            x = std::tan(v);
            return scale * dt * x;
        }
        const double t = skew * std::tan(pi * alpha / 2.0);
        const double b = std::atan(t) / alpha;
        const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
        x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
            std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
        return scale * std::pow(dt, 1.0 / alpha) * x;
    }
};

// Law with Lévy density c_plus x^{-1-alpha} on x > 0 and c_minus |x|^{-1-alpha}
// on x < 0. alpha <= 1 requires c_plus == c_minus (symmetric, so the choice of
// truncation in the compensator is immaterial); alpha > 1 uses the full
// compensator e^{iux} - 1 - iux, which gives a zero-mean law.
inline StableLaw stable_from_levy_density(double alpha, double c_plus, double c_minus) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw DomainError("stable index must lie in (0, 2)");
    }
    if (!(c_plus >= 0.0 && c_minus >= 0.0) || c_plus + c_minus <= 0.0) {
        throw DomainError("stable Lévy density constants must be nonnegative with positive sum");
    }
    const double ic = detail::stable_cos_integral(alpha);
    StableLaw law;
    law.alpha = alpha;
    const double scale_pow = (c_plus + c_minus) * ic;
    law.scale = std::pow(scale_pow, 1.0 / alpha);
    if (c_plus == c_minus) {
        law.skew = 0.0;
        return law;
    }
    if (alpha <= 1.0) {
        throw DomainError("asymmetric stable drivers are only supported for alpha > 1");
    }
    const double js = detail::stable_sin_integral(alpha);
    law.skew = (c_plus - c_minus) * js / (scale_pow * std::tan(std::numbers::pi * alpha / 2.0));
    return law;
}

}  // namespace mlevy
