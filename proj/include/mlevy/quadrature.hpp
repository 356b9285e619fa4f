#pragma once

// Adaptive Gauss-Kronrod (G7/K15) panels, optionally on a logarithmic axis.
// Lévy densities blow up like |x|^{-1-alpha} at the origin, so every
// integral that reaches down to a small cutoff goes through integrate_log.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "mlevy/errors.hpp"

namespace mlevy {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    std::size_t max_panels = 4000;
};

// Global adaptive quadrature: the panel with the largest K15-G7 error
// estimate is bisected until the summed estimate meets
// max(abs_tol, rel_tol * L1).
template <class F>
double integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    if (!(a < b)) {
        return 0.0;
    }
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    struct Panel {
        double a, b, value, err, l1;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    auto eval = [&](double lo, double hi) {
        Panel p{lo, hi, 0.0, 0.0, 0.0};
        p.value = GK::integrate(f, lo, hi, 0, 0.0, &p.err, &p.l1);
        return p;
    };
    std::priority_queue<Panel> heap;
    Panel first = eval(a, b);
    double value = first.value;
    double err = first.err;
    double l1 = first.l1;
    heap.push(first);
    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * l1); };
    while (err > target() && heap.size() < opt.max_panels) {
        const Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            break;  // panel below floating-point resolution
        }
        heap.pop();
        const Panel left = eval(worst.a, mid);
        const Panel right = eval(mid, worst.b);
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
    }
    if (!std::isfinite(value) || !std::isfinite(err)) {
        throw NumericalError("quadrature produced a non-finite value on [" + std::to_string(a) + ", " +
                                 std::to_string(b) + "]",
                             err);
    }
    // The K15-G7 difference overestimates the error by orders of magnitude
    // on smooth panels, so allow a fixed factor before declaring failure.
    if (err > 100.0 * target()) {
        throw NumericalError("quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) + "]",
                             err);
    }
    return value;
}

// \int_a^b g(x) dx for 0 < a < b, via x = e^s.
template <class F>
double integrate_log(F&& g, double a, double b, const QuadratureOptions& opt = {}) {
    if (!(a < b)) {
        return 0.0;
    }
    if (!(a > 0.0)) {
        throw DomainError("integrate_log needs a positive lower limit");
    }
    auto h = [&g](double s) {
        const double x = std::exp(s);
        return g(x) * x;
    };
    return integrate(h, std::log(a), std::log(b), opt);
}

}  // namespace mlevy
