#pragma once

// Pure-jump Lévy measures and their truncated functionals.
//
// A model is the triplet (b, 0, F) with respect to h(x) = x 1{|x| <= 1}.
// F is given by a density that vanishes beyond the jump bound p. For the
// two-sided stable kind the density is alpha * theta_pm * |x|^{-1-alpha},
// which makes beta^alpha theta_pm(beta) -> theta_pm exact and gives closed
// forms for every functional below; the other kinds go through quadrature.

#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "mlevy/errors.hpp"
#include "mlevy/quadrature.hpp"
#include "mlevy/rng.hpp"

namespace mlevy {

enum class Side { plus, minus, both };

struct TwoSidedStable {
    double alpha;
    double theta_plus;
    double theta_minus;
};

struct Cgmy {
    double C;
    double G;
    double M;
    double Y;
};

// Density callback evaluated at x != 0 (both signs).
struct CustomDensity {
    std::function<double(double)> density;
};

using MeasureKind = std::variant<TwoSidedStable, Cgmy, CustomDensity>;

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Tail mass T(x) = \int_x^p nu(r) dr of one side on a geometric knot grid,
// with monotone cubic interpolation in both directions.
class InverseTailTable {
  public:
    InverseTailTable(const std::function<double(double)>& side_density, double x_min, double x_max,
                     std::size_t knots)
        : x_min_(x_min), x_max_(x_max) {
        std::vector<double> log_x(knots);
        std::vector<double> tail(knots, 0.0);
        const double ratio = std::log(x_max / x_min) / static_cast<double>(knots - 1);
        for (std::size_t j = 0; j < knots; ++j) {
            log_x[j] = std::log(x_min) + ratio * static_cast<double>(j);
        }
        log_x.back() = std::log(x_max);
        QuadratureOptions opt;
        opt.rel_tol = 1e-12;
        opt.abs_tol = 0.0;
        for (std::size_t j = knots - 1; j-- > 0;) {
            const double seg = integrate_log(side_density, std::exp(log_x[j]), std::exp(log_x[j + 1]), opt);
            tail[j] = tail[j + 1] + seg;
        }
        total_ = tail.front();

        std::vector<double> t_rev(tail.rbegin(), tail.rend());
        std::vector<double> lx_rev(log_x.rbegin(), log_x.rend());
        // Strictly increasing abscissae are required; a zero-density stretch
        // would produce ties, which we reject.
        for (std::size_t j = 1; j < t_rev.size(); ++j) {
            if (!(t_rev[j] > t_rev[j - 1])) {
                throw DomainError("tabulated inverse CDF needs a strictly positive density on (0, p]");
            }
        }
        forward_ = std::make_shared<Pchip>(std::move(log_x), std::move(tail));
        inverse_ = std::make_shared<Pchip>(std::move(t_rev), std::move(lx_rev));
    }

    double x_min() const noexcept { return x_min_; }
    double total() const noexcept { return total_; }

    double tail(double x) const {
        if (x >= x_max_) {
            return 0.0;
        }
        if (x < x_min_) {
            throw DomainError("cutoff below the tabulated range of the jump-size table");
        }
        return std::max(0.0, (*forward_)(std::log(x)));
    }

    double inverse(double t) const {
        t = std::clamp(t, 0.0, total_);
        return std::exp((*inverse_)(t));
    }

  private:
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
    double x_min_;
    double x_max_;
    double total_ = 0.0;
    std::shared_ptr<Pchip> forward_;
    std::shared_ptr<Pchip> inverse_;
};

}  // namespace detail

class LevyModel {
  public:
    static constexpr std::size_t kTableKnots = 4096;
    static constexpr double kTableFloor = 1e-8;  // relative to p

    static LevyModel two_sided_stable(double alpha, double theta_plus, double theta_minus, double p = 1.0,
                                      double b = 0.0) {
        if (!(alpha > 0.0 && alpha < 2.0)) {
            throw DomainError("stable index must lie in (0, 2)");
        }
        if (!(theta_plus >= 0.0 && theta_minus >= 0.0) || theta_plus + theta_minus <= 0.0) {
            throw DomainError("stable tail constants must be nonnegative with positive sum");
        }
        check_bound(p, false);
        return LevyModel(TwoSidedStable{alpha, theta_plus, theta_minus}, p, b);
    }

    // p = +inf gives the unbounded CGMY law; it can be audited but not sampled.
    static LevyModel cgmy(double C, double G, double M, double Y, double p = 1.0, double b = 0.0) {
        if (!(C > 0.0 && G > 0.0 && M > 0.0 && Y > 0.0 && Y < 2.0)) {
            throw DomainError("CGMY needs C, G, M > 0 and 0 < Y < 2");
        }
        check_bound(p, true);
        LevyModel model(Cgmy{C, G, M, Y}, p, b);
        model.build_tables();
        return model;
    }

    static LevyModel custom(std::function<double(double)> density, double p = 1.0, double b = 0.0) {
        if (!density) {
            throw DomainError("custom Lévy density callback is empty");
        }
        check_bound(p, false);
        LevyModel model(CustomDensity{std::move(density)}, p, b);
        model.build_tables();
        return model;
    }

    double drift_b() const noexcept { return b_; }
    double jump_bound() const noexcept { return p_; }
    bool bounded() const noexcept { return std::isfinite(p_); }
    const MeasureKind& kind() const noexcept { return kind_; }
    const TwoSidedStable* stable() const noexcept { return std::get_if<TwoSidedStable>(&kind_); }

    // Density of the side measure at radius r > 0 (mirrored for the minus side).
    double side_density(Side side, double r) const {
        if (!(r > 0.0) || r > p_) {
            return 0.0;
        }
        return std::visit(
            [&](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, TwoSidedStable>) {
                    const double th = side == Side::plus ? k.theta_plus : k.theta_minus;
                    return k.alpha * th * std::pow(r, -1.0 - k.alpha);
                } else if constexpr (std::is_same_v<K, Cgmy>) {
                    const double rate = side == Side::plus ? k.M : k.G;
                    return k.C * std::exp(-rate * r) * std::pow(r, -1.0 - k.Y);
                } else {
                    return k.density(side == Side::plus ? r : -r);
                }
            },
            kind_);
    }

    double density(double x) const {
        if (x == 0.0) {
            return 0.0;
        }
        return x > 0.0 ? side_density(Side::plus, x) : side_density(Side::minus, -x);
    }

    // Radius past which the side density is numerically zero.
    double effective_upper(Side side) const {
        if (bounded()) {
            return p_;
        }
        const auto& k = std::get<Cgmy>(kind_);
        return 800.0 / (side == Side::plus ? k.M : k.G);
    }

    bool is_symmetric() const {
        return std::visit(
            [&](const auto& k) -> bool {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, TwoSidedStable>) {
                    return k.theta_plus == k.theta_minus;
                } else if constexpr (std::is_same_v<K, Cgmy>) {
                    return k.G == k.M;
                } else {
                    for (int j = 0; j < 64; ++j) {
                        const double r = p_ * std::pow(10.0, -8.0 * j / 63.0);
                        const double a = k.density(r);
                        const double c = k.density(-r);
                        if (std::abs(a - c) > 1e-12 * std::max(std::abs(a), std::abs(c))) {
                            return false;
                        }
                    }
                    return true;
                }
            },
            kind_);
    }

    // Sampling tables; only present for non-stable bounded kinds.
    const detail::InverseTailTable* table(Side side) const noexcept {
        return side == Side::plus ? plus_table_.get() : minus_table_.get();
    }

  private:
    LevyModel(MeasureKind kind, double p, double b) : kind_(std::move(kind)), p_(p), b_(b) {}

    static void check_bound(double p, bool allow_inf) {
        if (!(p > 0.0) || (!allow_inf && !std::isfinite(p))) {
            throw DomainError("jump bound p must be positive and finite for this model kind");
        }
    }

    void build_tables() {
        if (!bounded()) {
            return;
        }
        auto side_fn = [this](Side s) { return [this, s](double r) { return side_density(s, r); }; };
        plus_table_ = std::make_shared<const detail::InverseTailTable>(side_fn(Side::plus), kTableFloor * p_, p_,
                                                                       kTableKnots);
        minus_table_ = std::make_shared<const detail::InverseTailTable>(side_fn(Side::minus), kTableFloor * p_, p_,
                                                                        kTableKnots);
    }

    MeasureKind kind_;
    double p_;
    double b_;
    std::shared_ptr<const detail::InverseTailTable> plus_table_;
    std::shared_ptr<const detail::InverseTailTable> minus_table_;
};

// \int_{lo < r <= hi} w(r) nu_side(r) dr for one side, by log-axis quadrature.
template <class W>
double side_integral(const LevyModel& model, Side side, double lo, double hi, W&& weight,
                     const QuadratureOptions& opt = {}) {
    hi = std::min(hi, model.effective_upper(side));
    if (!(lo < hi)) {
        return 0.0;
    }
    auto g = [&](double r) { return weight(r) * model.side_density(side, r); };
    return integrate_log(g, lo, hi, opt);
}

// theta_+(beta) = F((beta, inf)), theta_-(beta) = F((-inf, -beta)).
inline double tail_theta(const LevyModel& model, double beta, Side side = Side::both) {
    if (!(beta > 0.0)) {
        throw DomainError("tail cutoff beta must be positive");
    }
    if (side == Side::both) {
        return tail_theta(model, beta, Side::plus) + tail_theta(model, beta, Side::minus);
    }
    if (beta >= model.jump_bound()) {
        return 0.0;
    }
    if (const auto* st = model.stable()) {
        const double th = side == Side::plus ? st->theta_plus : st->theta_minus;
        return th * (std::pow(beta, -st->alpha) - std::pow(model.jump_bound(), -st->alpha));
    }
    return side_integral(model, side, beta, detail::kInf, [](double) { return 1.0; });
}

struct TailStats {
    double beta = 0.0;
    double theta_plus = 0.0;
    double theta_minus = 0.0;
    double theta = 0.0;
    double c_beta = 0.0;
    double d_plus = 0.0;
    double d_minus = 0.0;
    double delta = 0.0;
    double d_prime = 0.0;
    double rho_plus = 0.0;
    double rho_minus = 0.0;
    double rho = 0.0;
    double b_prime = 0.0;
    double d_beta = 0.0;
    double s_beta = 0.0;
};

inline double s_function(double alpha, double beta) {
    if (alpha < 1.0) {
        return 1.0;
    }
    if (alpha == 1.0) {
        return std::log(1.0 / beta);
    }
    return std::pow(beta, 1.0 - alpha);
}

namespace detail {

// \int_{lo<r<=hi} r^k * alpha*th*r^{-1-alpha} dr, closed form.
inline double stable_power_moment(double alpha, double th, double k, double lo, double hi) {
    if (!(lo < hi) || th == 0.0) {
        return 0.0;
    }
    const double e = k - alpha;
    if (e == 0.0) {
        return alpha * th * std::log(hi / lo);
    }
    if (lo == 0.0) {
        return e > 0.0 ? alpha * th * std::pow(hi, e) / e : kInf;
    }
    return alpha * th * (std::pow(hi, e) - std::pow(lo, e)) / e;
}

inline double power_moment(const LevyModel& model, Side side, double k, double lo, double hi) {
    if (const auto* st = model.stable()) {
        const double th = side == Side::plus ? st->theta_plus : st->theta_minus;
        return stable_power_moment(st->alpha, th, k, lo, std::min(hi, model.jump_bound()));
    }
    auto w = [k](double r) { return std::pow(r, k); };
    if (lo > 0.0) {
        return side_integral(model, side, lo, hi, w);
    }
    // From the origin: quadrature down to a floor, and below it the density
    // is treated as the power law A r^{-1-a} read off at the floor.
    const double floor = 1e-20 * std::min(1.0, model.effective_upper(side));
    const double d1 = model.side_density(side, floor);
    const double d2 = model.side_density(side, 2.0 * floor);
    double below = 0.0;
    if (d1 > 0.0 && d2 > 0.0) {
        const double a = std::log(d1 / d2) / std::log(2.0) - 1.0;
        if (!(k > a)) {
            return kInf;
        }
        below = d1 * std::pow(floor, 1.0 + k) / (k - a);
    }
    return below + side_integral(model, side, floor, hi, w);
}

}  // namespace detail

// c(beta) = \int_{|x|<=beta} x^2 F(dx).
inline double truncated_second_moment(const LevyModel& model, double beta) {
    return detail::power_moment(model, Side::plus, 2.0, 0.0, beta) +
           detail::power_moment(model, Side::minus, 2.0, 0.0, beta);
}

// \int_{|x|>beta} x^2 F(dx).
inline double big_jump_second_moment(const LevyModel& model, double beta) {
    return detail::power_moment(model, Side::plus, 2.0, beta, detail::kInf) +
           detail::power_moment(model, Side::minus, 2.0, beta, detail::kInf);
}

// \int_{lo<|x|<=hi} x F(dx) (signed).
inline double band_first_moment(const LevyModel& model, double lo, double hi) {
    return detail::power_moment(model, Side::plus, 1.0, lo, hi) - detail::power_moment(model, Side::minus, 1.0, lo, hi);
}

// d = b - \int_{|x|<=1} x F(dx); finite when \int |x| F(dx) < inf near 0.
inline double small_jump_drift_constant(const LevyModel& model) {
    if (model.is_symmetric()) {
        return model.drift_b();
    }
    const double m = band_first_moment(model, 0.0, 1.0);
    if (!std::isfinite(m)) {
        throw DomainError("d = b - int_{|x|<=1} x F(dx) is infinite for this measure");
    }
    return model.drift_b() - m;
}

// Limits d_pm = lim_{beta->0} d_pm(beta) = \int_{x>0} |x| F(dx) (per side).
inline std::pair<double, double> limit_first_moments(const LevyModel& model) {
    return {detail::power_moment(model, Side::plus, 1.0, 0.0, detail::kInf),
            detail::power_moment(model, Side::minus, 1.0, 0.0, detail::kInf)};
}

inline TailStats tail_stats(const LevyModel& model, double beta, double alpha) {
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw DomainError("tail_stats needs 0 < beta <= 1");
    }
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw DomainError("tail_stats needs alpha in (0, 2)");
    }
    using detail::kInf;
    using detail::power_moment;
    TailStats s;
    s.beta = beta;
    s.theta_plus = tail_theta(model, beta, Side::plus);
    s.theta_minus = tail_theta(model, beta, Side::minus);
    s.theta = s.theta_plus + s.theta_minus;
    s.c_beta = truncated_second_moment(model, beta);
    s.d_plus = power_moment(model, Side::plus, 1.0, beta, kInf);
    s.d_minus = power_moment(model, Side::minus, 1.0, beta, kInf);
    s.delta = s.d_plus + s.d_minus;
    s.d_prime = model.is_symmetric() ? 0.0 : s.d_plus - s.d_minus;
    s.rho_plus = power_moment(model, Side::plus, alpha, beta, kInf);
    s.rho_minus = power_moment(model, Side::minus, alpha, beta, kInf);
    s.rho = s.rho_plus + s.rho_minus;
    const double beyond_one =
        model.is_symmetric() ? 0.0 : power_moment(model, Side::plus, 1.0, 1.0, kInf) -
                                         power_moment(model, Side::minus, 1.0, 1.0, kInf);
    s.b_prime = model.drift_b() + beyond_one;
    s.d_beta = s.b_prime - s.d_prime;
    s.s_beta = s_function(alpha, beta);
    return s;
}

// \int_{beta<|x|<=b_cut} x log|x| F(dx).
inline double xlog_integral(const LevyModel& model, double beta, double b_cut) {
    if (!(beta > 0.0) || !(beta < b_cut)) {
        if (beta > 0.0 && beta == b_cut) {
            return 0.0;
        }
        throw DomainError("xlog_integral needs 0 < beta < b_cut");
    }
    if (model.is_symmetric()) {
        return 0.0;
    }
    QuadratureOptions opt;
    opt.rel_tol = 1e-11;
    auto w = [](double r) { return r * std::log(r); };
    return side_integral(model, Side::plus, beta, b_cut, w, opt) - side_integral(model, Side::minus, beta, b_cut, w, opt);
}

enum class FubiniVariant {
    power_positive,  // \int_{a<x<=b} |x|^g F(dx),       0 <= a < b <= 1
    power_negative,  // \int_{a<=x<b} |x|^g F(dx),      -1 <= a < b <= 0
    xlog_positive,   // \int_{a<x<=b} x log x F(dx),     0 <= a < b <= 1
    xlog_negative,   // \int_{a<=x<b} |x| log|x| F(dx), -1 <= a < b <= 0
};

// Both sides of the Fubini identities relating weighted F-integrals to
// integrals of the tail functions. Returns (direct integral, tail form).
inline std::pair<double, double> fubini_check(const LevyModel& model, FubiniVariant variant, double a, double b,
                                              double gamma = 1.0) {
    const bool positive = variant == FubiniVariant::power_positive || variant == FubiniVariant::xlog_positive;
    const bool power = variant == FubiniVariant::power_positive || variant == FubiniVariant::power_negative;
    if (positive ? !(0.0 <= a && a < b && b <= 1.0) : !(-1.0 <= a && a < b && b <= 0.0)) {
        throw DomainError("fubini_check: interval outside the identity's domain or degenerate");
    }
    if (power && !(gamma > 0.0)) {
        throw DomainError("fubini_check: gamma must be positive");
    }
    QuadratureOptions opt;
    opt.rel_tol = 1e-13;
    opt.abs_tol = 0.0;
    const Side side = positive ? Side::plus : Side::minus;
    // Radii: positive side (a, b]; negative side [-b, -a) mapped to (lo, hi].
    const double lo = positive ? a : -b;
    const double hi = positive ? b : -a;
    // An interval reaching the origin is cut at a floor; the piece below it
    // is the same on both sides of the identity.
    const double floor = lo > 0.0 ? lo : 1e-30 * hi;
    auto weight = [&](double r) { return power ? std::pow(r, gamma) : r * std::log(r); };
    const double lhs = side_integral(model, side, floor, hi, weight, opt);

    // Tail form. On (0, floor] the tail difference is constant, so that piece
    // is elementary: gamma \int_0^f y^{g-1} = f^g, \int_0^f (1+log y) = f log f.
    const double th_lo = tail_theta(model, floor, side);
    const double th_hi = tail_theta(model, hi, side);
    double rhs = (th_lo - th_hi) * (power ? std::pow(floor, gamma) : floor * std::log(floor));
    auto tail_form = [&](double y) {
        const double k = power ? gamma * std::pow(y, gamma - 1.0) : 1.0 + std::log(y);
        return k * (tail_theta(model, y, side) - th_hi);
    };
    rhs += integrate_log(tail_form, floor, hi, opt);
    return {lhs, rhs};
}

namespace detail {

// cos x - 1 and sin x - x without cancellation at small x.
inline double cos_minus_one(double x) {
    const double h = std::sin(0.5 * x);
    return -2.0 * h * h;
}

inline double sin_minus_id(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
    }
    return std::sin(x) - x;
}

}  // namespace detail

// Lévy exponent psi(u) with E exp(iuY_1) = exp(psi(u)).
inline std::complex<double> characteristic_exponent(const LevyModel& model, double u) {
    QuadratureOptions opt;
    opt.rel_tol = 1e-11;
    const double floor = 1e-12 * std::min(1.0, model.effective_upper(Side::plus));
    double re = 0.0;
    double im = u * model.drift_b();
    for (Side side : {Side::plus, Side::minus}) {
        const double sgn = side == Side::plus ? 1.0 : -1.0;
        re += side_integral(model, side, floor, detail::kInf, [u](double r) { return detail::cos_minus_one(u * r); },
                            opt);
        im += sgn * side_integral(model, side, floor, detail::kInf,
                                  [u](double r) { return r <= 1.0 ? detail::sin_minus_id(u * r) : std::sin(u * r); },
                                  opt);
    }
    return {re, im};
}

// Draws from F restricted to {lo < |x| <= hi}, normalised.
class JumpSampler {
  public:
    JumpSampler(const LevyModel& model, double lo, double hi = detail::kInf) : model_(&model) {
        if (!model.bounded()) {
            throw DomainError("jump sampling requires a bounded jump size p");
        }
        if (!(lo > 0.0)) {
            throw DomainError("jump sampler cutoff must be positive");
        }
        hi_ = std::min(hi, model.jump_bound());
        lo_ = lo;
        if (!(lo_ < hi_)) {
            throw DomainError("jump sampler: empty size band (theta(beta) = 0)");
        }
        if (const auto* st = model.stable()) {
            lo_pow_ = std::pow(lo_, -st->alpha);
            hi_pow_ = std::pow(hi_, -st->alpha);
            mass_plus_ = st->theta_plus * (lo_pow_ - hi_pow_);
            mass_minus_ = st->theta_minus * (lo_pow_ - hi_pow_);
        } else {
            for (Side s : {Side::plus, Side::minus}) {
                const auto* tab = model.table(s);
                const double t_lo = tab->tail(lo_);
                const double t_hi = tab->tail(hi_);
                (s == Side::plus ? t_plus_ : t_minus_) = {t_hi, t_lo};
                (s == Side::plus ? mass_plus_ : mass_minus_) = t_lo - t_hi;
            }
        }
        if (!(mass() > 0.0)) {
            throw DomainError("jump sampler: zero mass beyond the cutoff (theta(beta) = 0)");
        }
    }

    double mass() const noexcept { return mass_plus_ + mass_minus_; }
    double lower() const noexcept { return lo_; }
    double upper() const noexcept { return hi_; }

    template <class Engine>
    double operator()(Engine& eng) const {
        const bool plus = uniform_open01(eng) * mass() < mass_plus_;
        const double v = uniform_open01(eng);
        double r;
        if (const auto* st = model_->stable()) {
            r = std::pow(hi_pow_ + v * (lo_pow_ - hi_pow_), -1.0 / st->alpha);
        } else {
            const auto& t = plus ? t_plus_ : t_minus_;
            r = model_->table(plus ? Side::plus : Side::minus)->inverse(t.first + v * (t.second - t.first));
        }
        r = std::clamp(r, lo_, hi_);
        return plus ? r : -r;
    }

  private:
    const LevyModel* model_;
    double lo_ = 0.0;
    double hi_ = 0.0;
    double lo_pow_ = 0.0;
    double hi_pow_ = 0.0;
    double mass_plus_ = 0.0;
    double mass_minus_ = 0.0;
    std::pair<double, double> t_plus_{0.0, 0.0};
    std::pair<double, double> t_minus_{0.0, 0.0};
};

template <class Engine>
double truncated_jump_sampler(const LevyModel& model, double beta, Engine& eng) {
    return JumpSampler(model, beta)(eng);
}

}  // namespace mlevy
