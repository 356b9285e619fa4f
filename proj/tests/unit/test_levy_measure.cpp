#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlevy/levy_measure.hpp"
#include "mlevy/rng.hpp"

using namespace mlevy;

namespace {

// Independent oracle: tanh-sinh on the raw density, split by decades so the
// power singularity never spans a single panel.
double oracle_integral(const std::function<double(double)>& g, double lo, double hi) {
    boost::math::quadrature::tanh_sinh<double> ts;
    double total = 0.0;
    double a = lo;
    while (a < hi) {
        const double b = a * 10.0 > hi * (1.0 - 1e-9) ? hi : a * 10.0;
        total += ts.integrate(g, a, b);
        a = b;
    }
    return total;
}

double stable_density(double alpha, double th, double x) { return alpha * th * std::pow(x, -1.0 - alpha); }

}  // namespace

TEST(TailTheta, VanishesAtJumpBound) {
    const auto m = LevyModel::two_sided_stable(0.5, 1.0, 1.0);
    EXPECT_EQ(tail_theta(m, 1.0), 0.0);
    EXPECT_EQ(tail_theta(m, 3.0), 0.0);
}

TEST(TailTheta, CgmyUnboundedScaledTail) {
    const auto m = LevyModel::cgmy(1.0, 1.0, 1.0, 0.5, detail::kInf);
    const double beta = 1e-6;
    EXPECT_NEAR(std::pow(beta, 0.5) * tail_theta(m, beta) / 4.0, 1.0, 0.01);
}

TEST(TailTheta, StableClosedFormMatchesOracle) {
    const auto m = LevyModel::two_sided_stable(0.5, 2.0, 0.0);
    const double v = tail_theta(m, 0.25);
    EXPECT_NEAR(v, 2.0, 1e-14);
    const double q = oracle_integral([](double x) { return stable_density(0.5, 2.0, x); }, 0.25, 1.0);
    EXPECT_NEAR(v / q, 1.0, 1e-10);
    EXPECT_EQ(tail_theta(m, 0.25, Side::minus), 0.0);
}

TEST(TailTheta, QuadratureKindsMatchOracle) {
    const auto m = LevyModel::cgmy(1.0, 2.0, 3.0, 0.7);
    for (double beta : {0.5, 0.1, 1e-3}) {
        const double plus =
            oracle_integral([](double x) { return std::exp(-3.0 * x) * std::pow(x, -1.7); }, beta, 1.0);
        const double minus =
            oracle_integral([](double x) { return std::exp(-2.0 * x) * std::pow(x, -1.7); }, beta, 1.0);
        EXPECT_NEAR(tail_theta(m, beta, Side::plus) / plus, 1.0, 1e-10);
        EXPECT_NEAR(tail_theta(m, beta, Side::minus) / minus, 1.0, 1e-10);
    }
}

TEST(TailTheta, RejectsNonPositiveBeta) {
    const auto m = LevyModel::two_sided_stable(0.5, 1.0, 1.0);
    EXPECT_THROW(tail_theta(m, 0.0), DomainError);
    EXPECT_THROW(tail_theta(m, -0.1), DomainError);
}

TEST(TailStats, LogBranchOfS) {
    const auto m = LevyModel::two_sided_stable(1.0, 1.0, 1.0);
    const TailStats s = tail_stats(m, std::exp(-3.0), 1.0);
    EXPECT_NEAR(s.s_beta, 3.0, 1e-12);
}

TEST(TailStats, SymmetricHasZeroDPrime) {
    for (double a : {0.5, 1.0, 1.5}) {
        const auto m = LevyModel::two_sided_stable(a, 1.3, 1.3);
        EXPECT_EQ(tail_stats(m, 0.01, a).d_prime, 0.0);
    }
    const auto cg = LevyModel::cgmy(1.0, 2.0, 2.0, 0.5);
    EXPECT_EQ(tail_stats(cg, 0.01, 0.5).d_prime, 0.0);
}

TEST(TailStats, FieldRelations) {
    const auto m = LevyModel::two_sided_stable(0.5, 2.0, 1.0, 1.0, 0.3);
    const TailStats s = tail_stats(m, 0.05, 0.5);
    EXPECT_DOUBLE_EQ(s.theta, s.theta_plus + s.theta_minus);
    EXPECT_DOUBLE_EQ(s.delta, s.d_plus + s.d_minus);
    EXPECT_DOUBLE_EQ(s.d_prime, s.d_plus - s.d_minus);
    EXPECT_DOUBLE_EQ(s.rho, s.rho_plus + s.rho_minus);
    EXPECT_DOUBLE_EQ(s.d_beta, s.b_prime - s.d_prime);
    EXPECT_DOUBLE_EQ(s.b_prime, 0.3);  // no jumps beyond 1
    EXPECT_DOUBLE_EQ(s.s_beta, 1.0);
}

TEST(TailStats, TruncatedSecondMomentEquivalence) {
    const auto m = LevyModel::two_sided_stable(0.5, 1.0, 1.0);
    const double beta = 1e-4;
    const TailStats s = tail_stats(m, beta, 0.5);
    EXPECT_NEAR(s.c_beta / std::pow(beta, 1.5) / (2.0 / 3.0), 1.0, 0.01);
    const double q = 2.0 * oracle_integral([](double x) { return x * x * stable_density(0.5, 1.0, x); }, 1e-30, beta);
    EXPECT_NEAR(s.c_beta / q, 1.0, 1e-9);
}

TEST(XlogIntegral, SymmetricIsZero) {
    const auto m = LevyModel::two_sided_stable(1.0, 1.0, 1.0);
    EXPECT_EQ(xlog_integral(m, 1e-6, 1.0), 0.0);
}

TEST(XlogIntegral, OneSidedCauchyLimit) {
    const auto m = LevyModel::two_sided_stable(1.0, 1.0, 0.0);
    const double beta = 1e-6;
    const double v = xlog_integral(m, beta, 1.0);
    const double lb = std::log(1.0 / beta);
    EXPECT_NEAR(v / (lb * lb) / -0.5, 1.0, 0.03);
    const double q = oracle_integral([](double x) { return x * std::log(x) * stable_density(1.0, 1.0, x); }, beta, 1.0);
    EXPECT_NEAR(v / q, 1.0, 1e-9);
}

TEST(XlogIntegral, EmptyDomain) {
    const auto m = LevyModel::two_sided_stable(1.0, 2.0, 1.0);
    EXPECT_EQ(xlog_integral(m, 0.3, 0.3), 0.0);
    EXPECT_NEAR(xlog_integral(m, 0.3 - 1e-12, 0.3), 0.0, 1e-9);
    EXPECT_THROW(xlog_integral(m, 0.5, 0.3), DomainError);
}

TEST(Fubini, PowerIdentityExample) {
    const auto m = LevyModel::two_sided_stable(0.5, 1.0, 1.0);
    const auto [l, r] = fubini_check(m, FubiniVariant::power_positive, 0.01, 1.0, 2.0);
    EXPECT_LT(std::abs(l - r) / std::abs(l), 1e-8);
}

TEST(Fubini, DegenerateIntervalRejected) {
    const auto m = LevyModel::two_sided_stable(0.5, 1.0, 1.0);
    EXPECT_THROW(fubini_check(m, FubiniVariant::power_positive, 0.3, 0.3, 2.0), DomainError);
    EXPECT_THROW(fubini_check(m, FubiniVariant::power_negative, -0.3, -0.3, 2.0), DomainError);
}

TEST(Fubini, FirstMomentMatchesTailStats) {
    const auto m = LevyModel::two_sided_stable(0.5, 1.0, 1.0);
    const auto [l, r] = fubini_check(m, FubiniVariant::power_positive, 0.1, 1.0, 1.0);
    const double expect = tail_stats(m, 0.1, 0.5).d_plus - tail_stats(m, 1.0, 0.5).d_plus;
    EXPECT_NEAR(l / expect, 1.0, 1e-8);
    EXPECT_NEAR(r / expect, 1.0, 1e-8);
}

TEST(Fubini, AllVariantsOnGrid) {
    const std::vector<LevyModel> models{LevyModel::two_sided_stable(0.5, 1.0, 1.0),
                                        LevyModel::two_sided_stable(1.0, 2.0, 1.0),
                                        LevyModel::two_sided_stable(1.5, 1.0, 2.0), LevyModel::cgmy(1.0, 1.0, 2.0, 0.5)};
    for (const auto& m : models) {
        for (double a : {0.0, 1e-3, 0.1}) {
            for (double b : {0.5, 1.0}) {
                for (double g : {1.0, 2.0, 2.5}) {
                    // From the origin: only the convergent integrals.
                    const double index = m.stable() ? m.stable()->alpha : 0.5;
                    if (a == 0.0 && !(g > index && index < 1.0)) {
                        continue;
                    }
                    for (auto v : {FubiniVariant::power_positive, FubiniVariant::xlog_positive}) {
                        const auto [l, r] = fubini_check(m, v, a, b, g);
                        EXPECT_LT(std::abs(l - r), 1e-8 * std::abs(l)) << a << " " << b << " " << g;
                    }
                    for (auto v : {FubiniVariant::power_negative, FubiniVariant::xlog_negative}) {
                        const auto [l, r] = fubini_check(m, v, -b, -a, g);
                        EXPECT_LT(std::abs(l - r), 1e-8 * std::abs(l)) << a << " " << b << " " << g;
                    }
                }
            }
        }
    }
}

TEST(Invariants, SecondMomentBoundsTail) {
    const std::vector<LevyModel> models{LevyModel::two_sided_stable(0.5, 1.0, 1.0),
                                        LevyModel::two_sided_stable(1.5, 2.0, 1.0), LevyModel::cgmy(1.0, 1.0, 1.0, 0.5)};
    for (const auto& m : models) {
        const double total = truncated_second_moment(m, 1.0) + tail_theta(m, 1.0);
        for (double beta = 1.0; beta > 1e-6; beta /= 3.0) {
            EXPECT_LE(beta * beta * tail_theta(m, beta), total * (1.0 + 1e-12));
        }
    }
}

TEST(Invariants, SecondMomentPowerBound) {
    for (double a : {0.5, 1.0, 1.5}) {
        const auto m = LevyModel::two_sided_stable(a, 2.0, 1.0);
        const double C = truncated_second_moment(m, 0.1) / std::pow(0.1, 2.0 - a);
        for (double beta = 0.1; beta >= 1e-6 * 0.99; beta /= 10.0) {
            EXPECT_LE(truncated_second_moment(m, beta), C * std::pow(beta, 2.0 - a) * (1.0 + 1e-12));
        }
    }
}

TEST(Invariants, SmallBetaEquivalences) {
    const double beta = 1e-6;
    const double lb = std::log(1.0 / beta);
    for (double a : {0.5, 1.0, 1.5}) {
        for (auto [tp, tm] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}}) {
            const auto m = LevyModel::two_sided_stable(a, tp, tm);
            const TailStats s = tail_stats(m, beta, a);
            const double th = tp + tm;
            EXPECT_NEAR(s.c_beta * std::pow(beta, a - 2.0) / (a * th / (2.0 - a)), 1.0, 0.03);
            EXPECT_NEAR(s.rho / lb / (a * th), 1.0, 0.03);
            if (a > 1.0) {
                EXPECT_NEAR(s.d_plus * std::pow(beta, a - 1.0) / (a * tp / (a - 1.0)), 1.0, 0.03);
            } else if (a == 1.0) {
                EXPECT_NEAR(s.d_plus / lb / tp, 1.0, 0.03);
            } else {
                // Finite limit: int_0^1 x * a tp x^{-1-a} dx = a tp / (1 - a).
                EXPECT_NEAR(s.d_plus / (a * tp / (1.0 - a)), 1.0, 0.03);
            }
        }
    }
}

TEST(JumpSampler, SupportAndTailProbability) {
    const auto m = LevyModel::two_sided_stable(0.5, 1.0, 0.0);
    const JumpSampler js(m, 0.25);
    auto eng = RandomStream(StreamFamily(11, "test"), 0).engine();
    const int n = 1'000'000;
    int above = 0;
    for (int k = 0; k < n; ++k) {
        const double x = js(eng);
        ASSERT_GT(x, 0.25);
        ASSERT_LE(x, 1.0);
        above += x > 0.5;
    }
    const double p = (std::pow(0.5, -0.5) - 1.0) / (std::pow(0.25, -0.5) - 1.0);
    EXPECT_NEAR(p, 0.41421, 1e-5);
    EXPECT_NEAR(static_cast<double>(above) / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(JumpSampler, SymmetricMeanZero) {
    const auto m = LevyModel::two_sided_stable(1.5, 1.0, 1.0);
    auto eng = RandomStream(StreamFamily(12, "test"), 0).engine();
    const int n = 1'000'000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = truncated_jump_sampler(m, 0.01, eng);
        s += x;
        s2 += x * x;
    }
    const double sd = std::sqrt(s2 / n);
    EXPECT_NEAR(s / n, 0.0, 3.0 * sd / std::sqrt(n));
}

TEST(JumpSampler, ZeroMassRejected) {
    const auto m = LevyModel::two_sided_stable(0.5, 1.0, 1.0);
    EXPECT_THROW(JumpSampler(m, 1.0), DomainError);
    const auto unbounded = LevyModel::cgmy(1.0, 1.0, 1.0, 0.5, detail::kInf);
    EXPECT_THROW(JumpSampler(unbounded, 0.1), DomainError);
}

namespace {

// KS statistic of sorted positive-side draws against a CDF.
template <class Cdf>
double one_sided_ks(std::vector<double> x, Cdf cdf) {
    std::sort(x.begin(), x.end());
    double d = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double F = cdf(x[k]);
        d = std::max({d, std::abs(F - k / n), std::abs((k + 1) / n - F)});
    }
    return d;
}

// CDF of the normalised density on (lo, hi], accumulated between increasing
// query points with a 31-point Gauss-Kronrod rule on each gap.
template <class Density>
auto accumulated_cdf(Density dens, double lo, double hi) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double total = oracle_integral(dens, lo, hi);
    return [=, F = 0.0, prev = lo](double x) mutable {
        if (x > prev) {
            F += GK::integrate(dens, prev, x, 0) / total;
            prev = x;
        }
        return F;
    };
}

}  // namespace

TEST(JumpSampler, KolmogorovSmirnovStable) {
    const auto m = LevyModel::two_sided_stable(1.5, 1.0, 0.0);
    const JumpSampler js(m, 0.01);
    auto eng = RandomStream(StreamFamily(13, "test"), 0).engine();
    const int n = 100'000;
    std::vector<double> x(n);
    for (double& v : x) {
        v = js(eng);
    }
    const double lo = std::pow(0.01, -1.5);
    const double hi = 1.0;
    const double d = one_sided_ks(x, [&](double r) { return (lo - std::pow(r, -1.5)) / (lo - hi); });
    EXPECT_LT(d, 1.63 / std::sqrt(n));
}

TEST(JumpSampler, KolmogorovSmirnovCgmyTable) {
    const auto m = LevyModel::cgmy(1.0, 1.0, 4.0, 0.8);
    const JumpSampler js(m, 0.001);
    auto eng = RandomStream(StreamFamily(14, "test"), 0).engine();
    const int n = 100'000;
    std::vector<double> plus;
    std::vector<double> minus;
    for (int k = 0; k < n; ++k) {
        const double v = js(eng);
        (v > 0 ? plus : minus).push_back(std::abs(v));
    }
    const double dp = one_sided_ks(
        plus, accumulated_cdf([](double r) { return std::exp(-4.0 * r) * std::pow(r, -1.8); }, 0.001, 1.0));
    const double dm = one_sided_ks(
        minus, accumulated_cdf([](double r) { return std::exp(-1.0 * r) * std::pow(r, -1.8); }, 0.001, 1.0));
    EXPECT_LT(dp, 1.63 / std::sqrt(static_cast<double>(plus.size())));
    EXPECT_LT(dm, 1.63 / std::sqrt(static_cast<double>(minus.size())));
    // Side choice is Bernoulli with the tail mass ratio.
    const double pp = tail_theta(m, 0.001, Side::plus) / tail_theta(m, 0.001);
    EXPECT_NEAR(static_cast<double>(plus.size()) / n, pp, 4.0 * std::sqrt(pp * (1 - pp) / n));
}

TEST(CharacteristicExponent, SymmetricStableAgainstOracle) {
    const auto m = LevyModel::two_sided_stable(1.5, 1.0, 1.0);
    for (double u : {0.5, 1.0, 2.0}) {
        const auto psi = characteristic_exponent(m, u);
        const double re =
            2.0 * oracle_integral([u](double x) {
                const double h = std::sin(0.5 * u * x);
                return -2.0 * h * h * stable_density(1.5, 1.0, x);
            },
                                  1e-12, 1.0);
        EXPECT_NEAR(psi.real(), re, 1e-8 * std::abs(re));
        EXPECT_NEAR(psi.imag(), 0.0, 1e-12);
    }
}
