#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mlevy/scheme_params.hpp"

using namespace mlevy;

TEST(Grid, NodeIndexing) {
    const GridSpec g(5, 3);
    EXPECT_EQ(g.cells(), 15);
    for (int i = 1; i < 5; ++i) {
        EXPECT_EQ(g.node(i, 4), g.node(i + 1, 1));
        EXPECT_EQ(g.time(g.node(i, 1)), static_cast<double>(i - 1) / 5.0);
    }
    EXPECT_EQ(g.node(5, 4), g.cells());
    EXPECT_EQ(g.time(g.cells()), 1.0);
}

TEST(Grid, EtaFixesNodes) {
    for (auto [n, m] : {std::pair{3, 2}, std::pair{7, 3}, std::pair{64, 2}, std::pair{100, 7}}) {
        const GridSpec g(n, m);
        for (std::int64_t j = 0; j <= g.cells(); ++j) {
            EXPECT_EQ(g.eta_fine(g.time(j)), j);
        }
        for (int i = 0; i <= n; ++i) {
            EXPECT_EQ(g.eta_coarse(g.time(std::int64_t{m} * i)), std::int64_t{m} * i);
        }
    }
}

TEST(Grid, RejectsBadSizes) {
    EXPECT_THROW(GridSpec(0, 2), DomainError);
    EXPECT_THROW(GridSpec(2, 0), DomainError);
}

TEST(Classify, TableCases) {
    EXPECT_EQ(classify_case(LevyModel::two_sided_stable(0.5, 2.0, 1.0), 0.5, false, true), Regime::C1);
    EXPECT_EQ(classify_case(LevyModel::two_sided_stable(0.5, 1.0, 1.0), 0.5, true, true), Regime::C2);
    EXPECT_EQ(classify_case(LevyModel::two_sided_stable(0.5, 1.0, 1.0, 1.0, 0.2), 0.5, true, false), Regime::C1);
    EXPECT_EQ(classify_case(LevyModel::two_sided_stable(1.0, 2.0, 1.0), 1.0, false, true), Regime::C3);
    EXPECT_EQ(classify_case(LevyModel::two_sided_stable(1.0, 1.0, 1.0), 1.0, true, true), Regime::C4);
    EXPECT_EQ(classify_case(LevyModel::two_sided_stable(1.5, 1.0, 1.0), 1.5, true, true), Regime::C5);
    EXPECT_EQ(classify_case(LevyModel::two_sided_stable(1.5, 3.0, 1.0), 1.5, false, true), Regime::C5);
}

TEST(Classify, OutsideRegimes) {
    // alpha < 1, asymmetric, and b chosen so that d = b - int x F = 0.
    const auto probe = LevyModel::two_sided_stable(0.5, 2.0, 1.0);
    const double mean = band_first_moment(probe, 0.0, 1.0);
    const auto m = LevyModel::two_sided_stable(0.5, 2.0, 1.0, 1.0, mean);
    EXPECT_THROW(classify_case(m, 0.5, false, false), RegimeError);
}

TEST(Classify, InconsistentFlags) {
    const auto m = LevyModel::two_sided_stable(0.5, 2.0, 1.0);
    EXPECT_THROW(classify_case(m, 0.5, true, true), DomainError);
    EXPECT_THROW(classify_case(m, 0.5, false, false), DomainError);
    EXPECT_THROW(classify_case(m, 2.0, false, true), DomainError);
}

TEST(RateCutoff, CaseOneExample) {
    const RateCutoff r = rate_and_cutoff(Regime::C1, 100, 2, 0.5);
    EXPECT_DOUBLE_EQ(r.u_nm, 200.0);
    EXPECT_NEAR(r.beta_n, 0.21207, 1e-5);
    EXPECT_FALSE(r.clamped);
}

TEST(RateCutoff, CaseFourExample) {
    const RateCutoff r = rate_and_cutoff(Regime::C4, 20, 2, 1.0);
    EXPECT_NEAR(r.u_nm, 13.35, 5e-3);
    EXPECT_NEAR(r.beta_n, 0.14979, 5e-6);
}

TEST(RateCutoff, AllFormulas) {
    const int n = 300;
    const int m = 3;
    const double ln = std::log(300.0);
    const double ratio = 900.0 / 2.0;
    const double a = 0.7;
    EXPECT_DOUBLE_EQ(rate_and_cutoff(Regime::C2, n, m, a).u_nm, std::pow(ratio / ln, 1.0 / a));
    EXPECT_DOUBLE_EQ(rate_and_cutoff(Regime::C2, n, m, a).beta_n, std::pow(ln / n, 1.0 / a));
    EXPECT_DOUBLE_EQ(rate_and_cutoff(Regime::C3, n, m, 1.0).u_nm, ratio / (ln * ln));
    EXPECT_DOUBLE_EQ(rate_and_cutoff(Regime::C3, n, m, 1.0).beta_n, ln / n);
    EXPECT_DOUBLE_EQ(rate_and_cutoff(Regime::C5, n, m, 1.5).u_nm, std::pow(ratio / ln, 1.0 / 1.5));
    EXPECT_DOUBLE_EQ(rate_and_cutoff(Regime::C5, n, m, 1.5).beta_n, ln / std::pow(300.0, 1.0 / 3.0));
}

TEST(RateCutoff, ClampsLargeCutoff) {
    // C1 at n = 3: (log 3)^2 / 3 = 0.402 < 1, but C5 at n = 8: log 8 / 8^{1/3} = 1.04.
    const RateCutoff r = rate_and_cutoff(Regime::C5, 8, 2, 1.5);
    EXPECT_TRUE(r.clamped);
    EXPECT_EQ(r.beta_n, 1.0);
    EXPECT_THROW(rate_and_cutoff(Regime::C1, 2, 2, 0.5), DomainError);
    EXPECT_THROW(rate_and_cutoff(Regime::C1, 10, 1, 0.5), DomainError);
}

TEST(RateCutoff, AsymptoticDirection) {
    for (Regime r : {Regime::C1, Regime::C2, Regime::C3, Regime::C4, Regime::C5}) {
        const double a = r == Regime::C3 || r == Regime::C4 ? 1.0 : (r == Regime::C5 ? 1.5 : 0.75);
        const auto mdl = LevyModel::two_sided_stable(a, 1.0, 1.0);
        double u_prev = 0.0;
        double b_prev = 2.0;
        std::vector<double> lambda;
        for (int j = 4; j <= 24; ++j) {
            const int n = 1 << j;
            const CaseParams p = make_case_params(mdl, r, a, n, 2);
            EXPECT_GT(p.u_nm, u_prev);
            EXPECT_LE(p.beta_n, b_prev);
            EXPECT_GT(p.beta_n, 0.0);
            EXPECT_DOUBLE_EQ(p.lambda_nm, tail_theta(mdl, p.beta_n) / (2.0 * n));
            u_prev = p.u_nm;
            b_prev = p.beta_n;
            lambda.push_back(p.lambda_nm);
        }
        // lambda decays (like 1/log n in the slowest cases) once beta_n < 1.
        for (std::size_t k = 8; k < lambda.size(); ++k) {
            EXPECT_LT(lambda[k], lambda[k - 4]) << regime_name(r) << " " << k;
        }
        EXPECT_LT(lambda.back(), 0.5 * *std::max_element(lambda.begin(), lambda.end())) << regime_name(r);
    }
}

TEST(CaseParams, Constants) {
    const auto m = LevyModel::two_sided_stable(0.5, 2.0, 1.0);
    const CaseParams p = make_case_params(m, Regime::C1, 0.5, 64, 2);
    EXPECT_EQ(p.theta_plus, 2.0);
    EXPECT_EQ(p.theta_minus, 1.0);
    // d = -int x F = -(a/(1-a)) (2 - 1) = -1.
    EXPECT_NEAR(p.d_const, -1.0, 1e-12);
    EXPECT_EQ(parse_regime("C3"), Regime::C3);
    EXPECT_EQ(regime_name(Regime::C5), "C5");
    EXPECT_THROW(parse_regime("C6"), DomainError);
}
