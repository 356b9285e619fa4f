#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "mlevy/path_engine.hpp"
#include "mlevy/stats.hpp"

using namespace mlevy;

namespace {

struct Fixture {
    LevyModel model;
    CaseParams params;
    GridSpec grid;
};

Fixture make(double alpha, double tp, double tm, Regime r, int n, int m = 2, double b = 0.0) {
    auto model = LevyModel::two_sided_stable(alpha, tp, tm, 1.0, b);
    auto params = make_case_params(model, r, alpha, n, m);
    return {std::move(model), params, GridSpec(n, m)};
}

FineGridPath draw(const PathSampler& s, std::uint64_t seed, std::uint64_t i) {
    return s.sample(RandomStream(StreamFamily(seed, "path", 0), i));
}

}  // namespace

TEST(SamplePath, NoBigJumpsWhenCutoffReachesBound) {
    // C5 at n = 8 clamps beta_n to 1 = p.
    const Fixture s = make(1.5, 1.0, 1.0, Regime::C5, 8);
    ASSERT_TRUE(s.params.beta_clamped);
    const PathSampler ps(s.model, s.params, s.grid);
    EXPECT_EQ(ps.lambda_cell(), 0.0);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const FineGridPath p = draw(ps, 1, i);
        EXPECT_TRUE(p.jumps.empty());
        for (std::int64_t c = 0; c < p.cells(); ++c) {
            EXPECT_EQ(p.y_incr[c], p.drift_incr + p.small_mart_incr[c]);
        }
    }
}

TEST(SamplePath, TelescopingAndCellLayout) {
    const Fixture s = make(0.5, 2.0, 1.0, Regime::C1, 32);
    const PathSampler ps(s.model, s.params, s.grid);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const FineGridPath p = draw(ps, 2, i);
        ASSERT_EQ(p.y_at_nodes.size(), static_cast<std::size_t>(p.cells() + 1));
        EXPECT_EQ(p.y_at_nodes[0], 0.0);
        for (std::int64_t c = 0; c < p.cells(); ++c) {
            EXPECT_EQ(p.y_at_nodes[c + 1], p.y_at_nodes[c] + p.y_incr[c]);
            double sum = p.drift_incr + p.small_mart_incr[c];
            for (const Jump& j : p.cell_jumps(c)) {
                EXPECT_GT(j.time, s.grid.time(c));
                EXPECT_LE(j.time, s.grid.time(c + 1));
                EXPECT_GT(std::abs(j.size), p.truncation);
                EXPECT_LE(std::abs(j.size), 1.0);
                sum += j.size;
            }
            EXPECT_NEAR(p.y_incr[c], sum, 1e-15);
        }
    }
}

TEST(SamplePath, DeterministicStreams) {
    const Fixture s = make(0.5, 2.0, 1.0, Regime::C1, 16);
    const PathSampler ps(s.model, s.params, s.grid);
    const FineGridPath a = draw(ps, 3, 5);
    const FineGridPath b = draw(ps, 3, 5);
    const FineGridPath c = draw(ps, 3, 6);
    EXPECT_EQ(a.y_incr, b.y_incr);
    EXPECT_NE(a.y_incr, c.y_incr);
}

TEST(SamplePath, SymmetricMeanIsDrift) {
    const Fixture s = make(0.75, 1.0, 1.0, Regime::C2, 16);
    const PathSampler ps(s.model, s.params, s.grid);
    const double beta = ps.truncation();
    const double var = truncated_second_moment(s.model, beta) + big_jump_second_moment(s.model, beta);
    const int paths = 100'000;
    MomentAccumulator acc;
    for (int i = 0; i < paths; ++i) {
        acc.push(draw(ps, 4, i).terminal());
    }
    EXPECT_NEAR(acc.mean(), truncated_drift(s.model, beta), 3.0 * std::sqrt(var / paths));
    EXPECT_NEAR(acc.variance() / var, 1.0, 0.05);
}

TEST(SamplePath, AsymmetricMeanAndVariance) {
    for (SmallJumpMode mode : {SmallJumpMode::gaussian_remainder, SmallJumpMode::layered_exact}) {
        const Fixture s = make(0.5, 2.0, 1.0, Regime::C1, 64, 2, 0.4);
        const PathSampler ps(s.model, s.params, s.grid, PathOptions{mode});
        const double beta = ps.truncation();
        const double var = truncated_second_moment(s.model, beta) + big_jump_second_moment(s.model, beta);
        const int paths = 100'000;
        MomentAccumulator acc;
        for (int i = 0; i < paths; ++i) {
            acc.push(draw(ps, 5, i).terminal());
        }
        // E Y_1 = b + int_{|x|>1} x F = b.
        EXPECT_NEAR(acc.mean(), 0.4, 3.0 * std::sqrt(var / paths)) << mode_name(mode);
        EXPECT_NEAR(acc.variance() / var, 1.0, 0.05) << mode_name(mode);
    }
}

TEST(SamplePath, PoissonCellCounts) {
    const Fixture s = make(0.5, 2.0, 1.0, Regime::C1, 64);
    const PathSampler ps(s.model, s.params, s.grid);
    std::vector<std::uint32_t> counts;
    for (int i = 0; i < 1000; ++i) {
        const FineGridPath p = draw(ps, 6, i);
        for (std::int64_t c = 0; c < p.cells(); ++c) {
            counts.push_back(p.jump_count(c));
        }
    }
    EXPECT_DOUBLE_EQ(ps.lambda_cell(), s.params.lambda_nm);
    EXPECT_GT(poisson_count_test(counts, s.params.lambda_nm), 0.01);
}

TEST(SamplePath, CountsInDisjointCellsUncorrelated) {
    const Fixture s = make(1.0, 1.0, 1.0, Regime::C4, 32);
    const PathSampler ps(s.model, s.params, s.grid);
    const int paths = 20'000;
    std::vector<double> a(paths), b(paths);
    for (int i = 0; i < paths; ++i) {
        const FineGridPath p = draw(ps, 7, i);
        a[i] = p.jump_count(3);
        b[i] = p.jump_count(4);
    }
    MomentAccumulator ma, mb;
    for (int i = 0; i < paths; ++i) {
        ma.push(a[i]);
        mb.push(b[i]);
    }
    double cov = 0.0;
    for (int i = 0; i < paths; ++i) {
        cov += (a[i] - ma.mean()) * (b[i] - mb.mean());
    }
    cov /= paths - 1;
    const double corr = cov / std::sqrt(ma.variance() * mb.variance());
    EXPECT_LT(std::abs(corr), 3.0 / std::sqrt(paths));
}

TEST(SamplePath, CharacteristicFunction) {
    struct Case {
        double alpha, tp, tm;
        Regime r;
        double truncation;
        SmallJumpMode mode;
        double layer_ratio;
    };
    const Case cases[] = {
        {0.5, 2.0, 1.0, Regime::C1, 0.0, SmallJumpMode::gaussian_remainder, 0.0},
        {1.5, 1.0, 1.0, Regime::C5, 0.05, SmallJumpMode::gaussian_remainder, 0.0},
        {1.5, 2.0, 1.0, Regime::C5, 0.2, SmallJumpMode::layered_exact, 0.25},
    };
    const int paths = 100'000;
    for (const Case& cs : cases) {
        const Fixture s = make(cs.alpha, cs.tp, cs.tm, cs.r, 64);
        const PathSampler ps(s.model, s.params, s.grid, PathOptions{cs.mode, cs.truncation, cs.layer_ratio});
        std::vector<double> y(paths);
        for (int i = 0; i < paths; ++i) {
            y[i] = draw(ps, 8, i).terminal();
        }
        const std::vector<double> us{-2.0, -1.0, 1.0, 2.0};
        const auto cf = empirical_cf(y, us);
        for (std::size_t k = 0; k < us.size(); ++k) {
            const std::complex<double> expect = std::exp(characteristic_exponent(s.model, us[k]));
            EXPECT_LT(std::abs(cf[k] - expect), 4.0 / std::sqrt(paths)) << cs.alpha << " u=" << us[k];
        }
    }
}

TEST(SamplePath, DropModeHasNoMartingalePart) {
    const Fixture s = make(0.5, 2.0, 1.0, Regime::C1, 16);
    const PathSampler ps(s.model, s.params, s.grid, PathOptions{SmallJumpMode::drop});
    const FineGridPath p = draw(ps, 9, 0);
    for (double x : p.small_mart_incr) {
        EXPECT_EQ(x, 0.0);
    }
    EXPECT_EQ(parse_mode("layered-exact"), SmallJumpMode::layered_exact);
    EXPECT_THROW(parse_mode("exact"), DomainError);
}

TEST(CoarseIncrements, Telescoping) {
    const std::vector<double> incr{0.1, -0.2, 0.4, 0.3, -0.5, 0.25};
    const FineGridPath p = FineGridPath::from_increments(GridSpec(3, 2), incr);
    const auto c = coarse_increments(p);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0], incr[0] + incr[1]);
    EXPECT_EQ(c[1], incr[2] + incr[3]);
    EXPECT_NEAR(c[0] + c[1] + c[2], p.terminal(), 1e-15);

    const std::vector<double> one{0.3, -0.1};
    const FineGridPath q = FineGridPath::from_increments(GridSpec(1, 2), one);
    EXPECT_EQ(coarse_increments(q)[0], q.terminal());
}

TEST(Aggregate, MatchesNodesOfFinerPath) {
    const Fixture s = make(1.0, 2.0, 1.0, Regime::C3, 64, 4);
    const PathSampler ps(s.model, s.params, s.grid);
    const FineGridPath p = draw(ps, 10, 0);
    const FineGridPath q = aggregate(p, GridSpec(16, 2));
    ASSERT_EQ(q.cells(), 32);
    for (std::int64_t c = 0; c <= 32; ++c) {
        EXPECT_NEAR(q.y_at_nodes[c], p.y_at_nodes[c * 8], 1e-12);
    }
    EXPECT_EQ(q.jumps.size(), p.jumps.size());
    for (std::int64_t c = 0; c < 32; ++c) {
        for (const Jump& j : q.cell_jumps(c)) {
            EXPECT_GT(j.time, q.grid.time(c));
            EXPECT_LE(j.time, q.grid.time(c + 1));
        }
    }
    EXPECT_THROW(aggregate(p, GridSpec(3, 2)), DomainError);
}
