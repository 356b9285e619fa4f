#pragma once

// Config-driven experiments behind the command-line verbs. Every function
// returns its numbers and, when an output directory is given, writes CSV.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mlevy/config.hpp"
#include "mlevy/csv.hpp"
#include "mlevy/euler.hpp"
#include "mlevy/levy_measure.hpp"
#include "mlevy/limit_sim.hpp"
#include "mlevy/parallel.hpp"
#include "mlevy/path_engine.hpp"
#include "mlevy/scheme_params.hpp"
#include "mlevy/stats.hpp"

namespace mlevy {

struct RunContext {
    unsigned threads = 1;
    std::string out_dir;  // empty: no files
    std::ostream* log = &std::cerr;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

namespace detail {

inline std::string out_file(const RunContext& ctx, const std::string& name) {
    std::filesystem::create_directories(ctx.out_dir);
    return (std::filesystem::path(ctx.out_dir) / name).string();
}

inline void warn_clamped(const RunContext& ctx, const CaseParams& p, int n) {
    if (p.beta_clamped && ctx.log) {
        *ctx.log << "warning: cutoff beta_n clamped to 1 at n=" << n << " (pre-asymptotic level)\n";
    }
}

inline void require_finite(const std::vector<double>& v, const std::string& what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw NumericalError(what + " is not finite on path " + std::to_string(i), v[i]);
        }
    }
}

inline std::vector<double> sorted_copy(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

// Rate fit that degrades to NaN when a statistic is not positive.
inline RateFit safe_rate_fit(const std::vector<double>& levels, const std::vector<double>& stats) {
    const bool ok = levels.size() >= 2 && std::all_of(stats.begin(), stats.end(), [](double s) { return s > 0.0; });
    if (!ok) {
        RateFit r;
        r.levels = levels;
        r.statistics = stats;
        r.slope = r.intercept = r.r2 = kNaN;
        return r;
    }
    return rate_fit(levels, stats);
}

}  // namespace detail

struct Experiment {
    ExperimentConfig config;
    LevyModel model;
    Regime regime;
    Coefficient f;

    explicit Experiment(const ExperimentConfig& c)
        : config(c), model(c.model.build()), regime(c.regime(model)), f(c.coefficient.build()) {}

    CaseParams params(int n) const { return make_case_params(model, regime, config.model.alpha, n, config.m); }

    PathOptions path_options(const CaseParams& p) const {
        return PathOptions{config.small_jump_mode, config.sim_truncation > 0.0 ? config.sim_truncation : p.beta_n};
    }

    // Signed terminal errors U^{n,m}_1 of `paths` coupled runs at level n.
    std::vector<double> terminal_errors(int n, const RunContext& ctx) const {
        const CaseParams p = params(n);
        detail::warn_clamped(ctx, p, n);
        const PathSampler sampler(model, p, GridSpec(n, config.m), path_options(p));
        const StreamFamily family(config.seed, "path", static_cast<std::uint64_t>(n));
        std::vector<double> u(static_cast<std::size_t>(config.paths));
        parallel_for(u.size(), ctx.threads, [&](std::size_t i) {
            const FineGridPath path = sampler.sample(RandomStream(family, i));
            u[i] = terminal_multilevel_error(f, path, config.coefficient.x0);
        });
        detail::require_finite(u, "terminal error at n=" + std::to_string(n));
        return u;
    }
};

// ---------------------------------------------------------------- rate sweep

struct RateLevel {
    int n = 0;
    CaseParams params;
    double truncation = 0.0;
    double median_abs = 0.0;
    double q25_abs = 0.0;
    double q75_abs = 0.0;
    double median_scaled = 0.0;
    double q25_scaled = 0.0;
    double q75_scaled = 0.0;
};

struct RateSweepResult {
    Regime regime = Regime::C1;
    std::vector<RateLevel> levels;
    RateFit fit_abs;         // median |U_1|
    RateFit fit_scaled;      // median u |U_1|
    RateFit fit_overscaled;  // median u n^{0.3} |U_1|
};

inline constexpr double kOverscaleExponent = 0.3;

inline RateSweepResult run_rate_sweep(const ExperimentConfig& config, const RunContext& ctx = {}) {
    const Experiment ex(config);
    RateSweepResult res;
    res.regime = ex.regime;
    std::optional<CsvWriter> paths_csv;
    if (!ctx.out_dir.empty() && config.emit_paths) {
        paths_csv.emplace(detail::out_file(ctx, "rate_paths.csv"), "n,path,u_err_terminal,scaled_err_terminal");
    }
    std::vector<double> ns, s_abs, s_scaled, s_over;
    for (int n : config.n_levels) {
        const std::vector<double> u = ex.terminal_errors(n, ctx);
        RateLevel lv;
        lv.n = n;
        lv.params = ex.params(n);
        lv.truncation = ex.path_options(lv.params).truncation;
        std::vector<double> a(u.size());
        std::transform(u.begin(), u.end(), a.begin(), [](double x) { return std::abs(x); });
        std::sort(a.begin(), a.end());
        const double un = lv.params.u_nm;
        lv.median_abs = sorted_quantile(a, 0.5);
        lv.q25_abs = sorted_quantile(a, 0.25);
        lv.q75_abs = sorted_quantile(a, 0.75);
        lv.median_scaled = un * lv.median_abs;
        lv.q25_scaled = un * lv.q25_abs;
        lv.q75_scaled = un * lv.q75_abs;
        if (paths_csv) {
            for (std::size_t i = 0; i < u.size(); ++i) {
                *paths_csv << n << static_cast<std::uint64_t>(i) << u[i] << un * u[i];
                paths_csv->end_row();
            }
        }
        ns.push_back(n);
        s_abs.push_back(lv.median_abs);
        s_scaled.push_back(lv.median_scaled);
        s_over.push_back(lv.median_scaled * std::pow(static_cast<double>(n), kOverscaleExponent));
        res.levels.push_back(lv);
    }
    res.fit_abs = detail::safe_rate_fit(ns, s_abs);
    res.fit_scaled = detail::safe_rate_fit(ns, s_scaled);
    res.fit_overscaled = detail::safe_rate_fit(ns, s_over);

    if (!ctx.out_dir.empty()) {
        CsvWriter w(detail::out_file(ctx, "rate_sweep.csv"),
                    "n,m,case,u_nm,beta_n,beta_clamped,truncation,lambda_nm,paths,median_abs_err,q25_abs_err,"
                    "q75_abs_err,iqr_abs_err,median_scaled_err,q25_scaled_err,q75_scaled_err,iqr_scaled_err");
        for (const auto& lv : res.levels) {
            w << lv.n << config.m << regime_name(ex.regime) << lv.params.u_nm << lv.params.beta_n
              << (lv.params.beta_clamped ? 1 : 0) << lv.truncation << lv.params.lambda_nm << config.paths
              << lv.median_abs << lv.q25_abs << lv.q75_abs << lv.q75_abs - lv.q25_abs << lv.median_scaled
              << lv.q25_scaled << lv.q75_scaled << lv.q75_scaled - lv.q25_scaled;
            w.end_row();
        }
        CsvWriter fw(detail::out_file(ctx, "rate_fit.csv"), "statistic,levels,slope,intercept,r2");
        const std::pair<const char*, const RateFit*> fits[] = {
            {"median_abs_err", &res.fit_abs},
            {"median_scaled_err", &res.fit_scaled},
            {"median_overscaled_err", &res.fit_overscaled},
        };
        for (const auto& [name, fit] : fits) {
            fw << name << static_cast<int>(ns.size()) << fit->slope << fit->intercept << fit->r2;
            fw.end_row();
        }
    }
    return res;
}

// ------------------------------------------------------------- limit compare

struct LimitLevel {
    int n = 0;
    CaseParams params;
    std::vector<double> scaled;  // u_{n,m} U^{n,m}_1, sorted
    double ks = 0.0;
    double coupled_mean_abs_diff = kNaN;  // C3 only
};

struct LimitCompareResult {
    Regime regime = Regime::C1;
    std::vector<double> limit_u;  // U_1 draws, sorted
    std::vector<LimitLevel> levels;
};

inline const std::vector<double>& default_cf_grid() {
    static const std::vector<double> u{0.25, 0.5, 1.0, 2.0, 4.0};
    return u;
}

inline LimitOptions limit_options(const Experiment& ex, const CaseParams& top) {
    LimitOptions opt;
    opt.n_ref = ex.config.limit_n_ref;
    opt.mode = ex.config.small_jump_mode;
    opt.m = ex.config.m;
    if (ex.config.limit_beta_floor > 0.0) {
        opt.beta_floor = ex.config.limit_beta_floor;
    } else {
        opt.beta_floor = ex.path_options(top).truncation;
    }
    return opt;
}

inline LimitCompareResult run_limit_compare(const ExperimentConfig& config, const RunContext& ctx = {}) {
    const Experiment ex(config);
    LimitCompareResult res;
    res.regime = ex.regime;
    const int n_top = config.n_levels.back();
    const CaseParams top = ex.params(n_top);
    const LimitOptions lopt = limit_options(ex, top);
    const double x0 = config.coefficient.x0;
    const LimitSampler sampler(ex.model, top, ex.f, x0, lopt, config.seed);

    res.limit_u.resize(static_cast<std::size_t>(config.limit_samples));
    parallel_for(res.limit_u.size(), ctx.threads,
                 [&](std::size_t i) { res.limit_u[i] = sampler.sample(i).u_terminal; });
    detail::require_finite(res.limit_u, "limit sample");
    std::sort(res.limit_u.begin(), res.limit_u.end());

    for (int n : config.n_levels) {
        LimitLevel lv;
        lv.n = n;
        lv.params = ex.params(n);
        lv.scaled = ex.terminal_errors(n, ctx);
        for (double& x : lv.scaled) {
            x *= lv.params.u_nm;
        }
        std::sort(lv.scaled.begin(), lv.scaled.end());
        lv.ks = ks_distance(lv.scaled, res.limit_u);
        res.levels.push_back(std::move(lv));
    }

    if (ex.regime == Regime::C3) {
        // Coupled: every level runs on the reference path itself.
        std::vector<std::size_t> usable;
        for (std::size_t k = 0; k < res.levels.size(); ++k) {
            const std::int64_t cells = std::int64_t{res.levels[k].n} * config.m;
            if (lopt.n_ref % cells == 0) {
                usable.push_back(k);
            } else if (ctx.log) {
                *ctx.log << "warning: n=" << res.levels[k].n << " does not divide the reference mesh; no coupled statistic\n";
            }
        }
        const std::size_t count = static_cast<std::size_t>(config.paths);
        std::vector<std::vector<double>> diffs(usable.size(), std::vector<double>(count));
        parallel_for(count, ctx.threads, [&](std::size_t i) {
            const FineGridPath ref = sampler.reference_path(i);
            const double lim = sampler.solve_on_path(ref, i).u_terminal;
            for (std::size_t q = 0; q < usable.size(); ++q) {
                const LimitLevel& lv = res.levels[usable[q]];
                const FineGridPath p = aggregate(ref, GridSpec(lv.n, config.m));
                diffs[q][i] = std::abs(lv.params.u_nm * terminal_multilevel_error(ex.f, p, x0) - lim);
            }
        });
        for (std::size_t q = 0; q < usable.size(); ++q) {
            MomentAccumulator acc;
            for (double d : diffs[q]) {
                acc.push(d);
            }
            res.levels[usable[q]].coupled_mean_abs_diff = acc.mean();
        }
    }

    if (!ctx.out_dir.empty()) {
        const auto& ql = default_quantile_levels();
        CsvWriter w(detail::out_file(ctx, "limit_compare.csv"),
                    "n,m,case,u_nm,beta_n,paths,limit_samples,ks_distance,median_scaled_err,median_limit_u,"
                    "coupled_mean_abs_diff");
        const double lim_med = sorted_quantile(res.limit_u, 0.5);
        for (const auto& lv : res.levels) {
            w << lv.n << config.m << regime_name(ex.regime) << lv.params.u_nm << lv.params.beta_n << config.paths
              << config.limit_samples << lv.ks << sorted_quantile(lv.scaled, 0.5) << lim_med
              << lv.coupled_mean_abs_diff;
            w.end_row();
        }
        CsvWriter qw(detail::out_file(ctx, "limit_quantiles.csv"), "source,n,q,value");
        for (double q : ql) {
            qw << "limit" << 0 << q << sorted_quantile(res.limit_u, q);
            qw.end_row();
        }
        for (const auto& lv : res.levels) {
            for (double q : ql) {
                qw << "scheme" << lv.n << q << sorted_quantile(lv.scaled, q);
                qw.end_row();
            }
        }
        CsvWriter cw(detail::out_file(ctx, "limit_cf.csv"), "source,n,u,re,im");
        const auto& grid = default_cf_grid();
        auto emit_cf = [&](const char* src, int n, const std::vector<double>& s) {
            const auto cf = empirical_cf(s, grid);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                cw << src << n << grid[k] << cf[k].real() << cf[k].imag();
                cw.end_row();
            }
        };
        emit_cf("limit", 0, res.limit_u);
        for (const auto& lv : res.levels) {
            emit_cf("scheme", lv.n, lv.scaled);
        }
    }
    return res;
}

// ------------------------------------------------------------- measure audit

struct AuditRow {
    double beta = 0.0;
    std::string quantity;
    double value = 0.0;
    double expected = 0.0;
    // |value - expected| / |expected|, or the absolute gap when expected is 0.
    double deviation = 0.0;
};

struct FubiniRow {
    FubiniVariant variant;
    double a, b, gamma;
    double lhs, rhs;
    double residual;
};

inline std::string_view fubini_name(FubiniVariant v) {
    switch (v) {
        case FubiniVariant::power_positive:
            return "power_positive";
        case FubiniVariant::power_negative:
            return "power_negative";
        case FubiniVariant::xlog_positive:
            return "xlog_positive";
        case FubiniVariant::xlog_negative:
            return "xlog_negative";
    }
    return "?";
}

inline double relative_gap(double value, double expected) {
    const double gap = std::abs(value - expected);
    return expected == 0.0 ? gap : gap / std::abs(expected);
}

inline const std::vector<double>& audit_betas() {
    static const std::vector<double> b{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    return b;
}

// Small-beta equivalences of the truncated functionals, tabulated.
inline std::vector<AuditRow> measure_audit_rows(const LevyModel& model, double alpha,
                                                const std::vector<double>& betas = audit_betas()) {
    const auto [tp, tm] = h2_constants(model, alpha);
    const double th = tp + tm;
    const auto [dp_lim, dm_lim] = limit_first_moments(model);
    std::vector<AuditRow> rows;
    auto add = [&](double beta, std::string q, double v, double e) {
        rows.push_back({beta, std::move(q), v, e, relative_gap(v, e)});
    };
    // The d_pm rule for the three alpha ranges: scaled value and its limit.
    auto d_rule = [&](double d, double beta, double h2, double lim) -> std::pair<double, double> {
        if (alpha > 1.0) {
            return {d * std::pow(beta, alpha - 1.0), alpha * h2 / (alpha - 1.0)};
        }
        if (alpha == 1.0) {
            return {d / std::log(1.0 / beta), h2};
        }
        return {d, lim};
    };
    for (double beta : betas) {
        const TailStats s = tail_stats(model, beta, alpha);
        const double lb = std::log(1.0 / beta);
        add(beta, "theta_scaled", std::pow(beta, alpha) * s.theta, th);
        add(beta, "theta_plus_scaled", std::pow(beta, alpha) * s.theta_plus, tp);
        add(beta, "theta_minus_scaled", std::pow(beta, alpha) * s.theta_minus, tm);
        add(beta, "c_scaled", s.c_beta * std::pow(beta, alpha - 2.0), alpha * th / (2.0 - alpha));
        add(beta, "rho_scaled", s.rho / lb, alpha * th);
        const auto [dpv, dpe] = d_rule(s.d_plus, beta, tp, dp_lim);
        add(beta, "d_plus_scaled", dpv, dpe);
        const auto [dmv, dme] = d_rule(s.d_minus, beta, tm, dm_lim);
        add(beta, "d_minus_scaled", dmv, dme);
        const auto [dv, de] = d_rule(s.d_prime, beta, tp - tm, dp_lim - dm_lim);
        add(beta, "d_prime_scaled", dv, model.is_symmetric() ? 0.0 : de);
        add(beta, "s_beta", s.s_beta, s_function(alpha, beta));
        if (alpha == 1.0) {
            add(beta, "xlog_scaled", xlog_integral(model, beta, 1.0) / (lb * lb), -(tp - tm) / 2.0);
        }
    }
    return rows;
}

// 20-point grid over the four identities (5 intervals each).
inline std::vector<FubiniRow> fubini_audit_rows(const LevyModel& model) {
    struct P {
        double a, b, g;
    };
    const P pos[] = {{0.0, 1.0, 2.0}, {0.01, 1.0, 2.0}, {0.1, 1.0, 1.0}, {0.001, 0.5, 1.5}, {0.2, 0.9, 3.0}};
    const P xl[] = {{1e-6, 1.0, 1.0}, {0.01, 1.0, 1.0}, {0.1, 0.5, 1.0}, {1e-4, 0.3, 1.0}, {0.25, 0.75, 1.0}};
    std::vector<FubiniRow> rows;
    auto run = [&](FubiniVariant v, double a, double b, double g) {
        const auto [l, r] = fubini_check(model, v, a, b, g);
        rows.push_back({v, a, b, g, l, r, relative_gap(r, l)});
    };
    for (const P& p : pos) {
        run(FubiniVariant::power_positive, p.a, p.b, p.g);
        run(FubiniVariant::power_negative, -p.b, -p.a, p.g);
    }
    for (const P& p : xl) {
        run(FubiniVariant::xlog_positive, p.a, p.b, 1.0);
        run(FubiniVariant::xlog_negative, -p.b, -p.a, 1.0);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const FubiniRow& x, const FubiniRow& y) { return x.variant < y.variant; });
    return rows;
}

struct MeasureAuditResult {
    std::vector<AuditRow> rows;
    std::vector<FubiniRow> fubini;
};

inline MeasureAuditResult run_measure_audit(const ExperimentConfig& config, const RunContext& ctx = {}) {
    const LevyModel model = config.model.build();
    MeasureAuditResult res;
    res.rows = measure_audit_rows(model, config.model.alpha);
    if (model.bounded() && model.jump_bound() >= 1.0) {
        res.fubini = fubini_audit_rows(model);
    } else if (ctx.log) {
        *ctx.log << "note: Fubini identities need jumps reaching 1 with bounded support; skipped\n";
    }
    if (!ctx.out_dir.empty()) {
        CsvWriter w(detail::out_file(ctx, "measure_audit.csv"), "beta,quantity,value,expected,relative_deviation");
        for (const auto& r : res.rows) {
            w << r.beta << r.quantity << r.value << r.expected << r.deviation;
            w.end_row();
        }
        CsvWriter fw(detail::out_file(ctx, "fubini_audit.csv"), "variant,a,b,gamma,lhs,rhs,relative_residual");
        for (const auto& r : res.fubini) {
            fw << fubini_name(r.variant) << r.a << r.b << r.gamma << r.lhs << r.rhs << r.residual;
            fw.end_row();
        }
    }
    return res;
}

// ----------------------------------------------------------------- dump path

// Path 0 of every level: node values of Y and of both schemes, and the jumps.
inline void run_dump_path(const ExperimentConfig& config, const RunContext& ctx) {
    const Experiment ex(config);
    for (int n : config.n_levels) {
        const CaseParams p = ex.params(n);
        detail::warn_clamped(ctx, p, n);
        const GridSpec grid(n, config.m);
        const PathSampler sampler(ex.model, p, grid, ex.path_options(p));
        const FineGridPath path =
            sampler.sample(RandomStream(StreamFamily(config.seed, "path", static_cast<std::uint64_t>(n)), 0));
        const CoupledEulerResult r = multilevel_error(ex.f, path, config.coefficient.x0);
        if (ctx.out_dir.empty()) {
            continue;
        }
        const std::string tag = std::to_string(n);
        CsvWriter w(detail::out_file(ctx, "path_n" + tag + ".csv"), "node,time,y,x_coarse,x_fine,u_err");
        for (std::size_t j = 0; j < path.y_at_nodes.size(); ++j) {
            w << static_cast<std::int64_t>(j) << grid.time(static_cast<std::int64_t>(j)) << path.y_at_nodes[j]
              << r.x_coarse[j] << r.x_fine[j] << r.u_err[j];
            w.end_row();
        }
        CsvWriter jw(detail::out_file(ctx, "jumps_n" + tag + ".csv"), "cell,time,size");
        for (std::int64_t c = 0; c < path.cells(); ++c) {
            for (std::uint32_t k = path.jump_offset[c]; k < path.jump_offset[c + 1]; ++k) {
                jw << c << path.jumps[k].time << path.jumps[k].size;
                jw.end_row();
            }
        }
    }
}

}  // namespace mlevy
