#pragma once

// Two-grid time indexing and the five rate regimes.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "mlevy/errors.hpp"
#include "mlevy/levy_measure.hpp"

namespace mlevy {

// Coarse step 1/n, fine step 1/(nm) on [0, 1]. Fine nodes are kept as
// integer indices j = m(i-1) + k - 1 over the denominator nm.
struct GridSpec {
    int n = 1;
    int m = 2;

    GridSpec() = default;
    GridSpec(int n_, int m_) : n(n_), m(m_) {
        if (n < 1 || m < 1) {
            throw DomainError("grid needs n >= 1 and m >= 1");
        }
    }

    std::int64_t cells() const noexcept { return std::int64_t{n} * m; }
    // Fine node index of t_i^k, with i in 1..n and k in 1..m+1.
    std::int64_t node(int i, int k) const noexcept { return std::int64_t{m} * (i - 1) + (k - 1); }
    double time(std::int64_t j) const noexcept { return static_cast<double>(j) / static_cast<double>(cells()); }
    double cell_length() const noexcept { return 1.0 / static_cast<double>(cells()); }
    // Coarse cell holding fine cell j (0-based).
    int coarse_of(std::int64_t cell) const noexcept { return static_cast<int>(cell / m); }
    // eta_nm and eta_n as node indices on the fine grid. The floor is
    // corrected against time(j) so that every node maps to itself.
    std::int64_t eta_fine(double t) const noexcept {
        std::int64_t j = static_cast<std::int64_t>(std::floor(t * static_cast<double>(cells())));
        while (j < cells() && time(j + 1) <= t) {
            ++j;
        }
        while (j > 0 && time(j) > t) {
            --j;
        }
        return j;
    }
    std::int64_t eta_coarse(double t) const noexcept {
        const std::int64_t j = eta_fine(t);
        return j - j % m;
    }

    bool operator==(const GridSpec&) const = default;
};

enum class Regime { C1, C2, C3, C4, C5 };

inline std::string_view regime_name(Regime r) noexcept {
    constexpr std::string_view names[] = {"C1", "C2", "C3", "C4", "C5"};
    return names[static_cast<int>(r)];
}

inline Regime parse_regime(std::string_view s) {
    for (Regime r : {Regime::C1, Regime::C2, Regime::C3, Regime::C4, Regime::C5}) {
        if (regime_name(r) == s) {
            return r;
        }
    }
    throw DomainError("unknown regime '" + std::string(s) + "'");
}

struct CaseParams {
    Regime case_id = Regime::C1;
    double alpha = 0.5;
    double u_nm = 1.0;
    double beta_n = 1.0;
    double lambda_nm = 0.0;
    double d_const = 0.0;
    double theta_plus = 0.0;
    double theta_minus = 0.0;
    bool beta_clamped = false;

    double theta() const noexcept { return theta_plus + theta_minus; }
    double theta_prime() const noexcept { return theta_plus - theta_minus; }
};

// Sign of d = b - int_{|x|<=1} x F(dx) is judged against this threshold.
inline constexpr double kDriftZeroTol = 1e-12;

inline Regime classify_case(const LevyModel& model, double alpha, bool symmetric, bool b_zero) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw DomainError("alpha must lie in (0, 2)");
    }
    if (symmetric != model.is_symmetric()) {
        throw DomainError("declared symmetry does not match the Lévy density");
    }
    if (b_zero != (model.drift_b() == 0.0)) {
        throw DomainError("declared b = 0 flag does not match the model drift");
    }
    if (alpha > 1.0) {
        return Regime::C5;
    }
    if (alpha == 1.0) {
        return symmetric ? Regime::C4 : Regime::C3;
    }
    const double d = small_jump_drift_constant(model);
    if (std::abs(d) > kDriftZeroTol) {
        return Regime::C1;
    }
    if (symmetric && b_zero) {
        return Regime::C2;
    }
    throw RegimeError("alpha < 1 with d = 0 and an asymmetric measure is outside the five regimes");
}

inline Regime classify_case(const LevyModel& model, double alpha) {
    return classify_case(model, alpha, model.is_symmetric(), model.drift_b() == 0.0);
}

struct RateCutoff {
    double u_nm;
    double beta_n;
    bool clamped;  // the raw cutoff exceeded 1 and was set to 1
};

inline RateCutoff rate_and_cutoff(Regime regime, int n, int m, double alpha) {
    if (n < 3) {
        throw DomainError("rate_and_cutoff needs n >= 3 so that log n > 1");
    }
    if (m < 2) {
        throw DomainError("rate_and_cutoff needs m >= 2");
    }
    const double nn = n;
    const double mm = m;
    const double ln = std::log(nn);
    const double ratio = mm * nn / (mm - 1.0);
    double u = 0.0;
    double beta = 0.0;
    switch (regime) {
        case Regime::C1:
            u = ratio;
            beta = ln * ln / nn;
            break;
        case Regime::C2:
            u = std::pow(ratio / ln, 1.0 / alpha);
            beta = std::pow(ln / nn, 1.0 / alpha);
            break;
        case Regime::C3:
            u = ratio / (ln * ln);
            beta = ln / nn;
            break;
        case Regime::C4:
            u = ratio / ln;
            beta = ln / nn;
            break;
        case Regime::C5:
            u = std::pow(ratio / ln, 1.0 / alpha);
            beta = ln / std::pow(nn, 1.0 / (2.0 * alpha));
            break;
    }
    const bool clamped = beta > 1.0;
    return {u, clamped ? 1.0 : beta, clamped};
}

// The H2 constants lim beta^alpha theta_pm(beta).
inline std::pair<double, double> h2_constants(const LevyModel& model, double alpha) {
    if (const auto* st = model.stable()) {
        return {st->theta_plus, st->theta_minus};
    }
    if (const auto* cg = std::get_if<Cgmy>(&model.kind())) {
        return {cg->C / cg->Y, cg->C / cg->Y};
    }
    // Custom densities: evaluate the ratio deep in the asymptotic range.
    const double beta = 1e-9 * model.jump_bound();
    return {std::pow(beta, alpha) * tail_theta(model, beta, Side::plus),
            std::pow(beta, alpha) * tail_theta(model, beta, Side::minus)};
}

inline CaseParams make_case_params(const LevyModel& model, Regime regime, double alpha, int n, int m) {
    const RateCutoff rc = rate_and_cutoff(regime, n, m, alpha);
    CaseParams c;
    c.case_id = regime;
    c.alpha = alpha;
    c.u_nm = rc.u_nm;
    c.beta_n = rc.beta_n;
    c.beta_clamped = rc.clamped;
    c.lambda_nm = tail_theta(model, rc.beta_n) / (static_cast<double>(n) * m);
    if (regime == Regime::C1 || regime == Regime::C2) {
        c.d_const = small_jump_drift_constant(model);
    }
    const auto [tp, tm] = h2_constants(model, alpha);
    c.theta_plus = tp;
    c.theta_minus = tm;
    return c;
}

}  // namespace mlevy
