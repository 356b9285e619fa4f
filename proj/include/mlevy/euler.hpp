#pragma once

// Coupled continuous Euler schemes X^n and X^{nm} on one Lévy path, the
// multilevel error U^{n,m} = X^n_{eta_nm} - X^{nm}_{eta_nm}, and the
// Z^{n,m} term of its pathwise decomposition.
//
// Integrands are frozen at the left node of every cell: jumps inside a
// cell move the increment, never the integrand of that cell.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "mlevy/errors.hpp"
#include "mlevy/path_engine.hpp"

namespace mlevy {

// Coefficient f of dX = f(X_-) dY together with f', f'', f'''.
class Coefficient {
  public:
    struct Constant {
        double c;
    };
    struct Linear {
        double slope;
        double intercept;
    };
    // height * (1 - s^2)^4 with s = (x - center) / width on |s| < 1, zero
    // outside: C^3 with compact support.
    struct SmoothBump {
        double center;
        double width;
        double height;
    };
    struct Custom {
        std::function<double(double)> f, f1, f2, f3;
        double lipschitz;
    };
    using Kind = std::variant<Constant, Linear, SmoothBump, Custom>;

    static Coefficient constant(double c) { return Coefficient(Constant{c}); }
    static Coefficient linear(double slope = 1.0, double intercept = 0.0) {
        return Coefficient(Linear{slope, intercept});
    }
    static Coefficient smooth_bump(double center, double width, double height) {
        if (!(width > 0.0)) {
            throw DomainError("bump width must be positive");
        }
        return Coefficient(SmoothBump{center, width, height});
    }
    static Coefficient custom(std::function<double(double)> f, std::function<double(double)> f1,
                              std::function<double(double)> f2, std::function<double(double)> f3, double lipschitz) {
        return Coefficient(Custom{std::move(f), std::move(f1), std::move(f2), std::move(f3), lipschitz});
    }

    const Kind& kind() const noexcept { return kind_; }
    bool is_constant() const noexcept { return std::holds_alternative<Constant>(kind_); }

    // Derivative of order 0..3.
    double derivative(int order, double x) const {
        return std::visit(
            [&](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Constant>) {
                    return order == 0 ? k.c : 0.0;
                } else if constexpr (std::is_same_v<K, Linear>) {
                    return order == 0 ? k.slope * x + k.intercept : (order == 1 ? k.slope : 0.0);
                } else if constexpr (std::is_same_v<K, SmoothBump>) {
                    const double s = (x - k.center) / k.width;
                    if (std::abs(s) >= 1.0) {
                        return 0.0;
                    }
                    const double q = 1.0 - s * s;
                    const double w = k.width;
                    switch (order) {
                        case 0:
                            return k.height * q * q * q * q;
                        case 1:
                            return -8.0 * k.height * s * q * q * q / w;
                        case 2:
                            return k.height * (48.0 * s * s * q * q - 8.0 * q * q * q) / (w * w);
                        default:
                            return k.height * (144.0 * s * q * q - 192.0 * s * s * s * q) / (w * w * w);
                    }
                } else {
                    switch (order) {
                        case 0:
                            return k.f(x);
                        case 1:
                            return k.f1(x);
                        case 2:
                            return k.f2(x);
                        default:
                            return k.f3(x);
                    }
                }
            },
            kind_);
    }

    double operator()(double x) const { return derivative(0, x); }
    double d1(double x) const { return derivative(1, x); }
    double ff1(double x) const { return derivative(0, x) * derivative(1, x); }

    double lipschitz_const() const {
        return std::visit(
            [](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Constant>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<K, Linear>) {
                    return std::abs(k.slope);
                } else if constexpr (std::is_same_v<K, SmoothBump>) {
                    // max |d/ds (1-s^2)^4| = 8 s (1-s^2)^3 at s = 1/sqrt(7)
                    const double s = 1.0 / std::sqrt(7.0);
                    const double q = 1.0 - s * s;
                    return 8.0 * std::abs(k.height) * s * q * q * q / k.width;
                } else {
                    return k.lipschitz;
                }
            },
            kind_);
    }

    // G(x, y) = f(x + y f(x)) - f(x).
    double G(double x, double y) const {
        const double fx = (*this)(x);
        return (*this)(x + y * fx) - fx;
    }

  private:
    explicit Coefficient(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

// X^{nm} at every fine node.
inline std::vector<double> euler_fine(const Coefficient& f, const FineGridPath& path, double x0) {
    std::vector<double> x(path.y_incr.size() + 1);
    x[0] = x0;
    for (std::size_t c = 0; c < path.y_incr.size(); ++c) {
        x[c + 1] = x[c] + f(x[c]) * path.y_incr[c];
    }
    return x;
}

// X^n at every fine node: updated at coarse nodes, interpolated in between
// as X^n_{t_i^1} + f(X^n_{t_i^1}) (Y_{t_i^k} - Y_{t_i^1}).
inline std::vector<double> euler_coarse_interp(const Coefficient& f, const FineGridPath& path, double x0) {
    const int n = path.grid.n;
    const int m = path.grid.m;
    std::vector<double> x(path.y_incr.size() + 1);
    x[0] = x0;
    for (int i = 0; i < n; ++i) {
        const double fa = f(x[static_cast<std::size_t>(i) * m]);
        for (int k = 0; k < m; ++k) {
            const std::size_t c = static_cast<std::size_t>(i) * m + k;
            x[c + 1] = x[c] + fa * path.y_incr[c];
        }
    }
    return x;
}

// Z^{n,m} at coarse nodes:
//   sum over fine cells (i,k) of G(X^n_{t_i^1}, Y_{t_i^k} - Y_{t_i^1}) (Y_{t_i^{k+1}} - Y_{t_i^k}).
inline std::vector<double> compute_z_diag(const Coefficient& f, const FineGridPath& path,
                                          const std::vector<double>& x_coarse) {
    const int n = path.grid.n;
    const int m = path.grid.m;
    std::vector<double> z(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const double anchor = x_coarse[static_cast<std::size_t>(i) * m];
        double partial = 0.0;
        double acc = 0.0;
        for (int k = 0; k < m; ++k) {
            const std::size_t c = static_cast<std::size_t>(i) * m + k;
            acc += f.G(anchor, partial) * path.y_incr[c];
            partial += path.y_incr[c];
        }
        z[i + 1] = z[i] + acc;
    }
    return z;
}

struct CoupledEulerResult {
    std::vector<double> x_coarse;  // X^n at fine nodes
    std::vector<double> x_fine;    // X^{nm} at fine nodes
    std::vector<double> u_err;     // U^{n,m} at fine nodes
    std::vector<double> z_diag;    // Z^{n,m} at coarse nodes
    double normalized_terminal = 0.0;  // u_{n,m} U^{n,m}_1

    double terminal_error() const noexcept { return u_err.back(); }
};

inline CoupledEulerResult multilevel_error(const Coefficient& f, const FineGridPath& path, double x0) {
    CoupledEulerResult r;
    r.x_coarse = euler_coarse_interp(f, path, x0);
    r.x_fine = euler_fine(f, path, x0);
    r.u_err.resize(r.x_fine.size());
    for (std::size_t j = 0; j < r.u_err.size(); ++j) {
        r.u_err[j] = r.x_coarse[j] - r.x_fine[j];
    }
    r.z_diag = compute_z_diag(f, path, r.x_coarse);
    r.normalized_terminal = path.params.u_nm * r.u_err.back();
    return r;
}

// Terminal error only, without storing the node vectors.
inline double terminal_multilevel_error(const Coefficient& f, const FineGridPath& path, double x0) {
    const int n = path.grid.n;
    const int m = path.grid.m;
    double anchor = x0;
    double xf = x0;
    for (int i = 0; i < n; ++i) {
        const double fa = f(anchor);
        for (int k = 0; k < m; ++k) {
            const double inc = path.y_incr[static_cast<std::size_t>(i) * m + k];
            anchor += fa * inc;
            xf += f(xf) * inc;
        }
    }
    return anchor - xf;
}

struct DecompositionCheck {
    double max_abs_deviation = 0.0;
    double max_rel_deviation = 0.0;  // relative to the summed magnitude of all terms, with U as X^n - X^{nm}
};

// U^{n,m}_{t_i^1} = sum [f(X^{nm} + U) - f(X^{nm})] dY - Z^{n,m}_{t_i^1} at
// every coarse node.
inline DecompositionCheck decomposition_identity(const Coefficient& f, const FineGridPath& path,
                                                 const CoupledEulerResult& r) {
    const int n = path.grid.n;
    const int m = path.grid.m;
    DecompositionCheck out;
    double lead = 0.0;
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < m; ++k) {
            const std::size_t c = static_cast<std::size_t>(i) * m + k;
            const double term = (f(r.x_fine[c] + r.u_err[c]) - f(r.x_fine[c])) * path.y_incr[c];
            lead += term;
            scale += std::abs(term);
        }
        const std::size_t node = static_cast<std::size_t>(i + 1) * m;
        const double rhs = lead - r.z_diag[i + 1];
        const double dev = std::abs(r.u_err[node] - rhs);
        const double mag = scale + std::abs(r.z_diag[i + 1]) + std::abs(r.x_coarse[node]) + std::abs(r.x_fine[node]);
        out.max_abs_deviation = std::max(out.max_abs_deviation, dev);
        if (mag > 0.0) {
            out.max_rel_deviation = std::max(out.max_rel_deviation, dev / mag);
        }
    }
    return out;
}

// Path-wise Gronwall bound B with |U_j| <= B_j on every fine node:
//   B_{j+1} = B_j (1 + L|dY_j|) + L |f(X^n_{t_i^1})| |Y_{t_i^k} - Y_{t_i^1}| |dY_j|.
inline std::vector<double> gronwall_bound(const Coefficient& f, const FineGridPath& path,
                                          const CoupledEulerResult& r) {
    const int n = path.grid.n;
    const int m = path.grid.m;
    const double L = f.lipschitz_const();
    std::vector<double> b(r.u_err.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        const double fa = std::abs(f(r.x_coarse[static_cast<std::size_t>(i) * m]));
        double partial = 0.0;
        for (int k = 0; k < m; ++k) {
            const std::size_t c = static_cast<std::size_t>(i) * m + k;
            const double ady = std::abs(path.y_incr[c]);
            b[c + 1] = b[c] * (1.0 + L * ady) + L * fa * std::abs(partial) * ady;
            partial += path.y_incr[c];
        }
    }
    return b;
}

}  // namespace mlevy
