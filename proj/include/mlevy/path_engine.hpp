#pragma once

// One realisation of the driving Lévy path on the fine grid, built from
// the decomposition Y = A^beta + M^beta + N^beta: deterministic drift
// d(beta) t, the compensated jumps of size <= beta, and the compound
// Poisson big jumps, whose times and sizes are retained.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlevy/errors.hpp"
#include "mlevy/levy_measure.hpp"
#include "mlevy/rng.hpp"
#include "mlevy/scheme_params.hpp"

namespace mlevy {

enum class SmallJumpMode {
    gaussian_remainder,  // M^beta increment ~ N(0, c(beta) dt)
    layered_exact,       // compensated jumps in (eps, beta] plus N(0, c(eps) dt)
    drop,                // M^beta = 0
};

inline std::string_view mode_name(SmallJumpMode m) noexcept {
    switch (m) {
        case SmallJumpMode::gaussian_remainder:
            return "gaussian-remainder";
        case SmallJumpMode::layered_exact:
            return "layered-exact";
        case SmallJumpMode::drop:
            return "drop";
    }
    return "?";
}

inline SmallJumpMode parse_mode(std::string_view s) {
    for (auto m : {SmallJumpMode::gaussian_remainder, SmallJumpMode::layered_exact, SmallJumpMode::drop}) {
        if (mode_name(m) == s) {
            return m;
        }
    }
    throw DomainError("unknown small-jump mode '" + std::string(s) + "'");
}

struct PathOptions {
    SmallJumpMode mode = SmallJumpMode::gaussian_remainder;
    // Big/small split used for simulation; 0 means the case cutoff beta_n.
    double truncation = 0.0;
    // eps_sim / beta for the layered mode.
    double layer_ratio = 1.0 / 32.0;
};

struct Jump {
    double time;
    double size;
};

struct FineGridPath {
    GridSpec grid;
    CaseParams params;
    double truncation = 1.0;
    double lambda_cell = 0.0;  // expected big-jump count per fine cell
    SmallJumpMode mode = SmallJumpMode::gaussian_remainder;
    double drift_incr = 0.0;
    std::vector<Jump> jumps;                 // all big jumps, ordered by time
    std::vector<std::uint32_t> jump_offset;  // CSR offsets, size cells + 1
    std::vector<double> small_mart_incr;
    std::vector<double> y_incr;
    std::vector<double> y_at_nodes;

    std::int64_t cells() const noexcept { return grid.cells(); }

    std::span<const Jump> cell_jumps(std::int64_t c) const noexcept {
        return std::span<const Jump>(jumps).subspan(jump_offset[c], jump_offset[c + 1] - jump_offset[c]);
    }
    std::uint32_t jump_count(std::int64_t c) const noexcept { return jump_offset[c + 1] - jump_offset[c]; }

    double terminal() const noexcept { return y_at_nodes.back(); }

    // A path given only by its fine increments (no jump marks).
    static FineGridPath from_increments(const GridSpec& grid, std::span<const double> incr) {
        if (static_cast<std::int64_t>(incr.size()) != grid.cells()) {
            throw DomainError("increment count does not match the grid");
        }
        FineGridPath p;
        p.grid = grid;
        p.jump_offset.assign(incr.size() + 1, 0);
        p.small_mart_incr.assign(incr.size(), 0.0);
        p.y_incr.assign(incr.begin(), incr.end());
        p.finish_nodes();
        return p;
    }

    void finish_nodes() {
        y_at_nodes.resize(y_incr.size() + 1);
        y_at_nodes[0] = 0.0;
        for (std::size_t c = 0; c < y_incr.size(); ++c) {
            y_at_nodes[c + 1] = y_at_nodes[c] + y_incr[c];
        }
    }
};

// d(beta) = b' - d'(beta) = b + \int_{|x|>1} x F - \int_{|x|>beta} x F.
inline double truncated_drift(const LevyModel& model, double beta) {
    if (model.is_symmetric()) {
        return model.drift_b();
    }
    if (beta < 1.0) {
        return model.drift_b() - band_first_moment(model, beta, 1.0);
    }
    return model.drift_b() + band_first_moment(model, 1.0, beta);
}

namespace detail {

// Poisson by sequential inversion; exact for the small means used per cell.
template <class Engine>
std::uint32_t sample_poisson(Engine& eng, double lambda) {
    if (!(lambda > 0.0)) {
        return 0;
    }
    if (lambda > 30.0) {
        std::poisson_distribution<std::uint32_t> dist(lambda);
        return dist(eng);
    }
    const double u = uniform_open01(eng);
    double p = std::exp(-lambda);
    double cdf = p;
    std::uint32_t k = 0;
    while (u > cdf && k < 1000) {
        ++k;
        p *= lambda / k;
        cdf += p;
    }
    return k;
}

template <class Engine>
double sample_normal(Engine& eng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(eng);
}

}  // namespace detail

// Per-(model, case, grid, options) precomputation; sample() is then pure
// in the supplied stream and safe to call concurrently.
class PathSampler {
  public:
    PathSampler(const LevyModel& model, const CaseParams& params, const GridSpec& grid, const PathOptions& opt = {})
        : model_(&model), params_(params), grid_(grid), opt_(opt) {
        beta_ = opt.truncation > 0.0 ? opt.truncation : params.beta_n;
        const double dt = grid.cell_length();
        drift_incr_ = truncated_drift(model, beta_) * dt;
        if (beta_ < model.jump_bound()) {
            big_.emplace(model, beta_);
            lambda_ = big_->mass() * dt;
        }
        switch (opt.mode) {
            case SmallJumpMode::gaussian_remainder:
                small_sd_ = std::sqrt(truncated_second_moment(model, beta_) * dt);
                break;
            case SmallJumpMode::layered_exact: {
                const double eps = beta_ * opt.layer_ratio;
                const double top = std::min(beta_, model.jump_bound());
                small_sd_ = std::sqrt(truncated_second_moment(model, eps) * dt);
                if (eps < top) {
                    band_.emplace(model, eps, top);
                    band_lambda_ = band_->mass() * dt;
                    band_mean_ = band_first_moment(model, eps, top) * dt;
                }
                break;
            }
            case SmallJumpMode::drop:
                break;
        }
    }

    double truncation() const noexcept { return beta_; }
    double lambda_cell() const noexcept { return lambda_; }
    double drift_incr() const noexcept { return drift_incr_; }
    const GridSpec& grid() const noexcept { return grid_; }

    FineGridPath sample(const RandomStream& stream) const {
        const std::int64_t cells = grid_.cells();
        FineGridPath path;
        path.grid = grid_;
        path.params = params_;
        path.truncation = beta_;
        path.lambda_cell = lambda_;
        path.mode = opt_.mode;
        path.drift_incr = drift_incr_;
        path.jump_offset.resize(cells + 1);
        path.small_mart_incr.resize(cells);
        path.y_incr.resize(cells);
        const RandomStream small_stream = stream.sibling("small");
        const double dt = grid_.cell_length();
        for (std::int64_t c = 0; c < cells; ++c) {
            path.jump_offset[c] = static_cast<std::uint32_t>(path.jumps.size());
            double incr = drift_incr_;
            if (big_) {
                auto eng = stream.cell(static_cast<std::uint32_t>(c));
                const std::uint32_t k = detail::sample_poisson(eng, lambda_);
                const std::size_t first = path.jumps.size();
                const double t0 = grid_.time(c);
                for (std::uint32_t j = 0; j < k; ++j) {
                    path.jumps.push_back({t0 + dt * uniform_open01(eng), 0.0});
                }
                std::sort(path.jumps.begin() + static_cast<std::ptrdiff_t>(first), path.jumps.end(),
                          [](const Jump& a, const Jump& b) { return a.time < b.time; });
                for (std::size_t j = first; j < path.jumps.size(); ++j) {
                    path.jumps[j].size = (*big_)(eng);
                    incr += path.jumps[j].size;
                }
            }
            double small = 0.0;
            if (opt_.mode != SmallJumpMode::drop) {
                auto eng = small_stream.cell(static_cast<std::uint32_t>(c));
                if (band_) {
                    const std::uint32_t k = detail::sample_poisson(eng, band_lambda_);
                    for (std::uint32_t j = 0; j < k; ++j) {
                        small += (*band_)(eng);
                    }
                    small -= band_mean_;
                }
                if (small_sd_ > 0.0) {
                    small += small_sd_ * detail::sample_normal(eng);
                }
            }
            path.small_mart_incr[c] = small;
            path.y_incr[c] = incr + small;
        }
        path.jump_offset[cells] = static_cast<std::uint32_t>(path.jumps.size());
        path.finish_nodes();
        return path;
    }

  private:
    const LevyModel* model_;
    CaseParams params_;
    GridSpec grid_;
    PathOptions opt_;
    double beta_ = 1.0;
    double drift_incr_ = 0.0;
    double lambda_ = 0.0;
    double small_sd_ = 0.0;
    double band_lambda_ = 0.0;
    double band_mean_ = 0.0;
    std::optional<JumpSampler> big_;
    std::optional<JumpSampler> band_;
};

inline FineGridPath sample_path(const LevyModel& model, const CaseParams& params, const GridSpec& grid,
                                const PathOptions& opt, const RandomStream& stream) {
    if (!(params.beta_n > 0.0)) {
        throw DomainError("case cutoff beta_n must be positive");
    }
    return PathSampler(model, params, grid, opt).sample(stream);
}

// Y_{t_{i+1}^1} - Y_{t_i^1} for every coarse cell.
inline std::vector<double> coarse_increments(const FineGridPath& path) {
    const int n = path.grid.n;
    const int m = path.grid.m;
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) {
            s += path.y_incr[static_cast<std::size_t>(i) * m + k];
        }
        out[i] = s;
    }
    return out;
}

// Re-express a path on a coarser grid whose cell count divides the
// original one; jump marks are carried over, increments summed.
inline FineGridPath aggregate(const FineGridPath& path, const GridSpec& target) {
    const std::int64_t fine = path.cells();
    const std::int64_t cells = target.cells();
    if (cells <= 0 || fine % cells != 0) {
        throw DomainError("target grid must divide the path grid");
    }
    const std::int64_t factor = fine / cells;
    FineGridPath out;
    out.grid = target;
    out.params = path.params;
    out.truncation = path.truncation;
    out.lambda_cell = path.lambda_cell * static_cast<double>(factor);
    out.mode = path.mode;
    out.drift_incr = path.drift_incr * static_cast<double>(factor);
    out.jumps = path.jumps;
    out.jump_offset.resize(cells + 1);
    out.small_mart_incr.assign(cells, 0.0);
    out.y_incr.assign(cells, 0.0);
    for (std::int64_t c = 0; c < cells; ++c) {
        out.jump_offset[c] = path.jump_offset[c * factor];
        for (std::int64_t j = c * factor; j < (c + 1) * factor; ++j) {
            out.small_mart_incr[c] += path.small_mart_incr[j];
            out.y_incr[c] += path.y_incr[j];
        }
    }
    out.jump_offset[cells] = path.jump_offset[fine];
    out.finish_nodes();
    return out;
}

}  // namespace mlevy
