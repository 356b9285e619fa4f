#pragma once

// Draws from the limit of u_{n,m} U^{n,m}: the linear equation
//   U_t = \int_0^t f'(X_{s-}) U_{s-} dY_s - Z_t
// driven by a high-resolution reference path, with the regime-specific Z:
//   C1       jump-mark series plus (d^2/2) \int f f'(X_{s-}) ds
//   C2/C4/C5 \int f f'(X_{s-}) dV_s, V an independent stable process
//   C3       -(theta'^2/4) \int f f'(X_{s-}) ds
// The true X is replaced by a jump-adapted Euler proxy on the reference mesh.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "mlevy/euler.hpp"
#include "mlevy/path_engine.hpp"
#include "mlevy/rng.hpp"
#include "mlevy/scheme_params.hpp"
#include "mlevy/stable.hpp"

namespace mlevy {

// Step of the reference track: a continuous stretch of length dt with
// increment dy, or (dt = 0, jump = true) a single big jump of size dy.
struct TrackStep {
    double dt;
    double dy;
    bool jump;
    std::int64_t cell;
};

struct ReferenceSolution {
    std::vector<TrackStep> steps;
    std::vector<double> x_before;  // X before each step; back() is X_1
    std::vector<std::size_t> cell_first_step;  // size cells + 1
    std::vector<double> x_nodes;   // X at reference nodes
};

// Jump-adapted Euler proxy for X on a reference path. The continuous part
// of each cell is spread linearly in time between the cell's jumps.
inline ReferenceSolution x_reference(const Coefficient& f, const FineGridPath& path, double x0) {
    ReferenceSolution r;
    const std::int64_t cells = path.cells();
    const double h = path.grid.cell_length();
    r.steps.reserve(static_cast<std::size_t>(cells) + 2 * path.jumps.size());
    r.cell_first_step.resize(cells + 1);
    for (std::int64_t c = 0; c < cells; ++c) {
        r.cell_first_step[c] = r.steps.size();
        const auto jumps = path.cell_jumps(c);
        double cont = path.y_incr[c];
        for (const Jump& j : jumps) {
            cont -= j.size;
        }
        double t = path.grid.time(c);
        const double t_end = path.grid.time(c + 1);
        for (const Jump& j : jumps) {
            const double len = j.time - t;
            r.steps.push_back({len, cont * len / h, false, c});
            r.steps.push_back({0.0, j.size, true, c});
            t = j.time;
        }
        const double len = t_end - t;
        r.steps.push_back({len, cont * len / h, false, c});
    }
    r.cell_first_step[cells] = r.steps.size();

    r.x_before.resize(r.steps.size() + 1);
    r.x_before[0] = x0;
    for (std::size_t s = 0; s < r.steps.size(); ++s) {
        r.x_before[s + 1] = r.x_before[s] + f(r.x_before[s]) * r.steps[s].dy;
    }
    r.x_nodes.resize(cells + 1);
    for (std::int64_t c = 0; c <= cells; ++c) {
        r.x_nodes[c] = r.x_before[r.cell_first_step[c]];
    }
    return r;
}

// floor(m u) / (m - 1): the C1 jump weight, which tends to u as m grows.
inline double mark_weight(double upsilon, int m) {
    return std::floor(m * upsilon) / (m - 1.0);
}

// dZ per track step for C1.
inline std::vector<double> sample_z_case1(const Coefficient& f, const ReferenceSolution& ref,
                                          const std::vector<double>& marks, double d_const, int m) {
    std::vector<double> dz(ref.steps.size(), 0.0);
    std::size_t jump_index = 0;
    for (std::size_t s = 0; s < ref.steps.size(); ++s) {
        const TrackStep& st = ref.steps[s];
        const double xm = ref.x_before[s];
        if (st.jump) {
            const double q = mark_weight(marks.at(jump_index++), m);
            const double xp = ref.x_before[s + 1];
            dz[s] = d_const * (f.ff1(xm) * st.dy * q + (f(xp) - f(xm)) * (1.0 - q));
        } else {
            dz[s] = 0.5 * d_const * d_const * f.ff1(xm) * st.dt;
        }
    }
    return dz;
}

// Independent increments of V over each reference cell.
inline std::vector<double> sample_stable_v(const StableLaw& law, std::int64_t cells, const RandomStream& stream) {
    std::vector<double> v(cells);
    const double dt = 1.0 / static_cast<double>(cells);
    for (std::int64_t c = 0; c < cells; ++c) {
        auto eng = stream.cell(static_cast<std::uint32_t>(c));
        v[c] = law.sample(eng, dt);
    }
    return v;
}

// Stable law of V for C2/C4 (density theta^2 alpha/4 |x|^{-1-alpha}) and
// C5 (density alpha/2 [(theta_+^2 + theta_-^2) 1{x>0} + 2 theta_+ theta_- 1{x<0}] |x|^{-1-alpha}).
inline StableLaw limit_driver_law(const CaseParams& c) {
    switch (c.case_id) {
        case Regime::C2:
        case Regime::C4: {
            const double k = c.theta() * c.theta() * c.alpha / 4.0;
            return stable_from_levy_density(c.alpha, k, k);
        }
        case Regime::C5: {
            const double tp = c.theta_plus;
            const double tm = c.theta_minus;
            return stable_from_levy_density(c.alpha, 0.5 * c.alpha * (tp * tp + tm * tm), c.alpha * tp * tm);
        }
        default:
            throw DomainError("regime has no stable limit driver");
    }
}

// dZ per step for the stable regimes: f f'(X at the cell's left node) dV_cell,
// booked on the last step of the cell.
inline std::vector<double> sample_z_case_stable(const Coefficient& f, const std::vector<double>& v_incr,
                                                const ReferenceSolution& ref) {
    std::vector<double> dz(ref.steps.size(), 0.0);
    const std::size_t cells = ref.cell_first_step.size() - 1;
    for (std::size_t c = 0; c < cells; ++c) {
        dz[ref.cell_first_step[c + 1] - 1] = f.ff1(ref.x_nodes[c]) * v_incr[c];
    }
    return dz;
}

inline std::vector<double> sample_z_case3(const Coefficient& f, const ReferenceSolution& ref, double theta_prime) {
    std::vector<double> dz(ref.steps.size(), 0.0);
    const double k = -theta_prime * theta_prime / 4.0;
    for (std::size_t s = 0; s < ref.steps.size(); ++s) {
        if (!ref.steps[s].jump) {
            dz[s] = k * f.ff1(ref.x_before[s]) * ref.steps[s].dt;
        }
    }
    return dz;
}

struct LimitPath {
    std::vector<double> z;  // Z before each step; back() is Z_1
    std::vector<double> u;  // U before each step; back() is U_1
};

// U_{s+1} = U_s + f'(X_s) U_s dY_s - dZ_s, U_0 = 0.
inline LimitPath solve_limit_u(const Coefficient& f, const ReferenceSolution& ref, const std::vector<double>& dz) {
    LimitPath p;
    p.z.resize(ref.steps.size() + 1);
    p.u.resize(ref.steps.size() + 1);
    p.z[0] = 0.0;
    p.u[0] = 0.0;
    for (std::size_t s = 0; s < ref.steps.size(); ++s) {
        p.z[s + 1] = p.z[s] + dz[s];
        p.u[s + 1] = p.u[s] + f.d1(ref.x_before[s]) * p.u[s] * ref.steps[s].dy - dz[s];
    }
    return p;
}

struct LimitSample {
    std::vector<Jump> y_marks;
    std::vector<double> marks;     // Upsilon_j, one per jump (C1 only)
    std::vector<double> z_path;    // Z at reference nodes
    double z_terminal = 0.0;
    double u_terminal = 0.0;
    CaseParams params;
};

struct LimitOptions {
    std::int64_t n_ref = 1 << 14;
    // Truncation of the reference Y; 0 means the case cutoff beta_n.
    double beta_floor = 0.0;
    SmallJumpMode mode = SmallJumpMode::gaussian_remainder;
    int m = 2;
};

class LimitSampler {
  public:
    LimitSampler(const LevyModel& model, const CaseParams& params, const Coefficient& f, double x0,
                 const LimitOptions& opt, std::uint64_t seed)
        : params_(params),
          f_(f),
          x0_(x0),
          opt_(opt),
          path_family_(seed, "limit"),
          mark_family_(seed, "mark"),
          v_family_(seed, "V"),
          paths_(model, params, GridSpec(static_cast<int>(opt.n_ref), 1),
                 PathOptions{opt.mode, opt.beta_floor > 0.0 ? opt.beta_floor : params.beta_n}) {
        if (opt.m < 2) {
            throw DomainError("limit law needs m >= 2");
        }
        if (params.case_id == Regime::C2 || params.case_id == Regime::C4 || params.case_id == Regime::C5) {
            law_ = limit_driver_law(params);
        }
    }

    const PathSampler& path_sampler() const noexcept { return paths_; }
    const std::optional<StableLaw>& driver_law() const noexcept { return law_; }

    FineGridPath reference_path(std::uint64_t index) const { return paths_.sample(RandomStream(path_family_, index)); }

    LimitSample sample(std::uint64_t index) const { return solve_on_path(reference_path(index), index); }

    // V increments over the reference cells of draw `index` (stable regimes).
    std::vector<double> driver_increments(std::uint64_t index) const {
        if (!law_) {
            throw DomainError("regime has no stable limit driver");
        }
        return sample_stable_v(*law_, paths_.grid().cells(), RandomStream(v_family_, index));
    }

    // The limit functional on a given reference path; the extra randomness
    // (marks, V) is keyed by the same index.
    LimitSample solve_on_path(const FineGridPath& path, std::uint64_t index) const {
        LimitSample out;
        out.params = params_;
        const ReferenceSolution ref = x_reference(f_, path, x0_);
        std::vector<double> dz;
        switch (params_.case_id) {
            case Regime::C1: {
                auto eng = RandomStream(mark_family_, index).engine();
                out.marks.resize(path.jumps.size());
                for (double& u : out.marks) {
                    u = uniform_open01(eng);
                }
                dz = sample_z_case1(f_, ref, out.marks, params_.d_const, opt_.m);
                break;
            }
            case Regime::C3:
                dz = sample_z_case3(f_, ref, params_.theta_prime());
                break;
            default: {
                const auto v = driver_increments(index);
                dz = sample_z_case_stable(f_, v, ref);
                break;
            }
        }
        const LimitPath lp = solve_limit_u(f_, ref, dz);
        out.y_marks = path.jumps;
        out.z_path.resize(ref.cell_first_step.size());
        for (std::size_t c = 0; c < ref.cell_first_step.size(); ++c) {
            out.z_path[c] = lp.z[ref.cell_first_step[c]];
        }
        out.z_terminal = lp.z.back();
        out.u_terminal = lp.u.back();
        return out;
    }

  private:
    CaseParams params_;
    Coefficient f_;
    double x0_;
    LimitOptions opt_;
    StreamFamily path_family_;
    StreamFamily mark_family_;
    StreamFamily v_family_;
    PathSampler paths_;
    std::optional<StableLaw> law_;
};

}  // namespace mlevy
