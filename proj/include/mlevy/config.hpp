#pragma once

// Experiment configuration: a JSON document with nested sections. Unknown
// keys anywhere are rejected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "mlevy/errors.hpp"
#include "mlevy/euler.hpp"
#include "mlevy/levy_measure.hpp"
#include "mlevy/path_engine.hpp"
#include "mlevy/scheme_params.hpp"

namespace mlevy {

struct ModelSpec {
    std::string kind = "two_sided_stable";  // or "cgmy"
    double alpha = 0.5;                     // stable index (Y for cgmy)
    double theta_plus = 1.0;
    double theta_minus = 1.0;
    double C = 1.0;
    double G = 1.0;
    double M = 1.0;
    double p = 1.0;
    double b = 0.0;

    bool operator==(const ModelSpec&) const = default;

    LevyModel build() const {
        if (kind == "two_sided_stable") {
            return LevyModel::two_sided_stable(alpha, theta_plus, theta_minus, p, b);
        }
        if (kind == "cgmy") {
            return LevyModel::cgmy(C, G, M, alpha, p, b);
        }
        throw ConfigError("unknown model kind '" + kind + "'");
    }
};

struct CoefficientSpec {
    std::string kind = "smooth_bump";  // constant | linear | smooth_bump
    double c = 1.0;
    double slope = 1.0;
    double intercept = 0.0;
    double center = 0.0;
    double width = 2.0;
    double height = 1.0;
    double x0 = 0.5;

    bool operator==(const CoefficientSpec&) const = default;

    Coefficient build() const {
        if (kind == "constant") {
            return Coefficient::constant(c);
        }
        if (kind == "linear") {
            return Coefficient::linear(slope, intercept);
        }
        if (kind == "smooth_bump") {
            return Coefficient::smooth_bump(center, width, height);
        }
        throw ConfigError("unknown coefficient kind '" + kind + "'");
    }
};

struct ExperimentConfig {
    ModelSpec model;
    std::string case_id = "auto";
    std::vector<int> n_levels{16, 32, 64, 128, 256, 512};
    int m = 2;
    std::int64_t paths = 1000;
    std::uint64_t seed = 1;
    SmallJumpMode small_jump_mode = SmallJumpMode::gaussian_remainder;
    double sim_truncation = 0.0;  // 0: per-level cutoff beta_n
    CoefficientSpec coefficient;
    std::int64_t limit_samples = 1000;
    std::int64_t limit_n_ref = 1 << 14;
    double limit_beta_floor = 0.0;  // 0: cutoff of the largest level
    std::string outputs = "out";
    bool emit_paths = false;

    bool operator==(const ExperimentConfig&) const = default;

    void validate() const {
        if (n_levels.empty()) {
            throw ConfigError("n_levels must not be empty");
        }
        for (std::size_t k = 0; k < n_levels.size(); ++k) {
            if (n_levels[k] < 3) {
                throw ConfigError("every level n must be >= 3");
            }
            if (k > 0 && n_levels[k] <= n_levels[k - 1]) {
                throw ConfigError("n_levels must be strictly ascending");
            }
        }
        if (m < 2) {
            throw ConfigError("m must be >= 2");
        }
        if (paths < 1 || limit_samples < 1) {
            throw ConfigError("paths and limit_samples must be >= 1");
        }
        if (limit_n_ref < 1) {
            throw ConfigError("limit.n_ref must be positive");
        }
        if (sim_truncation < 0.0 || limit_beta_floor < 0.0) {
            throw ConfigError("truncation overrides must be nonnegative");
        }
        if (case_id != "auto") {
            try {
                parse_regime(case_id);
            } catch (const DomainError& e) {
                throw ConfigError(e.what());
            }
        }
    }

    // Regime of the configured model (auto-classified unless overridden).
    Regime regime(const LevyModel& lm) const {
        if (case_id != "auto") {
            return parse_regime(case_id);
        }
        return classify_case(lm, model.alpha);
    }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) {
        return;
    }
    const json& v = j.at(key);
    bool ok = true;
    if constexpr (std::is_same_v<T, bool>) {
        ok = v.is_boolean();
    } else if constexpr (std::is_unsigned_v<T>) {
        ok = v.is_number_unsigned();
    } else if constexpr (std::is_integral_v<T>) {
        ok = v.is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
        ok = v.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
        ok = v.is_string();
    } else {
        ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); });
    }
    if (!ok) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": wrong type");
    }
    try {
        out = v.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

// Numbers that may be spelled "inf".
inline void read_extended(const json& j, const char* key, double& out, const std::string& where) {
    if (!j.contains(key)) {
        return;
    }
    const json& v = j.at(key);
    if (v.is_string() && v.get<std::string>() == "inf") {
        out = std::numeric_limits<double>::infinity();
        return;
    }
    read(j, key, out, where);
}

inline json number_or_inf(double x) { return std::isinf(x) ? json("inf") : json(x); }

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
    using detail::json;
    json model{{"kind", c.model.kind},
               {"alpha", c.model.alpha},
               {"theta_plus", c.model.theta_plus},
               {"theta_minus", c.model.theta_minus},
               {"C", c.model.C},
               {"G", c.model.G},
               {"M", c.model.M},
               {"p", detail::number_or_inf(c.model.p)},
               {"b", c.model.b}};
    json coef{{"kind", c.coefficient.kind},   {"c", c.coefficient.c},           {"slope", c.coefficient.slope},
              {"intercept", c.coefficient.intercept}, {"center", c.coefficient.center}, {"width", c.coefficient.width},
              {"height", c.coefficient.height}, {"x0", c.coefficient.x0}};
    return json{{"model", model},
                {"case", c.case_id},
                {"n_levels", c.n_levels},
                {"m", c.m},
                {"paths", c.paths},
                {"seed", c.seed},
                {"small_jump_mode", std::string(mode_name(c.small_jump_mode))},
                {"sim_truncation", c.sim_truncation},
                {"coefficient", coef},
                {"limit_samples", c.limit_samples},
                {"limit", json{{"n_ref", c.limit_n_ref}, {"beta_floor", c.limit_beta_floor}}},
                {"outputs", c.outputs},
                {"emit_paths", c.emit_paths}};
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using detail::check_keys;
    using detail::read;
    ExperimentConfig c;
    check_keys(j,
               {"model", "case", "n_levels", "m", "paths", "seed", "small_jump_mode", "sim_truncation", "coefficient",
                "limit_samples", "limit", "outputs", "emit_paths"},
               "config");
    if (j.contains("model")) {
        const auto& mj = j.at("model");
        check_keys(mj, {"kind", "alpha", "theta_plus", "theta_minus", "C", "G", "M", "p", "b"}, "model");
        read(mj, "kind", c.model.kind, "model");
        read(mj, "alpha", c.model.alpha, "model");
        read(mj, "theta_plus", c.model.theta_plus, "model");
        read(mj, "theta_minus", c.model.theta_minus, "model");
        read(mj, "C", c.model.C, "model");
        read(mj, "G", c.model.G, "model");
        read(mj, "M", c.model.M, "model");
        detail::read_extended(mj, "p", c.model.p, "model");
        read(mj, "b", c.model.b, "model");
        if (c.model.kind != "two_sided_stable" && c.model.kind != "cgmy") {
            throw ConfigError("unknown model kind '" + c.model.kind + "'");
        }
    }
    read(j, "case", c.case_id, "config");
    read(j, "n_levels", c.n_levels, "config");
    read(j, "m", c.m, "config");
    read(j, "paths", c.paths, "config");
    read(j, "seed", c.seed, "config");
    if (j.contains("small_jump_mode")) {
        std::string s;
        read(j, "small_jump_mode", s, "config");
        try {
            c.small_jump_mode = parse_mode(s);
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    read(j, "sim_truncation", c.sim_truncation, "config");
    if (j.contains("coefficient")) {
        const auto& fj = j.at("coefficient");
        check_keys(fj, {"kind", "c", "slope", "intercept", "center", "width", "height", "x0"}, "coefficient");
        read(fj, "kind", c.coefficient.kind, "coefficient");
        read(fj, "c", c.coefficient.c, "coefficient");
        read(fj, "slope", c.coefficient.slope, "coefficient");
        read(fj, "intercept", c.coefficient.intercept, "coefficient");
        read(fj, "center", c.coefficient.center, "coefficient");
        read(fj, "width", c.coefficient.width, "coefficient");
        read(fj, "height", c.coefficient.height, "coefficient");
        read(fj, "x0", c.coefficient.x0, "coefficient");
        if (c.coefficient.kind != "constant" && c.coefficient.kind != "linear" && c.coefficient.kind != "smooth_bump") {
            throw ConfigError("unknown coefficient kind '" + c.coefficient.kind + "'");
        }
    }
    read(j, "limit_samples", c.limit_samples, "config");
    if (j.contains("limit")) {
        const auto& lj = j.at("limit");
        check_keys(lj, {"n_ref", "beta_floor"}, "limit");
        read(lj, "n_ref", c.limit_n_ref, "limit");
        read(lj, "beta_floor", c.limit_beta_floor, "limit");
    }
    read(j, "outputs", c.outputs, "config");
    read(j, "emit_paths", c.emit_paths, "config");
    c.validate();
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline std::string emit_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

inline ExperimentConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open config file '" + file + "'");
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

}  // namespace mlevy
