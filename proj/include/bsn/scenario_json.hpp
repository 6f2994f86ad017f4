#pragma once
// JSON scenario files. Parse errors carry the offending field path so the
// CLI can emit field-level diagnostics.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bsn/random.hpp"
#include "bsn/scenario.hpp"

namespace bsn {

struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_, const std::string& message)
        : std::runtime_error(message), field(std::move(field_)) {}
};

namespace detail {

using nlohmann::json;

inline const json& require_key(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError(path + key, "missing required field");
    return j.at(key);
}

inline double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

inline Vec2 as_vec2(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [x, y]");
    return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
}

inline Mat4 as_mat4(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 4) throw ConfigError(path, "expected a 4x4 matrix");
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.size() != 4) throw ConfigError(path, "expected a 4x4 matrix");
        for (int c = 0; c < 4; ++c)
            m.at(r, c) = as_number(row[static_cast<std::size_t>(c)],
                                   path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return m;
}

inline TrajectoryModel parse_motion(const json& j, double period) {
    const std::string path = "motion.";
    const std::string type = require_key(j, "type", path).get<std::string>();
    if (type == "constant_velocity") {
        return ConstantVelocity{as_vec2(require_key(j, "x0", path), path + "x0"),
                                as_vec2(require_key(j, "v", path), path + "v")};
    }
    if (type == "multi_leg") {
        MultiLeg ml;
        ml.x0 = as_vec2(require_key(j, "x0", path), path + "x0");
        const auto& legs = require_key(j, "legs", path);
        if (!legs.is_array() || legs.empty()) throw ConfigError(path + "legs", "expected a non-empty array");
        for (std::size_t i = 0; i < legs.size(); ++i) {
            const std::string lp = path + "legs[" + std::to_string(i) + "].";
            ml.legs.push_back({as_vec2(require_key(legs[i], "v", lp), lp + "v"),
                               as_number(require_key(legs[i], "end_time", lp), lp + "end_time")});
        }
        return ml;
    }
    if (type == "constant_acceleration") {
        return ConstantAcceleration{as_vec2(require_key(j, "x0", path), path + "x0"),
                                    as_vec2(require_key(j, "v0", path), path + "v0"),
                                    as_vec2(require_key(j, "a0", path), path + "a0")};
    }
    if (type == "random_walk") {
        GaussianRandomWalk walk;
        walk.x0 = as_vec2(require_key(j, "x0", path), path + "x0");
        walk.v0 = as_vec2(require_key(j, "v0", path), path + "v0");
        walk.F = j.contains("F") ? as_mat4(j.at("F"), path + "F") : Mat4::cv_transition(period);
        if (j.contains("Q")) {
            walk.Q = as_mat4(j.at("Q"), path + "Q");
        } else {
            const double qp = j.contains("q_pos") ? as_number(j.at("q_pos"), path + "q_pos") : 0.0;
            const double qv = j.contains("q_vel") ? as_number(j.at("q_vel"), path + "q_vel") : 0.0;
            walk.Q = Mat4::diag(qp, qp, qv, qv);
        }
        return walk;
    }
    throw ConfigError(path + "type", "unknown motion type: " + type);
}

inline EstimatorMethod parse_method(const std::string& s, const std::string& path) {
    if (s == "svm2d") return EstimatorMethod::Svm2d;
    if (s == "svm3d") return EstimatorMethod::Svm3d;
    if (s == "svm2p") return EstimatorMethod::Svm2Period;
    if (s == "ppr") return EstimatorMethod::Ppr;
    throw ConfigError(path, "unknown estimator: " + s + " (expected svm2d|svm3d|svm2p|ppr)");
}

} // namespace detail

struct LoadedScenario {
    ScenarioConfig config;
    bool seed_in_file = false;
    std::uint64_t config_hash = 0; // over the canonical file content
};

inline LoadedScenario parse_scenario(const std::string& text) {
    detail::json j;
    try {
        j = detail::json::parse(text);
    } catch (const detail::json::parse_error& e) {
        throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
    }

    LoadedScenario out;
    ScenarioConfig& cfg = out.config;

    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned())
            throw ConfigError("seed", "expected an unsigned integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
        out.seed_in_file = true;
    }

    const auto& jf = detail::require_key(j, "field", "");
    cfg.field.n = static_cast<std::size_t>(
        detail::as_number(detail::require_key(jf, "n", "field."), "field.n"));
    const auto& jb = detail::require_key(jf, "bounds", "field.");
    cfg.field.bounds.min = detail::as_vec2(detail::require_key(jb, "min", "field.bounds."),
                                           "field.bounds.min");
    cfg.field.bounds.max = detail::as_vec2(detail::require_key(jb, "max", "field.bounds."),
                                           "field.bounds.max");

    if (j.contains("observation")) {
        const auto& jo = j.at("observation");
        if (jo.contains("period")) cfg.observation.period = detail::as_number(jo.at("period"), "observation.period");
        if (jo.contains("periods"))
            cfg.observation.periods =
                static_cast<long>(detail::as_number(jo.at("periods"), "observation.periods"));
        if (jo.contains("flip_probability"))
            cfg.observation.flip_probability =
                detail::as_number(jo.at("flip_probability"), "observation.flip_probability");
    }

    cfg.motion = detail::parse_motion(detail::require_key(j, "motion", ""), cfg.observation.period);

    if (j.contains("estimator")) {
        const auto& je = j.at("estimator");
        if (je.contains("method"))
            cfg.estimator.method =
                detail::parse_method(je.at("method").get<std::string>(), "estimator.method");
        if (je.contains("C")) cfg.estimator.soft_margin_C = detail::as_number(je.at("C"), "estimator.C");
        if (je.contains("bandwidth"))
            cfg.estimator.bandwidth = detail::as_number(je.at("bandwidth"), "estimator.bandwidth");
        if (je.contains("kernel")) {
            const std::string k = je.at("kernel").get<std::string>();
            if (k == "gaussian") cfg.estimator.kernel = KernelType::Gaussian;
            else if (k == "epanechnikov") cfg.estimator.kernel = KernelType::Epanechnikov;
            else throw ConfigError("estimator.kernel", "expected gaussian|epanechnikov");
        }
        if (je.contains("direction_grid"))
            cfg.estimator.direction_grid =
                static_cast<int>(detail::as_number(je.at("direction_grid"), "estimator.direction_grid"));
        if (je.contains("window"))
            cfg.estimator.window =
                static_cast<std::size_t>(detail::as_number(je.at("window"), "estimator.window"));
        if (je.contains("theta_turn_guard"))
            cfg.estimator.theta_turn_guard =
                detail::as_number(je.at("theta_turn_guard"), "estimator.theta_turn_guard");
        if (je.contains("vs_mode")) {
            const std::string m = je.at("vs_mode").get<std::string>();
            if (m == "midpoint") cfg.estimator.anchor = SlabAnchor::Midpoint;
            else if (m == "lower") cfg.estimator.anchor = SlabAnchor::Lower;
            else if (m == "upper") cfg.estimator.anchor = SlabAnchor::Upper;
            else throw ConfigError("estimator.vs_mode", "expected midpoint|lower|upper");
        }
        if (je.contains("snapshot_fractions")) {
            const auto& fr = je.at("snapshot_fractions");
            if (!fr.is_array() || fr.size() != 2)
                throw ConfigError("estimator.snapshot_fractions", "expected [a, b]");
            cfg.estimator.snapshot_frac_a = detail::as_number(fr[0], "estimator.snapshot_fractions[0]");
            cfg.estimator.snapshot_frac_b = detail::as_number(fr[1], "estimator.snapshot_fractions[1]");
        }
    }

    if (j.contains("output")) {
        const auto& jo = j.at("output");
        if (jo.contains("dir")) {
            if (!jo.at("dir").is_string()) throw ConfigError("output.dir", "expected a string");
            cfg.out_dir = jo.at("dir").get<std::string>();
        }
    }

    if (j.contains("bench")) {
        const auto& jn = j.at("bench");
        if (jn.contains("sweep_n")) {
            for (const auto& v : jn.at("sweep_n"))
                cfg.sweep_n.push_back(
                    static_cast<std::size_t>(detail::as_number(v, "bench.sweep_n[]")));
        }
        if (jn.contains("reps"))
            cfg.reps = static_cast<long>(detail::as_number(jn.at("reps"), "bench.reps"));
    }

    try {
        validate(cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("<validation>", e.what());
    }

    out.config_hash = detail::fnv1a64(j.dump()); // canonical: nlohmann sorts object keys
    return out;
}

inline LoadedScenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<file>", "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

} // namespace bsn
