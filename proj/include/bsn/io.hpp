#pragma once
// CSV emission. Every file carries a header row plus a comment line with the
// config hash and seed. Numbers print through one fixed %.17g formatter so
// identical runs produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsn/analysis.hpp"
#include "bsn/field.hpp"
#include "bsn/observe.hpp"
#include "bsn/scenario.hpp"
#include "bsn/track.hpp"

namespace bsn {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_hash(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

inline std::ofstream open_csv(const std::string& path, std::uint64_t config_hash,
                              std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary); // binary: no platform newline surprises
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "# config_hash=" << format_hash(config_hash) << " seed=" << seed << "\n";
    return out;
}

inline std::string step_flag_names(std::uint32_t flags) {
    std::string s;
    auto add = [&s](const char* name) {
        if (!s.empty()) s += ';';
        s += name;
    };
    if (flags & kFlagInitFallback) add("init_fallback");
    if (flags & kFlagDirectionHeld) add("direction_held");
    if (flags & kFlagLambdaSkipped) add("lambda_skipped");
    if (flags & kFlagThetaWarmup) add("theta_warmup");
    if (flags & kFlagThetaTriggered) add("theta_triggered");
    return s;
}

} // namespace detail

// Snapshot dump: one row per (period, sensor).
inline void write_snapshot_csv(const std::string& path, const SensorField& field,
                               const std::vector<std::vector<SignReport>>& snapshots,
                               std::uint64_t config_hash, std::uint64_t seed) {
    auto out = detail::open_csv(path, config_hash, seed);
    out << "time,sensor_index,x,y,sign\n";
    for (const auto& snap : snapshots)
        for (const auto& r : snap) {
            const Vec2& s = field.sensor(r.sensor_index);
            out << format_double(r.time) << ',' << r.sensor_index << ',' << format_double(s.x)
                << ',' << format_double(s.y) << ',' << r.sign << "\n";
        }
}

inline void write_counters_csv(const std::string& path, const SensorField& field,
                               const CounterField& counters, std::uint64_t config_hash,
                               std::uint64_t seed) {
    auto out = detail::open_csv(path, config_hash, seed);
    out << "sensor_index,x,y,count,periods_elapsed\n";
    for (std::size_t i = 0; i < field.size(); ++i) {
        const Vec2& s = field.sensor(i);
        out << i << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
            << counters.count(i) << ',' << counters.periods_elapsed() << "\n";
    }
}

inline void write_track_csv(const std::string& path, const TrackingRun& run,
                            std::uint64_t config_hash, std::uint64_t seed) {
    auto out = detail::open_csv(path, config_hash, seed);
    out << "t,true_x,true_y,est_x,est_y,retro_x,retro_y,lambda,theta,dir_x,dir_y,flags\n";
    for (std::size_t k = 0; k < run.state.history.size(); ++k) {
        const StepRecord& rec = run.state.history[k];
        const Vec2& truth = run.truth.at(k).position;
        const Vec2& retro = run.retrodicted.at(k);
        out << format_double(rec.time) << ',' << format_double(truth.x) << ','
            << format_double(truth.y) << ',' << format_double(rec.x_fin.x) << ','
            << format_double(rec.x_fin.y) << ',' << format_double(retro.x) << ','
            << format_double(retro.y) << ',' << format_double(rec.lambda) << ','
            << format_double(rec.theta) << ',' << format_double(rec.direction.x) << ','
            << format_double(rec.direction.y) << ',' << detail::step_flag_names(rec.flags)
            << "\n";
    }
}

// Shared MSE schema for both bench modes. Batch sweeps have no position
// column; tracking curves have no direction column; absent cells print nan.
inline void write_mse_csv(const std::string& path, const std::vector<BatchMsePoint>& points,
                          std::uint64_t config_hash, std::uint64_t seed) {
    auto out = detail::open_csv(path, config_hash, seed);
    out << "sweep_value,mse_position,mse_velocity,mse_direction,reps_ok,reps_failed\n";
    for (const auto& p : points)
        out << format_double(p.sweep_value) << ",nan," << format_double(p.mse_speed) << ','
            << format_double(p.mse_direction) << ',' << p.reps_ok << ',' << p.reps_failed
            << "\n";
}

inline void write_mse_csv(const std::string& path, const MseCurve& curve, double period,
                          std::uint64_t config_hash, std::uint64_t seed) {
    auto out = detail::open_csv(path, config_hash, seed);
    out << "sweep_value,mse_position,mse_velocity,mse_direction,reps_ok,reps_failed\n";
    for (std::size_t k = 0; k < curve.mse_position.size(); ++k)
        out << format_double(static_cast<double>(k) * period) << ','
            << format_double(curve.mse_position[k]) << ',' << format_double(curve.mse_velocity[k])
            << ",nan," << curve.reps_ok << ',' << curve.reps_failed << "\n";
}

} // namespace bsn
