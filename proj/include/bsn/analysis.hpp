#pragma once
// Observability diagnostics and the Monte Carlo MSE harness.
//
// Two deterministic trajectories are indistinguishable to a dense binary
// network iff their velocities stay positively collinear and the position
// offset stays orthogonal to the velocity. indistinguishable() checks those
// two conditions on a time grid; sign_sequence_oracle() is the brute-force
// cross-check that compares the actual sign outputs over a large field.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "bsn/field.hpp"
#include "bsn/observe.hpp"
#include "bsn/scenario.hpp"
#include "bsn/trajectory.hpp"
#include "bsn/vec2.hpp"

namespace bsn {

struct IndistinguishabilityReport {
    bool indistinguishable = false;
    double max_violation = 0.0;             // worst of the two conditions
    double max_collinearity_violation = 0.0; // sin of the velocity angle (1.0 if wrong sign)
    double max_orthogonality_violation = 0.0; // |cos| between offset and velocity
};

// Indistinguishability conditions checked at each grid time, violations
// normalized to dimensionless [0, 1] scales.
inline IndistinguishabilityReport indistinguishable(const TrajectoryModel& a,
                                                    const TrajectoryModel& b,
                                                    const std::vector<double>& times,
                                                    double tol = 1e-6) {
    if (std::holds_alternative<GaussianRandomWalk>(a) ||
        std::holds_alternative<GaussianRandomWalk>(b))
        throw std::invalid_argument("indistinguishable: conditions apply to deterministic trajectories");
    if (times.empty()) throw std::invalid_argument("indistinguishable: empty time grid");

    IndistinguishabilityReport rep;
    for (double t : times) {
        const TargetState sa = trajectory_state(a, t);
        const TargetState sb = trajectory_state(b, t);
        const double na = sa.velocity.norm(), nb = sb.velocity.norm();

        double collin;
        if (na == 0.0 || nb == 0.0) {
            collin = (na == nb) ? 0.0 : 1.0;
        } else {
            collin = std::abs(sa.velocity.cross(sb.velocity)) / (na * nb);
            if (sa.velocity.dot(sb.velocity) <= 0.0) collin = 1.0; // lambda must be positive
        }

        const Vec2 offset = sa.position - sb.position;
        const double no = offset.norm();
        const double ortho =
            (no == 0.0 || na == 0.0) ? 0.0 : std::abs(offset.dot(sa.velocity)) / (no * na);

        rep.max_collinearity_violation = std::max(rep.max_collinearity_violation, collin);
        rep.max_orthogonality_violation = std::max(rep.max_orthogonality_violation, ortho);
    }
    rep.max_violation = std::max(rep.max_collinearity_violation, rep.max_orthogonality_violation);
    rep.indistinguishable = rep.max_violation <= tol;
    return rep;
}

// True iff every sensor's sign sequence matches between the two trajectories.
inline bool sign_sequence_oracle(const TrajectoryModel& a, const TrajectoryModel& b,
                                 const SensorField& field, const std::vector<double>& times) {
    for (double t : times) {
        const TargetState sa = trajectory_state(a, t);
        const TargetState sb = trajectory_state(b, t);
        for (const auto& s : field.sensors())
            if (sign_at(s, sa) != sign_at(s, sb)) return false;
    }
    return true;
}

struct MseCurve {
    std::vector<double> mse_position; // per time step, m^2
    std::vector<double> mse_velocity; // per time step, (m/s)^2
    long reps_ok = 0;
    long reps_failed = 0;
    std::uint64_t seed = 0;
};

struct BatchMsePoint {
    double sweep_value = 0.0; // sensor count
    double mse_direction = 0.0; // radians^2, angle folded to [0, pi]
    double mse_speed = 0.0;     // (m/s)^2
    long reps_ok = 0;
    long reps_failed = 0;
    std::vector<double> direction_errors; // per surviving rep, radians
    std::vector<double> speed_errors;     // per surviving rep, absolute m/s
};

namespace detail {

// Deterministic parallel map over replication indices: every rep derives its
// own seed stream, results land in index order regardless of thread count.
inline void parallel_reps(long reps, const std::function<void(long)>& body) {
    unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(reps));
    if (n_threads <= 1) {
        for (long r = 0; r < reps; ++r) body(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w)
        pool.emplace_back([&, w]() {
            for (long r = w; r < reps; r += n_threads) body(r);
        });
    for (auto& th : pool) th.join();
}

} // namespace detail

// Batch CV sweep: for each sensor count, `reps` replications of field
// sampling + simulation + estimation. Failed replications are excluded and
// counted, never imputed.
inline std::vector<BatchMsePoint> run_monte_carlo_batch(const ScenarioConfig& cfg,
                                                        EstimatorMethod method, long reps,
                                                        std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("run_monte_carlo_batch: reps must be >= 1");
    std::vector<std::size_t> sweep = cfg.sweep_n;
    if (sweep.empty()) sweep.push_back(cfg.field.n);

    const TargetState truth0 = trajectory_state(cfg.motion, 0.0);
    const Vec2 true_v = truth0.velocity;
    const double true_speed = true_v.norm();
    const Vec2 true_dir = true_v.normalized();

    std::vector<BatchMsePoint> points;
    for (std::size_t n : sweep) {
        BatchMsePoint pt;
        pt.sweep_value = static_cast<double>(n);
        std::vector<int> ok(static_cast<std::size_t>(reps), 0);
        std::vector<double> dir_err(static_cast<std::size_t>(reps), 0.0);
        std::vector<double> speed_err(static_cast<std::size_t>(reps), 0.0);

        detail::parallel_reps(reps, [&](long r) {
            const Rng rep_rng = Rng(seed).derive("rep", static_cast<std::uint64_t>(r))
                                   .derive("n", n);
            try {
                const SensorField field = sample_field(n, cfg.field.bounds, rep_rng.derive("field"));
                const SimulatedRun run =
                    simulate_run(field, cfg.motion, cfg.observation, rep_rng);
                EstimatorSpec spec = cfg.estimator;
                spec.method = method;
                const VelocityEstimate est = estimate_cv(field, run, spec, cfg.observation.period);
                dir_err[static_cast<std::size_t>(r)] = angle_between(est.direction, true_dir);
                speed_err[static_cast<std::size_t>(r)] =
                    est.speed ? std::abs(*est.speed - true_speed)
                              : std::numeric_limits<double>::quiet_NaN();
                ok[static_cast<std::size_t>(r)] = 1;
            } catch (const std::exception&) {
                ok[static_cast<std::size_t>(r)] = 0;
            }
        });

        for (long r = 0; r < reps; ++r) {
            if (!ok[static_cast<std::size_t>(r)]) {
                ++pt.reps_failed;
                continue;
            }
            ++pt.reps_ok;
            const double de = dir_err[static_cast<std::size_t>(r)];
            pt.direction_errors.push_back(de);
            pt.mse_direction += de * de;
            const double se = speed_err[static_cast<std::size_t>(r)];
            if (std::isfinite(se)) {
                pt.speed_errors.push_back(se);
                pt.mse_speed += se * se;
            }
        }
        if (pt.reps_ok > 0) {
            pt.mse_direction /= static_cast<double>(pt.reps_ok);
            if (!pt.speed_errors.empty())
                pt.mse_speed /= static_cast<double>(pt.speed_errors.size());
        }
        points.push_back(std::move(pt));
    }
    return points;
}

struct TrackingMcResult {
    MseCurve curve;
    // Per surviving replication, per step: squared position error and
    // absolute position error (meters).
    std::vector<std::vector<double>> sq_position_errors;
    std::vector<std::vector<double>> abs_position_errors;
};

// Tracking Monte Carlo: fresh field, walk and tracker per replication.
inline TrackingMcResult run_monte_carlo_tracking(const ScenarioConfig& cfg, long reps,
                                                 std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("run_monte_carlo_tracking: reps must be >= 1");
    if (!std::holds_alternative<GaussianRandomWalk>(cfg.motion))
        throw std::invalid_argument("run_monte_carlo_tracking: motion must be a random walk");

    const auto steps = static_cast<std::size_t>(cfg.observation.periods);
    std::vector<int> ok(static_cast<std::size_t>(reps), 0);
    std::vector<std::vector<double>> sq_pos(static_cast<std::size_t>(reps));
    std::vector<std::vector<double>> sq_vel(static_cast<std::size_t>(reps));

    detail::parallel_reps(reps, [&](long r) {
        const Rng rep_rng = Rng(seed).derive("rep", static_cast<std::uint64_t>(r));
        try {
            const SensorField field =
                sample_field(cfg.field.n, cfg.field.bounds, rep_rng.derive("field"));
            const SimulatedRun run = simulate_run(field, cfg.motion, cfg.observation, rep_rng);
            const TrackingRun tr =
                run_tracker(field, run, cfg.estimator, rep_rng, cfg.observation.period);

            auto& sp = sq_pos[static_cast<std::size_t>(r)];
            auto& sv = sq_vel[static_cast<std::size_t>(r)];
            sp.resize(steps, 0.0);
            sv.resize(steps, 0.0);
            for (std::size_t k = 0; k < steps; ++k) {
                const Vec2 dp = tr.state.history[k].x_fin - tr.truth[k].position;
                sp[k] = dp.norm_sq();
                const Vec2 v_est = (tr.state.history[k].lambda / cfg.observation.period) *
                                   tr.state.history[k].direction;
                sv[k] = (v_est - tr.truth[k].velocity).norm_sq();
            }
            ok[static_cast<std::size_t>(r)] = 1;
        } catch (const std::exception&) {
            ok[static_cast<std::size_t>(r)] = 0;
        }
    });

    TrackingMcResult out;
    out.curve.seed = seed;
    out.curve.mse_position.assign(steps, 0.0);
    out.curve.mse_velocity.assign(steps, 0.0);
    for (long r = 0; r < reps; ++r) {
        if (!ok[static_cast<std::size_t>(r)]) {
            ++out.curve.reps_failed;
            continue;
        }
        ++out.curve.reps_ok;
        const auto& sp = sq_pos[static_cast<std::size_t>(r)];
        for (std::size_t k = 0; k < steps; ++k) {
            out.curve.mse_position[k] += sp[k];
            out.curve.mse_velocity[k] += sq_vel[static_cast<std::size_t>(r)][k];
        }
        out.sq_position_errors.push_back(sp);
        std::vector<double> abs_err(steps);
        for (std::size_t k = 0; k < steps; ++k) abs_err[k] = std::sqrt(sp[k]);
        out.abs_position_errors.push_back(std::move(abs_err));
    }
    if (out.curve.reps_ok > 0)
        for (std::size_t k = 0; k < steps; ++k) {
            out.curve.mse_position[k] /= static_cast<double>(out.curve.reps_ok);
            out.curve.mse_velocity[k] /= static_cast<double>(out.curve.reps_ok);
        }
    return out;
}

} // namespace bsn
