#pragma once
// Scenario configuration and the simulation loop shared by the CLI, the
// Monte Carlo harness and the tests. A scenario owns one base seed; field
// sampling, walk noise, flip noise and tracker initialization each draw from
// their own derived stream.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsn/field.hpp"
#include "bsn/observe.hpp"
#include "bsn/ppr.hpp"
#include "bsn/random.hpp"
#include "bsn/svm.hpp"
#include "bsn/track.hpp"
#include "bsn/trajectory.hpp"

namespace bsn {

struct FieldSpec {
    std::size_t n = 100;
    Rect bounds{{0.0, 0.0}, {300.0, 300.0}};
};

struct ObservationSpec {
    double period = 1.0;         // seconds per sample
    long periods = 2;            // number of samples in the batch
    double flip_probability = 1.0; // probability of reporting the right sign
};

struct EstimatorSpec {
    EstimatorMethod method = EstimatorMethod::Ppr;
    double soft_margin_C = 10.0;
    double bandwidth = 0.0; // <= 0 selects the default field-diagonal rule
    KernelType kernel = KernelType::Gaussian;
    int direction_grid = 360;
    std::size_t window = 5; // tracker velocity-window length
    SlabAnchor anchor = SlabAnchor::Midpoint;
    double theta_turn_guard = 0.1; // min |sin(heading change)| for theta
    double snapshot_frac_a = 0.25; // two-period snapshot picks, fraction of run
    double snapshot_frac_b = 0.75;
};

struct ScenarioConfig {
    std::uint64_t seed = 0;
    FieldSpec field;
    TrajectoryModel motion = ConstantVelocity{{30.0, 15.0}, {1.0, 2.0}};
    ObservationSpec observation;
    EstimatorSpec estimator;
    std::vector<std::size_t> sweep_n; // bench: sensor counts to sweep
    long reps = 100;                  // bench: replications
    std::string out_dir = ".";
};

inline void validate(const ScenarioConfig& cfg) {
    if (cfg.field.n < 3) throw std::invalid_argument("field.n must be >= 3");
    if (cfg.field.bounds.degenerate()) throw std::invalid_argument("field.bounds degenerate");
    if (!(cfg.observation.period > 0.0)) throw std::invalid_argument("observation.period must be > 0");
    if (cfg.observation.periods < 2) throw std::invalid_argument("observation.periods must be >= 2");
    if (!(cfg.observation.flip_probability > 0.0 && cfg.observation.flip_probability <= 1.0))
        throw std::invalid_argument("observation.flip_probability must be in (0, 1]");
    if (cfg.estimator.window < 2) throw std::invalid_argument("estimator.window must be >= 2");
    if (cfg.estimator.direction_grid < 8) throw std::invalid_argument("estimator.direction_grid must be >= 8");
    if (!(cfg.estimator.soft_margin_C > 0.0)) throw std::invalid_argument("estimator.C must be > 0");
    if (!(cfg.estimator.snapshot_frac_a >= 0.0 && cfg.estimator.snapshot_frac_b <= 1.0 &&
          cfg.estimator.snapshot_frac_a < cfg.estimator.snapshot_frac_b))
        throw std::invalid_argument("estimator snapshot fractions must satisfy 0 <= a < b <= 1");
    if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");
    validate(cfg.motion);
}

// Truth states, per-period snapshots (flip noise applied) and the counter
// field accumulated over the whole batch.
struct SimulatedRun {
    std::vector<TargetState> states;
    std::vector<std::vector<SignReport>> snapshots;
    CounterField counters;

    explicit SimulatedRun(std::size_t n_sensors) : counters(n_sensors) {}
};

inline SimulatedRun simulate_run(const SensorField& field, const TrajectoryModel& motion,
                                 const ObservationSpec& obs, const Rng& scenario_rng) {
    SimulatedRun run(field.size());
    Rng flip_rng = scenario_rng.derive("flip");
    Rng walk_rng = scenario_rng.derive("walk");

    TargetState state;
    const bool stochastic = std::holds_alternative<GaussianRandomWalk>(motion);
    const GaussianRandomWalk* walk = std::get_if<GaussianRandomWalk>(&motion);
    if (stochastic) state = {walk->x0, walk->v0, 0.0};

    for (long k = 0; k < obs.periods; ++k) {
        if (stochastic) {
            if (k > 0) state = step_random_walk(state, walk->F, walk->Q, walk_rng, obs.period);
        } else {
            state = trajectory_state(motion, static_cast<double>(k) * obs.period);
        }
        auto reports = snapshot(field, state);
        if (obs.flip_probability < 1.0)
            reports = apply_flip_noise(std::move(reports), obs.flip_probability, flip_rng);
        run.counters = update_counters(std::move(run.counters), reports);
        run.states.push_back(state);
        run.snapshots.push_back(std::move(reports));
    }
    return run;
}

// Batch velocity estimate for a simulated constant-velocity-style run.
inline VelocityEstimate estimate_cv(const SensorField& field, const SimulatedRun& run,
                                    const EstimatorSpec& spec, double period) {
    SvmOptions svm_opts;
    svm_opts.C = spec.soft_margin_C;
    const long t_count = static_cast<long>(run.snapshots.size());

    switch (spec.method) {
        case EstimatorMethod::Svm2d: {
            const auto idx = static_cast<std::size_t>(std::lround(0.5 * (t_count - 1)));
            auto est = single_snapshot_direction(field, run.snapshots.at(idx), svm_opts);
            return est;
        }
        case EstimatorMethod::Svm2Period: {
            const auto ia = static_cast<std::size_t>(
                std::lround(spec.snapshot_frac_a * (t_count - 1)));
            const auto ib = static_cast<std::size_t>(
                std::lround(spec.snapshot_frac_b * (t_count - 1)));
            if (ib <= ia)
                throw std::invalid_argument("estimate_cv: two-period snapshots coincide");
            const double dt = static_cast<double>(ib - ia) * period;
            return two_period_velocity(field, run.snapshots[ia], run.snapshots[ib], dt, svm_opts)
                .second;
        }
        case EstimatorMethod::Svm3d:
            return stairwise_plane_svm(field, run.counters, svm_opts);
        default: {
            KernelConfig kc{spec.bandwidth, spec.kernel};
            if (!(kc.bandwidth > 0.0)) kc.bandwidth = default_kernel_config(field).bandwidth;
            VelocityEstimate est;
            est.method = EstimatorMethod::Ppr;
            est.direction = fit_direction(field, run.counters, kc, spec.direction_grid);
            const auto sp = fit_speed(field, run.counters, est.direction);
            est.speed = sp.speed;
            est.degraded = sp.unidentifiable;
            return est;
        }
    }
}

// Full tracking run against simulated truth.
struct TrackingRun {
    TrackState state;
    std::vector<Vec2> retrodicted; // final feedback pass over the whole track
    std::vector<TargetState> truth;
};

inline TrackingRun run_tracker(const SensorField& field, const SimulatedRun& run,
                               const EstimatorSpec& spec, const Rng& scenario_rng,
                               double period) {
    if (run.snapshots.empty()) throw std::invalid_argument("run_tracker: empty run");
    TrackerOptions topts;
    topts.svm.C = spec.soft_margin_C;
    topts.anchor = spec.anchor;
    topts.window = spec.window;
    topts.theta_turn_guard = spec.theta_turn_guard;

    TrackingRun out;
    out.truth = run.states;
    out.state = init_track(field, run.snapshots.front(), scenario_rng.derive("init"), topts);
    out.state.history.push_back({run.states.front().time, out.state.position,
                                 out.state.direction, 0.0, 0.0, out.state.init_flags});

    VelocityWindow window(topts.window);
    for (std::size_t k = 1; k < run.snapshots.size(); ++k)
        track_step(out.state, field, run.snapshots[k], window, static_cast<double>(k) * period,
                   topts);
    out.retrodicted = retrodict(out.state.history);
    return out;
}

} // namespace bsn
