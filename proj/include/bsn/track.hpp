#pragma once
// Online tracker for the random-walk target.
//
// Per period: estimate the heading from the snapshot (single-snapshot SVM),
// slide the previous position estimate along its old heading until its
// projection on the new heading sits at the feasible-slab anchor (the lambda
// correction), then, when lambda falls outside the windowed interval
// [m - sigma, m + sigma] of recent lambdas, push the estimate sideways along
// the new heading's perpendicular (the theta correction). Later theta
// corrections feed back onto earlier positions (retrodiction).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bsn/field.hpp"
#include "bsn/observe.hpp"
#include "bsn/random.hpp"
#include "bsn/svm.hpp"
#include "bsn/vec2.hpp"

namespace bsn {

inline constexpr double kEpsParallel = 1e-3; // near-orthogonal heading guard
inline constexpr double kSigmaFloor = 0.1;   // meters; widens a collapsed window

enum StepFlag : std::uint32_t {
    kFlagNone = 0,
    kFlagInitFallback = 1u << 0,   // single-sign first snapshot, full-bounds init
    kFlagDirectionHeld = 1u << 1,  // one-class snapshot, previous heading kept
    kFlagLambdaSkipped = 1u << 2,  // slab unbounded or headings near-orthogonal
    kFlagThetaWarmup = 1u << 3,    // velocity window not yet full
    kFlagThetaTriggered = 1u << 4, // lambda left the windowed interval
};

struct StepRecord {
    double time = 0.0;
    Vec2 x_fin;       // position after both corrections
    Vec2 direction;   // heading used this step
    double lambda = 0.0;
    double theta = 0.0;
    std::uint32_t flags = kFlagNone;
};

struct TrackState {
    Vec2 position;  // current x_fin
    Vec2 direction; // current unit heading
    std::vector<double> speed_history; // lambda values, pre-feedback
    std::vector<StepRecord> history;   // append-only within a run
    std::uint32_t init_flags = kFlagNone;
};

// Sliding window over the last k lambda values; mean and standard deviation
// are recomputed exactly from the stored values.
class VelocityWindow {
  public:
    explicit VelocityWindow(std::size_t k) : k_(k) {
        if (k < 2) throw std::invalid_argument("VelocityWindow: k must be >= 2");
    }

    void push(double lambda) {
        values_.push_back(lambda);
        if (values_.size() > k_) values_.pop_front();
    }

    bool full() const { return values_.size() >= k_; }
    std::size_t k() const { return k_; }

    double mean() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }

    double stddev() const {
        const double m = mean();
        double s = 0.0;
        for (double v : values_) s += (v - m) * (v - m);
        return std::sqrt(s / static_cast<double>(values_.size()));
    }

  private:
    std::size_t k_;
    std::deque<double> values_;
};

enum class SlabAnchor { Midpoint, Lower, Upper };

struct TrackerOptions {
    SvmOptions svm{.C = 10.0};
    SlabAnchor anchor = SlabAnchor::Midpoint;
    std::size_t window = 5;
    long init_rejection_cap = 100000;
    // Heading-turn threshold for the theta correction. theta divides by
    // <perp(v_t), v_{t-1}> = sin(heading change); firing on a near-parallel
    // pair amplifies slab noise into a huge sideways jump, so the correction
    // only runs once the heading has turned visibly.
    double theta_turn_guard = 0.1;
    // Multiplies the [m - s, m + s] interval half-width. Values above 1 make
    // the trigger demand a lambda deviation that dominates its own noise
    // scale, which bounds the relative error of each fired correction.
    double theta_trigger_scale = 1.0;
    // Keep position estimates inside the field bounds (the outer envelope of
    // the sensor-defined feasible set).
    bool clamp_to_bounds = true;
};

// Heading from one snapshot; empty when the snapshot has a single class.
inline std::optional<Vec2> estimate_direction_step(const SensorField& field,
                                                   const std::vector<SignReport>& reports,
                                                   const SvmOptions& svm_opts = {.C = 10.0}) {
    bool plus = false, minus = false;
    for (const auto& r : reports) (r.sign == 1 ? plus : minus) = true;
    if (!plus || !minus) return std::nullopt;
    return single_snapshot_direction(field, reports, svm_opts).direction;
}

namespace detail {

inline double slab_anchor_value(const FeasibleSlab& slab, SlabAnchor mode) {
    switch (mode) {
        case SlabAnchor::Lower: return slab.lower;
        case SlabAnchor::Upper: return slab.upper;
        default: return slab.midpoint();
    }
}

} // namespace detail

// Position initialization: uniform over the feasible slab intersected with
// the field bounds (rejection sampling); heading from the first snapshot.
inline TrackState init_track(const SensorField& field, const std::vector<SignReport>& reports,
                             Rng rng, const TrackerOptions& opts = {}) {
    TrackState state;
    const auto dir = estimate_direction_step(field, reports, opts.svm);
    const Rect& b = field.bounds();

    if (!dir) {
        state.init_flags |= kFlagInitFallback;
        state.direction = from_angle(rng.uniform(0.0, 2.0 * M_PI));
        state.position = {rng.uniform(b.min.x, b.max.x), rng.uniform(b.min.y, b.max.y)};
        return state;
    }
    state.direction = *dir;

    const FeasibleSlab slab = feasible_slab(field, reports, state.direction);
    for (long i = 0; i < opts.init_rejection_cap; ++i) {
        const Vec2 p{rng.uniform(b.min.x, b.max.x), rng.uniform(b.min.y, b.max.y)};
        const double proj = p.dot(state.direction);
        if (proj > slab.lower && proj < slab.upper) {
            state.position = p;
            return state;
        }
    }
    state.init_flags |= kFlagInitFallback;
    state.position = {rng.uniform(b.min.x, b.max.x), rng.uniform(b.min.y, b.max.y)};
    return state;
}

struct LambdaCorrection {
    double lambda = 0.0;
    Vec2 x_corr;
    bool skipped = false;
};

// lambda = (anchor - <v_t, x_{t-1}>) / <v_t, v_{t-1}>; the corrected position
// x_{t-1} + lambda v_{t-1} projects on v_t exactly at the anchor.
inline LambdaCorrection lambda_correct(const Vec2& x_prev, const Vec2& v_prev, const Vec2& v_t,
                                       const FeasibleSlab& slab,
                                       SlabAnchor anchor = SlabAnchor::Midpoint) {
    LambdaCorrection out;
    out.x_corr = x_prev;
    const double den = v_t.dot(v_prev);
    if (slab.unbounded || std::abs(den) <= kEpsParallel) {
        out.skipped = true;
        return out;
    }
    const double target = detail::slab_anchor_value(slab, anchor);
    out.lambda = (target - v_t.dot(x_prev)) / den;
    out.x_corr = x_prev + out.lambda * v_prev;
    return out;
}

struct ThetaCorrection {
    double theta = 0.0;
    Vec2 x_fin;
    bool triggered = false;
    bool warmup = false;
};

// theta = (m - lambda) / <v_t_perp, v_{t-1}> when lambda leaves [m-s, m+s]
// and the heading has turned past the guard; rectilinear motion gets no
// correction. x_fin = x_corr + theta * v_t_perp.
//
// sigma_cap bounds the interval half-width from above. Velocity changes are
// bounded, so a window inflated by a large cross-track error (whose sway
// enters every lambda) must not mask its own trigger; the natural scale for
// legitimate lambda scatter is the feasible-slab width.
inline ThetaCorrection theta_correct(const Vec2& x_corr, const Vec2& v_t, const Vec2& v_prev,
                                     double lambda, const VelocityWindow& window,
                                     double turn_guard = kEpsParallel,
                                     double sigma_cap = std::numeric_limits<double>::infinity(),
                                     double trigger_scale = 1.0) {
    ThetaCorrection out;
    out.x_fin = x_corr;
    if (!window.full()) {
        out.warmup = true;
        return out;
    }
    const double m = window.mean();
    const double sigma =
        trigger_scale *
        std::max(std::min(window.stddev(), std::max(sigma_cap, kSigmaFloor)), kSigmaFloor);
    if (lambda >= m - sigma && lambda <= m + sigma) return out;

    const Vec2 perp = v_t.perp();
    const double den = perp.dot(v_prev);
    if (std::abs(den) <= std::max(turn_guard, kEpsParallel))
        return out; // rectilinear: no correction possible

    out.theta = (m - lambda) / den;
    out.x_fin = x_corr + out.theta * perp;
    out.triggered = true;
    return out;
}

// Retrodicted track: z_j = x_fin_j + sum_{i>j} theta_i * perp(v_i).
inline std::vector<Vec2> retrodict(const std::vector<StepRecord>& history) {
    if (history.empty()) throw std::invalid_argument("retrodict: empty history");
    std::vector<Vec2> out(history.size());
    Vec2 feedback{0.0, 0.0};
    for (std::size_t j = history.size(); j-- > 0;) {
        out[j] = history[j].x_fin + feedback;
        feedback += history[j].theta * history[j].direction.perp();
    }
    return out;
}

// One tracker period: heading, lambda, window check, theta; histories and the
// velocity window are updated in place. Flags report degradations; the step
// never aborts a run.
inline void track_step(TrackState& state, const SensorField& field,
                       const std::vector<SignReport>& reports, VelocityWindow& window,
                       double time, const TrackerOptions& opts = {}) {
    std::uint32_t flags = kFlagNone;
    const Vec2 v_prev = state.direction;

    Vec2 v_t = v_prev;
    if (auto dir = estimate_direction_step(field, reports, opts.svm)) {
        v_t = *dir;
    } else {
        flags |= kFlagDirectionHeld;
    }

    const FeasibleSlab slab = feasible_slab(field, reports, v_t);
    const LambdaCorrection lam = lambda_correct(state.position, v_prev, v_t, slab, opts.anchor);
    if (lam.skipped) flags |= kFlagLambdaSkipped;

    ThetaCorrection th;
    th.x_fin = lam.x_corr;
    if (!lam.skipped) {
        th = theta_correct(lam.x_corr, v_t, v_prev, lam.lambda, window, opts.theta_turn_guard,
                           slab.width(), opts.theta_trigger_scale);
        if (th.warmup) flags |= kFlagThetaWarmup;
        if (th.triggered) flags |= kFlagThetaTriggered;
        // A fired theta explains the lambda outlier as cross-track error; the
        // step's implied along-track speed is lambda + <perp(v_t), v_prev> *
        // theta, which the correction drives back to the window mean. Feeding
        // the raw outlier into the window would poison the interval for the
        // next k steps.
        const double speed_sample =
            th.triggered ? lam.lambda + v_t.perp().dot(v_prev) * th.theta : lam.lambda;
        window.push(speed_sample);
        state.speed_history.push_back(speed_sample);
    }

    Vec2 x_fin = th.x_fin;
    if (opts.clamp_to_bounds) {
        const Rect& b = field.bounds();
        x_fin.x = std::clamp(x_fin.x, b.min.x, b.max.x);
        x_fin.y = std::clamp(x_fin.y, b.min.y, b.max.y);
    }

    state.position = x_fin;
    state.direction = v_t;
    state.history.push_back({time, x_fin, v_t, lam.skipped ? 0.0 : lam.lambda, th.theta, flags});
}

} // namespace bsn
