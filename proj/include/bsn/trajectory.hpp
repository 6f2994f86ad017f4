#pragma once
// The four target motion laws.
//
// Deterministic models (constant velocity, multi-leg, constant acceleration)
// evaluate in closed form at any t >= 0. The Gaussian random walk advances
// one period at a time through step_random_walk.
//
// Note on the accelerated model: position is x0 + t*v0 + t^2*a0, i.e. the
// quadratic term carries coefficient 1 rather than the conventional 1/2.
// Velocity is v0 + t*a0. Downstream observability checks depend on this
// exact form; do not "fix" it.

#include <array>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "bsn/random.hpp"
#include "bsn/vec2.hpp"

namespace bsn {

struct TargetState {
    Vec2 position;
    Vec2 velocity;
    double time = 0.0;
};

// 4x4 matrix over the state [px, py, vx, vy], row-major.
struct Mat4 {
    std::array<double, 16> m{};

    double& at(int r, int c) { return m[static_cast<std::size_t>(r * 4 + c)]; }
    double at(int r, int c) const { return m[static_cast<std::size_t>(r * 4 + c)]; }

    static Mat4 identity() {
        Mat4 out;
        for (int i = 0; i < 4; ++i) out.at(i, i) = 1.0;
        return out;
    }

    static Mat4 zero() { return Mat4{}; }

    static Mat4 diag(double a, double b, double c, double d) {
        Mat4 out;
        out.at(0, 0) = a;
        out.at(1, 1) = b;
        out.at(2, 2) = c;
        out.at(3, 3) = d;
        return out;
    }

    // Constant-velocity transition over one period dt.
    static Mat4 cv_transition(double dt) {
        Mat4 out = identity();
        out.at(0, 2) = dt;
        out.at(1, 3) = dt;
        return out;
    }

    std::array<double, 4> apply(const std::array<double, 4>& v) const {
        std::array<double, 4> out{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) out[static_cast<std::size_t>(r)] += at(r, c) * v[static_cast<std::size_t>(c)];
        return out;
    }

    bool symmetric(double tol = 1e-9) const {
        for (int r = 0; r < 4; ++r)
            for (int c = r + 1; c < 4; ++c)
                if (std::abs(at(r, c) - at(c, r)) > tol) return false;
        return true;
    }
};

namespace detail {

// Cholesky-like factor L with Q = L L^T for symmetric positive semi-definite Q.
// Zero (or numerically negative within jitter) pivots produce zero columns, so
// Q = 0 yields L = 0 and the walk degenerates to the deterministic recurrence.
inline Mat4 psd_factor(const Mat4& q) {
    Mat4 l = Mat4::zero();
    constexpr double kTol = 1e-12;
    for (int j = 0; j < 4; ++j) {
        double d = q.at(j, j);
        for (int k = 0; k < j; ++k) d -= l.at(j, k) * l.at(j, k);
        if (d < -kTol * (1.0 + std::abs(q.at(j, j))))
            throw std::invalid_argument("random walk Q is not positive semi-definite");
        if (d <= kTol) continue; // semi-definite direction: zero column
        const double root = std::sqrt(d);
        l.at(j, j) = root;
        for (int i = j + 1; i < 4; ++i) {
            double s = q.at(i, j);
            for (int k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
            l.at(i, j) = s / root;
        }
    }
    return l;
}

} // namespace detail

struct ConstantVelocity {
    Vec2 x0;
    Vec2 v;
};

struct Leg {
    Vec2 velocity;
    double end_time = 0.0;
};

struct MultiLeg {
    Vec2 x0;
    std::vector<Leg> legs;
};

struct ConstantAcceleration {
    Vec2 x0;
    Vec2 v0;
    Vec2 a0;
};

struct GaussianRandomWalk {
    Vec2 x0;
    Vec2 v0;
    Mat4 F = Mat4::cv_transition(1.0);
    Mat4 Q = Mat4::zero();
};

using TrajectoryModel =
    std::variant<ConstantVelocity, MultiLeg, ConstantAcceleration, GaussianRandomWalk>;

inline void validate(const TrajectoryModel& model) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantVelocity>) {
                require_finite(m.x0, "ConstantVelocity x0");
                require_finite(m.v, "ConstantVelocity v");
                if (m.v.norm_sq() == 0.0)
                    throw std::invalid_argument("ConstantVelocity: v must be nonzero");
            } else if constexpr (std::is_same_v<T, MultiLeg>) {
                require_finite(m.x0, "MultiLeg x0");
                if (m.legs.empty()) throw std::invalid_argument("MultiLeg: no legs");
                double prev = 0.0;
                for (const auto& leg : m.legs) {
                    require_finite(leg.velocity, "MultiLeg leg velocity");
                    if (!(leg.end_time > prev))
                        throw std::invalid_argument("MultiLeg: end_times must be strictly increasing");
                    prev = leg.end_time;
                }
            } else if constexpr (std::is_same_v<T, ConstantAcceleration>) {
                require_finite(m.x0, "ConstantAcceleration x0");
                require_finite(m.v0, "ConstantAcceleration v0");
                require_finite(m.a0, "ConstantAcceleration a0");
            } else {
                require_finite(m.x0, "GaussianRandomWalk x0");
                require_finite(m.v0, "GaussianRandomWalk v0");
                if (!m.Q.symmetric())
                    throw std::invalid_argument("GaussianRandomWalk: Q must be symmetric");
                detail::psd_factor(m.Q); // throws if not PSD
            }
        },
        model);
}

// Closed-form state of a deterministic model at time t.
// MultiLeg velocity is right-continuous at maneuver epochs: at an epoch the
// new leg's velocity applies. Past the final end_time, the last leg extends.
inline TargetState trajectory_state(const TrajectoryModel& model, double t) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("trajectory_state: t must be finite and >= 0");
    if (std::holds_alternative<GaussianRandomWalk>(model))
        throw std::invalid_argument("trajectory_state: stochastic model requires stepping");

    TargetState out;
    out.time = t;
    if (const auto* cv = std::get_if<ConstantVelocity>(&model)) {
        out.position = cv->x0 + t * cv->v;
        out.velocity = cv->v;
    } else if (const auto* ml = std::get_if<MultiLeg>(&model)) {
        Vec2 pos = ml->x0;
        double prev_end = 0.0;
        Vec2 vel = ml->legs.front().velocity;
        for (std::size_t i = 0; i < ml->legs.size(); ++i) {
            const auto& leg = ml->legs[i];
            const bool last = i + 1 == ml->legs.size();
            if (t < leg.end_time || last) {
                pos += (t - prev_end) * leg.velocity;
                vel = leg.velocity;
                break;
            }
            pos += (leg.end_time - prev_end) * leg.velocity;
            prev_end = leg.end_time;
            // exactly at the epoch: next leg's velocity (right-continuous)
            vel = ml->legs[i + 1].velocity;
        }
        out.position = pos;
        out.velocity = vel;
    } else {
        const auto& ca = std::get<ConstantAcceleration>(model);
        out.position = ca.x0 + t * ca.v0 + (t * t) * ca.a0;
        out.velocity = ca.v0 + t * ca.a0;
    }
    return out;
}

// One Markov step: [pos;vel] ~ N(F * [pos;vel], Q); time advances one period.
inline TargetState step_random_walk(const TargetState& state, const Mat4& F, const Mat4& Q,
                                    Rng& noise, double period = 1.0) {
    require_finite(state.position, "step_random_walk position");
    require_finite(state.velocity, "step_random_walk velocity");
    const Mat4 l = detail::psd_factor(Q);

    const std::array<double, 4> mean =
        F.apply({state.position.x, state.position.y, state.velocity.x, state.velocity.y});
    std::array<double, 4> z{};
    for (auto& v : z) v = noise.normal();

    TargetState out;
    for (int r = 0; r < 4; ++r) {
        double noise_r = 0.0;
        for (int c = 0; c <= r; ++c) noise_r += l.at(r, c) * z[static_cast<std::size_t>(c)];
        const double value = mean[static_cast<std::size_t>(r)] + noise_r;
        switch (r) {
            case 0: out.position.x = value; break;
            case 1: out.position.y = value; break;
            case 2: out.velocity.x = value; break;
            default: out.velocity.y = value; break;
        }
    }
    out.time = state.time + period;
    return out;
}

} // namespace bsn
