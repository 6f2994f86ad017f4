#pragma once
// Binary derivative observations.
//
// A sensor reports +1 when the target range is decreasing, -1 when it is
// increasing: sign = +1 iff <x_t - t_i, v_t> < 0. An exact-zero inner
// product is broken to -1 (the range is not strictly decreasing).
//
// Signs are evaluated from the instantaneous velocity at sample times, never
// from finite-differenced ranges, so the random-walk case stays well defined.

#include <limits>
#include <stdexcept>
#include <vector>

#include "bsn/field.hpp"
#include "bsn/random.hpp"
#include "bsn/trajectory.hpp"
#include "bsn/vec2.hpp"

namespace bsn {

struct SignReport {
    std::size_t sensor_index = 0;
    double time = 0.0;
    int sign = -1; // +1 or -1 only
};

inline int sign_at(const Vec2& sensor, const TargetState& target) {
    require_finite(sensor, "sign_at sensor");
    require_finite(target.position, "sign_at target position");
    require_finite(target.velocity, "sign_at target velocity");
    if (target.velocity.norm_sq() == 0.0)
        throw std::invalid_argument("sign_at: sign undefined for zero velocity");
    return (target.position - sensor).dot(target.velocity) < 0.0 ? +1 : -1;
}

// One report per sensor, in field order.
inline std::vector<SignReport> snapshot(const SensorField& field, const TargetState& target) {
    std::vector<SignReport> out;
    out.reserve(field.size());
    for (std::size_t i = 0; i < field.size(); ++i)
        out.push_back({i, target.time, sign_at(field.sensor(i), target)});
    return out;
}

// Each sign kept with probability p, flipped with 1-p.
inline std::vector<SignReport> apply_flip_noise(std::vector<SignReport> reports, double p,
                                                Rng& rng) {
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("apply_flip_noise: p must be in (0, 1]");
    for (auto& r : reports)
        if (rng.uniform01() >= p) r.sign = -r.sign;
    return reports;
}

// Per-sensor count of "+" periods: the stairwise functional's samples.
class CounterField {
  public:
    explicit CounterField(std::size_t n_sensors) : counts_(n_sensors, 0) {}

    CounterField(std::vector<long> counts, long periods_elapsed)
        : counts_(std::move(counts)), periods_(periods_elapsed) {
        if (periods_ < 0) throw std::invalid_argument("CounterField: negative periods");
        for (long c : counts_)
            if (c < 0 || c > periods_)
                throw std::invalid_argument("CounterField: count outside [0, periods_elapsed]");
    }

    const std::vector<long>& counts() const { return counts_; }
    long count(std::size_t i) const { return counts_.at(i); }
    long periods_elapsed() const { return periods_; }
    std::size_t size() const { return counts_.size(); }

    friend CounterField update_counters(CounterField counters,
                                        const std::vector<SignReport>& reports);

  private:
    std::vector<long> counts_;
    long periods_ = 0;
};

// counts[i] += 1 exactly when reports[i].sign == +1; periods_elapsed += 1.
inline CounterField update_counters(CounterField counters,
                                    const std::vector<SignReport>& reports) {
    if (reports.size() != counters.counts_.size())
        throw std::invalid_argument("update_counters: report/counter length mismatch");
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const int s = reports[i].sign;
        if (s != 1 && s != -1) throw std::invalid_argument("update_counters: sign must be +-1");
        if (s == 1) ++counters.counts_[i];
    }
    ++counters.periods_;
    return counters;
}

// The strip between the best "-" projection and the best "+" projection
// along a direction. The target's projection lies inside it when
// observations are noiseless and the direction is the true heading.
struct FeasibleSlab {
    Vec2 direction;              // unit
    double lower = -std::numeric_limits<double>::infinity(); // max over "-" sensors
    double upper = std::numeric_limits<double>::infinity();  // min over "+" sensors
    bool unbounded = false;      // only one sign present in the snapshot

    double midpoint() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
};

inline FeasibleSlab feasible_slab(const SensorField& field,
                                  const std::vector<SignReport>& reports,
                                  const Vec2& direction) {
    if (reports.size() != field.size())
        throw std::invalid_argument("feasible_slab: report/field length mismatch");
    FeasibleSlab slab;
    slab.direction = direction.normalized();
    bool seen_plus = false, seen_minus = false;
    for (const auto& r : reports) {
        const double proj = field.sensor(r.sensor_index).dot(slab.direction);
        if (r.sign == 1) {
            seen_plus = true;
            if (proj < slab.upper) slab.upper = proj;
        } else {
            seen_minus = true;
            if (proj > slab.lower) slab.lower = proj;
        }
    }
    slab.unbounded = !(seen_plus && seen_minus);
    return slab;
}

} // namespace bsn
