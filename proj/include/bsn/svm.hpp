#pragma once
// Linear SVM in dual form, solved from scratch by pairwise coordinate ascent
// (two multipliers per step, so the per-group equality constraint is
// preserved). Supports hard margin (C = inf) and box-bounded soft margin.
//
// The "group" index exists for the two-period problem: one shared normal,
// one offset per snapshot. Each group carries its own sum(alpha_i y_i) = 0
// constraint, so ascent pairs are always picked within a group.
//
// Velocity-plane estimators built on top:
//   - two_period_velocity: shared-normal separators at T and T+dT,
//     speed = |b1 - b2| / (||w|| dT)
//   - stairwise_plane_svm: 3D separating plane between the counter staircase
//     and the staircase shifted up by one count; the in-plane direction is
//     the heading and |w_c| / ||w_xy|| is the speed (v = 1/tan(theta)).

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bsn/field.hpp"
#include "bsn/observe.hpp"
#include "bsn/vec2.hpp"

namespace bsn {

template <std::size_t D>
struct LabeledPoint {
    std::array<double, D> x{};
    int label = 1; // +1 or -1
    int group = 0;
};

using LabeledPoint2 = LabeledPoint<2>;
using LabeledPoint3 = LabeledPoint<3>;

struct SvmOptions {
    double C = std::numeric_limits<double>::infinity();
    double kkt_tolerance = 1e-6;
    long max_sweeps = 10000; // one sweep = n pair updates
    bool record_objective = false;
};

struct DualSolution {
    std::vector<double> multipliers;
    std::vector<std::size_t> support_indices; // multipliers above threshold
    double objective = 0.0;                   // W at the returned point
    long pair_updates = 0;
    bool converged = false;
    std::vector<double> objective_trace; // per update, only when recorded
};

template <std::size_t D>
struct Separator {
    std::array<double, D> w{};
    std::vector<double> offsets; // b per group
    double margin = 0.0;         // 1 / ||w||

    double b() const { return offsets.at(0); }
    double w_norm() const {
        double s = 0.0;
        for (double c : w) s += c * c;
        return std::sqrt(s);
    }
};

struct TwoPeriodSeparator {
    Vec2 w;
    double b1 = 0.0;
    double b2 = 0.0;
};

// d(H1, H2) / dT with d = |b1 - b2| / ||w||.
inline double two_period_speed(const TwoPeriodSeparator& sep, double dt) {
    return std::abs(sep.b1 - sep.b2) / (sep.w.norm() * dt);
}

enum class EstimatorMethod { Svm2d, Svm3d, Svm2Period, Ppr };

inline const char* to_string(EstimatorMethod m) {
    switch (m) {
        case EstimatorMethod::Svm2d: return "svm2d";
        case EstimatorMethod::Svm3d: return "svm3d";
        case EstimatorMethod::Svm2Period: return "svm2p";
        default: return "ppr";
    }
}

struct VelocityEstimate {
    Vec2 direction;              // unit, oriented so "+" sensors project larger
    std::optional<double> speed; // m/s; empty when the method is direction-only
    EstimatorMethod method = EstimatorMethod::Svm2d;
    bool degraded = false; // unconverged solve or soft-margin fallback
};

namespace detail {

template <std::size_t D>
double dot_d(const std::array<double, D>& a, const std::array<double, D>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < D; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t D>
void validate_labeled(const std::vector<LabeledPoint<D>>& pts, int& n_groups) {
    if (pts.empty()) throw std::invalid_argument("svm: empty point set");
    n_groups = 0;
    for (const auto& p : pts) {
        if (p.label != 1 && p.label != -1)
            throw std::invalid_argument("svm: labels must be +-1");
        if (p.group < 0) throw std::invalid_argument("svm: negative group");
        n_groups = std::max(n_groups, p.group + 1);
        for (double c : p.x)
            if (!std::isfinite(c)) throw std::invalid_argument("svm: non-finite coordinate");
    }
    std::vector<int> plus(static_cast<std::size_t>(n_groups), 0), minus(static_cast<std::size_t>(n_groups), 0);
    for (const auto& p : pts)
        ++(p.label == 1 ? plus : minus)[static_cast<std::size_t>(p.group)];
    for (int g = 0; g < n_groups; ++g)
        if (plus[static_cast<std::size_t>(g)] == 0 || minus[static_cast<std::size_t>(g)] == 0)
            throw std::invalid_argument("svm: each group needs at least one point per class");
}

} // namespace detail

// Maximize W(A) = sum(A) - 1/2 A^T D A  s.t.  0 <= A <= C,
// sum_{i in g} A_i y_i = 0 for every group g.  D_ij = y_i y_j <x_i, x_j>.
// Stops when the largest group-wise KKT violation drops below kkt_tolerance.
template <std::size_t D>
DualSolution solve_dual(const std::vector<LabeledPoint<D>>& pts, const SvmOptions& opts = {}) {
    if (!(opts.C > 0.0)) throw std::invalid_argument("svm: C must be positive");
    int n_groups = 0;
    detail::validate_labeled(pts, n_groups);
    const std::size_t n = pts.size();

    // Center coordinates: leaves the feasible multipliers and the objective
    // unchanged (every group sums to zero) but conditions the Gram matrix.
    std::array<double, D> mu{};
    for (const auto& p : pts)
        for (std::size_t d = 0; d < D; ++d) mu[d] += p.x[d];
    for (std::size_t d = 0; d < D; ++d) mu[d] /= static_cast<double>(n);
    std::vector<std::array<double, D>> xc(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < D; ++d) xc[i][d] = pts[i].x[d] - mu[d];

    auto kernel = [&](std::size_t i, std::size_t j) { return detail::dot_d<D>(xc[i], xc[j]); };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // gradient of 1/2 A^T D A - sum(A)
    DualSolution sol;
    sol.multipliers.resize(n);

    const double C = opts.C;
    const long max_updates = opts.max_sweeps * static_cast<long>(n);
    constexpr double kEtaFloor = 1e-12;
    constexpr double kStepCap = 1e8;

    double objective = 0.0; // tracks W(A) incrementally
    if (opts.record_objective) sol.objective_trace.reserve(64);

    // The incrementally maintained gradient drifts over long runs; refresh it
    // exactly every few sweeps.
    const long refresh_every = 8 * static_cast<long>(n);
    auto refresh_gradient = [&] {
        for (std::size_t k = 0; k < n; ++k) {
            double s = -1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (alpha[j] == 0.0) continue;
                s += alpha[j] * pts[k].label * pts[j].label * kernel(k, j);
            }
            grad[k] = s;
        }
    };

    for (long iter = 0; iter < max_updates; ++iter) {
        if (iter > 0 && iter % refresh_every == 0) refresh_gradient();

        // Working pair: the most violating "up" index per group, paired with
        // the in-group "low" index of maximal second-order gain.
        double worst = 0.0;     // stopping criterion: largest group violation
        double best_gain = 0.0;
        std::size_t best_i = n, best_j = n;
        double best_step = 0.0, best_eta = 0.0, best_slope = 0.0;
        for (int g = 0; g < n_groups; ++g) {
            double up = -std::numeric_limits<double>::infinity();
            std::size_t ui = n;
            for (std::size_t k = 0; k < n; ++k) {
                if (pts[k].group != g) continue;
                const double score = -pts[k].label * grad[k];
                const bool can_up = (pts[k].label == 1) ? alpha[k] < C : alpha[k] > 0.0;
                if (can_up && score > up) { up = score; ui = k; }
            }
            if (ui == n) continue;

            double low = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < n; ++k) {
                if (pts[k].group != g) continue;
                const double score = -pts[k].label * grad[k];
                const bool can_low = (pts[k].label == 1) ? alpha[k] > 0.0 : alpha[k] < C;
                if (!can_low) continue;
                low = std::min(low, score);
                const double slope = up - score;
                if (slope <= 0.0) continue;
                double eta = kernel(ui, ui) + kernel(k, k) - 2.0 * kernel(ui, k);
                if (eta < kEtaFloor) eta = kEtaFloor;
                const double gain = slope * slope / eta;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_i = ui;
                    best_j = k;
                    best_slope = slope;
                    best_eta = eta;
                }
            }
            if (low < up) worst = std::max(worst, up - low);
        }
        if (worst < opts.kkt_tolerance || best_i == n) {
            sol.converged = true;
            break;
        }

        const std::size_t i = best_i, j = best_j;
        const double yi = pts[i].label, yj = pts[j].label;

        // Feasible direction alpha_i += yi*t, alpha_j -= yj*t keeps the group
        // sum; unconstrained optimum t* = slope / eta, then clip to box.
        double t = best_slope / best_eta;
        t = std::min(t, (yi > 0.0) ? C - alpha[i] : alpha[i]);
        t = std::min(t, (yj > 0.0) ? alpha[j] : C - alpha[j]);
        t = std::min(t, kStepCap);
        best_step = t;
        if (!(best_step > 0.0)) { sol.converged = true; break; } // boxed in

        objective += best_slope * t - 0.5 * best_eta * t * t;
        const double d_ai = yi * t, d_aj = -yj * t;
        alpha[i] += d_ai;
        alpha[j] += d_aj;
        for (std::size_t k = 0; k < n; ++k)
            grad[k] += pts[k].label * (yi * kernel(k, i) * d_ai + yj * kernel(k, j) * d_aj);
        ++sol.pair_updates;
        if (opts.record_objective) sol.objective_trace.push_back(objective);
    }

    sol.multipliers = alpha;
    // Objective recomputed from scratch at the returned point.
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0.0) continue;
        lin += alpha[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (alpha[j] == 0.0) continue;
            quad += alpha[i] * alpha[j] * pts[i].label * pts[j].label * kernel(i, j);
        }
    }
    sol.objective = lin - 0.5 * quad;

    double max_alpha = 0.0;
    for (double a : alpha) max_alpha = std::max(max_alpha, a);
    const double sv_threshold = 1e-8 * std::max(1.0, max_alpha);
    for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > sv_threshold) sol.support_indices.push_back(i);
    return sol;
}

// KKT recovery: w = sum(alpha_i y_i x_i); per-group b = mean over that
// group's support vectors of y_i - <w, x_i>; margin = 1 / ||w||.
template <std::size_t D>
Separator<D> separator_from_dual(const std::vector<LabeledPoint<D>>& pts,
                                 const DualSolution& dual) {
    if (dual.support_indices.empty())
        throw std::invalid_argument("separator_from_dual: no support vectors");
    int n_groups = 0;
    detail::validate_labeled(pts, n_groups);

    Separator<D> sep;
    for (std::size_t i : dual.support_indices)
        for (std::size_t d = 0; d < D; ++d)
            sep.w[d] += dual.multipliers[i] * pts[i].label * pts[i].x[d];

    const double norm = sep.w_norm();
    if (!(norm > 0.0)) throw std::invalid_argument("separator_from_dual: zero normal");
    sep.margin = 1.0 / norm;

    sep.offsets.assign(static_cast<std::size_t>(n_groups), 0.0);
    std::vector<long> counts(static_cast<std::size_t>(n_groups), 0);
    for (std::size_t i : dual.support_indices) {
        const auto g = static_cast<std::size_t>(pts[i].group);
        sep.offsets[g] += pts[i].label - detail::dot_d<D>(sep.w, pts[i].x);
        ++counts[g];
    }
    for (std::size_t g = 0; g < sep.offsets.size(); ++g) {
        if (counts[g] > 0) {
            sep.offsets[g] /= static_cast<double>(counts[g]);
            continue;
        }
        // A group whose constraints are all slack at the optimum (the other
        // snapshot binds the shared margin) pins no multipliers; its offset
        // is any value in the feasible interval. Take the midpoint.
        double b_lo = -std::numeric_limits<double>::infinity();
        double b_hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (static_cast<std::size_t>(pts[i].group) != g) continue;
            const double proj = detail::dot_d<D>(sep.w, pts[i].x);
            if (pts[i].label == 1)
                b_lo = std::max(b_lo, 1.0 - proj);
            else
                b_hi = std::min(b_hi, -1.0 - proj);
        }
        sep.offsets[g] = 0.5 * (b_lo + b_hi);
    }
    return sep;
}

namespace detail {

// Closing sensors sit ahead of the target, so "+" points must project
// larger than "-" points along the heading. The fit gives this already;
// flip only if a degraded soft-margin solve came out inverted.
template <std::size_t D>
bool orient_to_plus(const std::vector<LabeledPoint<D>>& pts, std::array<double, D>& w) {
    double mean_plus = 0.0, mean_minus = 0.0;
    long n_plus = 0, n_minus = 0;
    for (const auto& p : pts) {
        const double proj = dot_d<D>(w, p.x);
        if (p.label == 1) { mean_plus += proj; ++n_plus; }
        else { mean_minus += proj; ++n_minus; }
    }
    if (mean_plus / static_cast<double>(n_plus) < mean_minus / static_cast<double>(n_minus)) {
        for (double& c : w) c = -c;
        return true;
    }
    return false;
}

inline std::vector<LabeledPoint2> label_snapshot(const SensorField& field,
                                                 const std::vector<SignReport>& reports,
                                                 int group) {
    if (reports.size() != field.size())
        throw std::invalid_argument("svm: report/field length mismatch");
    std::vector<LabeledPoint2> pts;
    pts.reserve(reports.size());
    for (const auto& r : reports) {
        const Vec2& s = field.sensor(r.sensor_index);
        pts.push_back({{s.x, s.y}, r.sign, group});
    }
    return pts;
}

} // namespace detail

// Direction of a single labeled snapshot: fit, normalize, orient to "+".
inline VelocityEstimate single_snapshot_direction(const SensorField& field,
                                                  const std::vector<SignReport>& reports,
                                                  const SvmOptions& opts) {
    auto pts = detail::label_snapshot(field, reports, 0);
    auto dual = solve_dual(pts, opts);
    auto sep = separator_from_dual(pts, dual);
    bool flipped = detail::orient_to_plus(pts, sep.w);

    VelocityEstimate est;
    est.method = EstimatorMethod::Svm2d;
    est.direction = Vec2{sep.w[0], sep.w[1]}.normalized();
    est.speed = std::nullopt;
    est.degraded = !dual.converged || flipped;
    return est;
}

// Shared-normal two-snapshot fit. Snapshots are dT seconds apart. Hard margin
// that fails to converge falls back to soft margin (C = 10) with a flag.
inline std::pair<TwoPeriodSeparator, VelocityEstimate>
two_period_velocity(const SensorField& field, const std::vector<SignReport>& snap1,
                    const std::vector<SignReport>& snap2, double dt,
                    const SvmOptions& opts = {}) {
    if (!(dt > 0.0)) throw std::invalid_argument("two_period_velocity: dT must be positive");
    auto pts = detail::label_snapshot(field, snap1, 0);
    auto pts2 = detail::label_snapshot(field, snap2, 1);
    pts.insert(pts.end(), pts2.begin(), pts2.end());

    auto dual = solve_dual(pts, opts);
    bool fallback = false;
    if (!dual.converged && std::isinf(opts.C)) {
        SvmOptions soft = opts;
        soft.C = 10.0;
        dual = solve_dual(pts, soft);
        fallback = true;
    }
    auto sep = separator_from_dual(pts, dual);
    bool flipped = detail::orient_to_plus(pts, sep.w);
    if (flipped) // offsets follow the normal's sign
        for (double& b : sep.offsets) b = -b;

    TwoPeriodSeparator tps{{sep.w[0], sep.w[1]}, sep.offsets.at(0), sep.offsets.at(1)};

    VelocityEstimate est;
    est.method = EstimatorMethod::Svm2Period;
    est.direction = tps.w.normalized();
    est.speed = two_period_speed(tps, dt);
    est.degraded = fallback || flipped || !dual.converged;
    return {tps, est};
}

// 3D stairwise-plane fit over the counter field.
inline VelocityEstimate stairwise_plane_svm(const SensorField& field,
                                            const CounterField& counters,
                                            SvmOptions opts = {.C = 10.0}) {
    if (counters.size() != field.size())
        throw std::invalid_argument("stairwise_plane_svm: counter/field length mismatch");
    if (counters.periods_elapsed() < 2)
        throw std::invalid_argument("stairwise_plane_svm: need at least 2 periods");
    const auto& counts = counters.counts();
    bool varies = false;
    for (long c : counts)
        if (c != counts.front()) { varies = true; break; }
    if (!varies)
        throw std::invalid_argument("stairwise_plane_svm: no gradient in counter field");

    std::vector<LabeledPoint3> pts;
    pts.reserve(2 * field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        const Vec2& s = field.sensor(i);
        const double c = static_cast<double>(counts[i]);
        pts.push_back({{s.x, s.y, c}, -1, 0});
        pts.push_back({{s.x, s.y, c + 1.0}, +1, 0});
    }

    auto dual = solve_dual(pts, opts);
    auto sep = separator_from_dual(pts, dual);

    Vec2 w_xy{sep.w[0], sep.w[1]};
    const double w_c = sep.w[2];
    const double n_xy = w_xy.norm();
    if (!(n_xy > 0.0))
        throw std::runtime_error("stairwise_plane_svm: fitted plane carries no horizontal slope");

    Vec2 dir = w_xy.normalized();
    // Counts must increase along the heading.
    double cov = 0.0, mean_proj = 0.0, mean_c = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        mean_proj += field.sensor(i).dot(dir);
        mean_c += static_cast<double>(counts[i]);
    }
    mean_proj /= static_cast<double>(field.size());
    mean_c /= static_cast<double>(field.size());
    for (std::size_t i = 0; i < field.size(); ++i)
        cov += (field.sensor(i).dot(dir) - mean_proj) * (static_cast<double>(counts[i]) - mean_c);
    if (cov < 0.0) dir = -dir;

    VelocityEstimate est;
    est.method = EstimatorMethod::Svm3d;
    est.direction = dir;
    est.speed = std::abs(w_c) / n_xy;
    est.degraded = !dual.converged;
    return est;
}

} // namespace bsn
