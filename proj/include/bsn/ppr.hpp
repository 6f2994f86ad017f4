#pragma once
// Projection pursuit regression over the counter field.
//
// Direction search: project sensors on a candidate heading, kernel-smooth the
// counter values along the projection, force the profile non-decreasing with
// a running-maximum envelope, and score the squared residual. The heading
// minimizing the residual over a grid of unit directions (optionally refined
// by a golden-section pass) is the estimate.
//
// Speed: fit the ideal staircase template n(u) = #steps completed past the
// offset, by two-stage grid search over (offset, step width); the step width
// is the distance travelled per period, i.e. the speed.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bsn/field.hpp"
#include "bsn/observe.hpp"
#include "bsn/vec2.hpp"

namespace bsn {

enum class KernelType { Gaussian, Epanechnikov };

struct KernelConfig {
    double bandwidth = 0.0; // meters, > 0
    KernelType kernel = KernelType::Gaussian;
};

// Default bandwidth: field diagonal / sqrt(N).
inline KernelConfig default_kernel_config(const SensorField& field) {
    return {field.bounds().diagonal() / std::sqrt(static_cast<double>(field.size())),
            KernelType::Gaussian};
}

// Nadaraya-Watson estimate at u. Gaussian weights are rescaled against the
// nearest point so a lone far-away sample still normalizes instead of
// underflowing; Epanechnikov has compact support, so an empty window is a
// genuine "no local mass" condition.
inline double kernel_smooth(const std::vector<double>& projections,
                            const std::vector<double>& counts, double u,
                            const KernelConfig& cfg) {
    if (projections.empty() || projections.size() != counts.size())
        throw std::invalid_argument("kernel_smooth: empty or mismatched data");
    if (!(cfg.bandwidth > 0.0)) throw std::invalid_argument("kernel_smooth: bandwidth must be > 0");

    double num = 0.0, den = 0.0;
    if (cfg.kernel == KernelType::Gaussian) {
        double zmin = std::numeric_limits<double>::infinity();
        for (double x : projections) {
            const double r = (x - u) / cfg.bandwidth;
            zmin = std::min(zmin, 0.5 * r * r);
        }
        for (std::size_t i = 0; i < projections.size(); ++i) {
            const double r = (projections[i] - u) / cfg.bandwidth;
            const double w = std::exp(-(0.5 * r * r - zmin));
            num += counts[i] * w;
            den += w;
        }
    } else {
        for (std::size_t i = 0; i < projections.size(); ++i) {
            const double r = (projections[i] - u) / cfg.bandwidth;
            if (std::abs(r) >= 1.0) continue;
            const double w = 1.0 - r * r;
            num += counts[i] * w;
            den += w;
        }
    }
    if (!(den > 1e-30)) throw std::invalid_argument("kernel_smooth: no local mass at u");
    return num / den;
}

// Running maximum: out[i] = max(in[i], out[i-1]). Input ordered by sorted
// projection; output is non-decreasing and the map is idempotent.
inline std::vector<double> monotone_envelope(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("monotone_envelope: empty input");
    for (std::size_t i = 1; i < values.size(); ++i)
        values[i] = std::max(values[i], values[i - 1]);
    return values;
}

namespace detail {

struct ProjectedCounts {
    std::vector<double> proj;   // sorted ascending
    std::vector<double> counts; // reordered to match
};

inline ProjectedCounts project_and_sort(const SensorField& field, const CounterField& counters,
                                        const Vec2& theta) {
    const std::size_t n = field.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = field.sensor(i).dot(theta);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return raw[a] < raw[b] || (raw[a] == raw[b] && a < b);
    });
    ProjectedCounts pc;
    pc.proj.resize(n);
    pc.counts.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        pc.proj[k] = raw[order[k]];
        pc.counts[k] = static_cast<double>(counters.count(order[k]));
    }
    return pc;
}

// Smoothed profile at every sorted projection point. Identical math to
// kernel_smooth; the Epanechnikov path walks only the support window.
inline std::vector<double> smooth_profile(const ProjectedCounts& pc, const KernelConfig& cfg) {
    const std::size_t n = pc.proj.size();
    std::vector<double> out(n);
    if (cfg.kernel == KernelType::Epanechnikov) {
        const double h = cfg.bandwidth;
        std::size_t lo = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double u = pc.proj[k];
            while (lo < n && pc.proj[lo] <= u - h) ++lo;
            double num = 0.0, den = 0.0;
            for (std::size_t i = lo; i < n && pc.proj[i] < u + h; ++i) {
                const double r = (pc.proj[i] - u) / h;
                if (std::abs(r) >= 1.0) continue;
                const double w = 1.0 - r * r;
                num += pc.counts[i] * w;
                den += w;
            }
            // A sensor always sits inside its own window, so den > 0.
            out[k] = num / den;
        }
    } else {
        for (std::size_t k = 0; k < n; ++k)
            out[k] = kernel_smooth(pc.proj, pc.counts, pc.proj[k], cfg);
    }
    return out;
}

inline void require_varying(const CounterField& counters, const char* who) {
    const auto& c = counters.counts();
    for (long v : c)
        if (v != c.front()) return;
    throw std::invalid_argument(std::string(who) + ": counters are constant");
}

} // namespace detail

// Squared residual of the monotone smoothed profile against the counters,
// for one candidate heading.
inline double direction_residual(const SensorField& field, const CounterField& counters,
                                 const KernelConfig& cfg, const Vec2& theta) {
    auto pc = detail::project_and_sort(field, counters, theta);
    auto profile = monotone_envelope(detail::smooth_profile(pc, cfg));
    double sse = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double d = profile[i] - pc.counts[i];
        sse += d * d;
    }
    return sse;
}

// Tie rule for equally good headings: circular mean of the tied angles.
// An antipodal wash-out (mean vector below tolerance) deterministically
// falls back to the smallest tied angle.
inline Vec2 resolve_direction_ties(const std::vector<double>& angles) {
    if (angles.empty()) throw std::invalid_argument("resolve_direction_ties: no angles");
    double sx = 0.0, sy = 0.0;
    for (double a : angles) {
        sx += std::cos(a);
        sy += std::sin(a);
    }
    if (std::hypot(sx, sy) < 1e-12) return from_angle(angles.front());
    return Vec2{sx, sy}.normalized();
}

// Heading estimate: residual argmin over `grid` unit directions on [0, 2pi).
// Ties within 1e-9 resolve to the circular mean of the tied angles; a unique
// minimum gets one golden-section refinement inside its grid cell.
inline Vec2 fit_direction(const SensorField& field, const CounterField& counters,
                          const KernelConfig& cfg, int grid = 360, bool refine = true) {
    if (grid < 8) throw std::invalid_argument("fit_direction: grid must be >= 8");
    if (!(cfg.bandwidth > 0.0)) throw std::invalid_argument("fit_direction: bandwidth must be > 0");
    detail::require_varying(counters, "fit_direction");

    constexpr double kTie = 1e-9;
    std::vector<double> residuals(static_cast<std::size_t>(grid));
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 0; k < grid; ++k) {
        const double alpha = 2.0 * M_PI * k / grid;
        residuals[static_cast<std::size_t>(k)] =
            direction_residual(field, counters, cfg, from_angle(alpha));
        if (residuals[static_cast<std::size_t>(k)] < best) {
            best = residuals[static_cast<std::size_t>(k)];
            best_k = k;
        }
    }

    std::vector<double> tied;
    for (int k = 0; k < grid; ++k)
        if (residuals[static_cast<std::size_t>(k)] <= best + kTie)
            tied.push_back(2.0 * M_PI * k / grid);

    if (tied.size() > 1) return resolve_direction_ties(tied);

    double lo = 2.0 * M_PI * (best_k - 1) / grid;
    double hi = 2.0 * M_PI * (best_k + 1) / grid;
    if (!refine) return from_angle(0.5 * (lo + hi));
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = direction_residual(field, counters, cfg, from_angle(a));
    double fb = direction_residual(field, counters, cfg, from_angle(b));
    for (int it = 0; it < 40; ++it) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = direction_residual(field, counters, cfg, from_angle(a));
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = direction_residual(field, counters, cfg, from_angle(b));
        }
    }
    return from_angle(0.5 * (lo + hi));
}

struct StairTemplate {
    double offset = 0.0;     // projection of the first step edge
    double step_width = 0.0; // meters per period, i.e. the speed
};

struct FitSpeedResult {
    double speed = 0.0;
    StairTemplate stair;
    bool unidentifiable = false; // tied optimum extends to the search bound
    double fine_cell = 0.0;      // width of one fine-grid speed cell
};

namespace detail {

inline double stair_value(double u, double c0, double v) {
    return u < c0 ? 0.0 : std::floor((u - c0) / v) + 1.0;
}

inline double stair_residual(const ProjectedCounts& pc, double c0, double v) {
    double sse = 0.0;
    for (std::size_t i = 0; i < pc.proj.size(); ++i) {
        const double d = stair_value(pc.proj[i], c0, v) - pc.counts[i];
        sse += d * d;
    }
    return sse;
}

} // namespace detail

// Speed from the staircase template: two-stage grid search over
// (offset, step width). Ties prefer the smallest step width; a tie chain
// reaching the upper search bound flags the speed as unidentifiable.
inline FitSpeedResult fit_speed(const SensorField& field, const CounterField& counters,
                                const Vec2& theta) {
    if (std::abs(theta.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("fit_speed: theta must be a unit vector");
    detail::require_varying(counters, "fit_speed");

    auto pc = detail::project_and_sort(field, counters, theta);
    const double u_min = pc.proj.front(), u_max = pc.proj.back();
    const double range = u_max - u_min;
    if (!(range > 1e-9)) throw std::invalid_argument("fit_speed: degenerate projection range");

    const double periods = static_cast<double>(std::max<long>(counters.periods_elapsed(), 1));
    const double v_min = range / (periods * 50.0);
    const double v_max = range;

    constexpr int kCoarse = 64;
    constexpr double kTie = 1e-9;
    const double cell_c = range / (kCoarse - 1);
    const double cell_v = (v_max - v_min) / (kCoarse - 1);

    double best = std::numeric_limits<double>::infinity();
    double best_c0 = u_min, best_v = v_min, tied_v_max = v_min;
    for (int iv = 0; iv < kCoarse; ++iv) {
        const double v = v_min + iv * cell_v;
        for (int ic = 0; ic < kCoarse; ++ic) {
            const double c0 = u_min + ic * cell_c;
            const double r = detail::stair_residual(pc, c0, v);
            if (r < best - kTie) {
                best = r;
                best_v = v;
                best_c0 = c0;
                tied_v_max = v;
            } else if (r <= best + kTie) {
                tied_v_max = std::max(tied_v_max, v);
            }
        }
    }

    FitSpeedResult out;
    out.unidentifiable = tied_v_max >= v_max - cell_v - kTie;

    constexpr int kFine = 33;
    const double fine_lo_v = std::max(v_min, best_v - cell_v);
    const double fine_hi_v = std::min(v_max, best_v + cell_v);
    const double fine_lo_c = std::max(u_min, best_c0 - cell_c);
    const double fine_hi_c = std::min(u_max, best_c0 + cell_c);
    const double fcell_v = (fine_hi_v - fine_lo_v) / (kFine - 1);
    const double fcell_c = (fine_hi_c - fine_lo_c) / (kFine - 1);
    double fbest = std::numeric_limits<double>::infinity();
    double fbest_v = best_v, fbest_c0 = best_c0;
    for (int iv = 0; iv < kFine; ++iv) {
        const double v = fine_lo_v + iv * fcell_v;
        for (int ic = 0; ic < kFine; ++ic) {
            const double c0 = fine_lo_c + ic * fcell_c;
            const double r = detail::stair_residual(pc, c0, v);
            if (r < fbest - kTie) {
                fbest = r;
                fbest_v = v;
                fbest_c0 = c0;
            }
        }
    }

    out.speed = fbest_v;
    out.stair = {fbest_c0, fbest_v};
    out.fine_cell = fcell_v;
    return out;
}

} // namespace bsn
