#pragma once
// Sensor field: a fixed set of sensor positions on a rectangular region.
// Sensor indices are stable for the life of a scenario.

#include <stdexcept>
#include <vector>

#include "bsn/random.hpp"
#include "bsn/vec2.hpp"

namespace bsn {

struct Rect {
    Vec2 min;
    Vec2 max;

    bool degenerate() const {
        return !min.finite() || !max.finite() || !(min.x < max.x) || !(min.y < max.y);
    }
    bool contains(const Vec2& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    double diagonal() const { return (max - min).norm(); }
};

class SensorField {
  public:
    SensorField(std::vector<Vec2> sensors, Rect bounds)
        : sensors_(std::move(sensors)), bounds_(bounds) {
        if (bounds_.degenerate())
            throw std::invalid_argument("SensorField: degenerate bounds");
        if (sensors_.size() < 3)
            throw std::invalid_argument("SensorField: at least 3 sensors required");
        for (const auto& s : sensors_) {
            require_finite(s, "SensorField sensor");
            if (!bounds_.contains(s))
                throw std::invalid_argument("SensorField: sensor outside bounds");
        }
    }

    const std::vector<Vec2>& sensors() const { return sensors_; }
    const Vec2& sensor(std::size_t i) const { return sensors_.at(i); }
    std::size_t size() const { return sensors_.size(); }
    const Rect& bounds() const { return bounds_; }

  private:
    std::vector<Vec2> sensors_;
    Rect bounds_;
};

// n i.i.d. uniform positions over bounds, deterministic for a fixed stream.
inline SensorField sample_field(std::size_t n, const Rect& bounds, Rng rng) {
    if (n < 3) throw std::invalid_argument("sample_field: n must be >= 3");
    if (bounds.degenerate()) throw std::invalid_argument("sample_field: degenerate bounds");
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform(bounds.min.x, bounds.max.x);
        const double y = rng.uniform(bounds.min.y, bounds.max.y);
        pts.push_back({x, y});
    }
    return SensorField(std::move(pts), bounds);
}

inline SensorField sample_field(std::size_t n, const Rect& bounds, std::uint64_t seed) {
    return sample_field(n, bounds, Rng(seed).derive("field"));
}

} // namespace bsn
