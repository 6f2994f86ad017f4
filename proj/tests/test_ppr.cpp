#include <catch2/catch.hpp>

#include <cmath>

#include "bsn/ppr.hpp"
#include "support/oracles.hpp"

using namespace bsn;

namespace {

SensorField dense_grid(double spacing, double extent) {
    std::vector<Vec2> sensors;
    const int n = static_cast<int>(extent / spacing);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sensors.push_back({0.2371 + i * spacing, 0.5417 + j * spacing});
    return SensorField(sensors, Rect{{0.0, 0.0}, {extent, extent}});
}

} // namespace

TEST_CASE("kernel_smooth basics") {
    const KernelConfig g{1.0, KernelType::Gaussian};

    SECTION("single point returns its value anywhere") {
        for (double u : {-50.0, 0.0, 3.0, 50.0})
            CHECK(kernel_smooth({0.0}, {3.0}, u, g) == Approx(3.0));
    }
    SECTION("constant counts return the constant") {
        const std::vector<double> proj{0.0, 1.0, 2.5, 4.0};
        const std::vector<double> counts(4, 7.5);
        for (double u : {0.0, 1.7, 4.0}) CHECK(kernel_smooth(proj, counts, u, g) == Approx(7.5));
    }
    SECTION("symmetric kernel at the midpoint averages two points") {
        CHECK(kernel_smooth({0.0, 1.0}, {0.0, 10.0}, 0.5, g) == Approx(5.0));
        const KernelConfig e{2.0, KernelType::Epanechnikov};
        CHECK(kernel_smooth({0.0, 1.0}, {0.0, 10.0}, 0.5, e) == Approx(5.0));
    }
    SECTION("stays within the data range") {
        Rng rng(5u);
        std::vector<double> proj, counts;
        for (int i = 0; i < 30; ++i) {
            proj.push_back(rng.uniform(0.0, 10.0));
            counts.push_back(rng.uniform(0.0, 20.0));
        }
        const double lo = *std::min_element(counts.begin(), counts.end());
        const double hi = *std::max_element(counts.begin(), counts.end());
        for (int i = 0; i < 20; ++i) {
            const double f = kernel_smooth(proj, counts, rng.uniform(0.0, 10.0), g);
            CHECK(f >= lo - 1e-12);
            CHECK(f <= hi + 1e-12);
        }
    }
    SECTION("error paths") {
        CHECK_THROWS_AS(kernel_smooth({}, {}, 0.0, g), std::invalid_argument);
        const KernelConfig e{0.5, KernelType::Epanechnikov};
        CHECK_THROWS_AS(kernel_smooth({0.0}, {3.0}, 10.0, e), std::invalid_argument);
        CHECK_THROWS_AS(kernel_smooth({0.0}, {3.0}, 0.0, KernelConfig{0.0, KernelType::Gaussian}),
                        std::invalid_argument);
    }
}

TEST_CASE("monotone_envelope") {
    CHECK(monotone_envelope({1.0, 0.5, 2.0}) == std::vector<double>{1.0, 1.0, 2.0});
    CHECK(monotone_envelope({3.0, 2.0, 1.0}) == std::vector<double>{3.0, 3.0, 3.0});
    const std::vector<double> sorted{0.0, 1.0, 1.0, 4.0};
    CHECK(monotone_envelope(sorted) == sorted); // already non-decreasing: unchanged

    SECTION("idempotent and order-preserving") {
        Rng rng(9u);
        std::vector<double> a, b;
        for (int i = 0; i < 40; ++i) {
            const double base = rng.uniform(0.0, 10.0);
            a.push_back(base);
            b.push_back(base + rng.uniform(0.0, 2.0)); // b >= a pointwise
        }
        const auto ea = monotone_envelope(a);
        CHECK(monotone_envelope(ea) == ea);
        const auto eb = monotone_envelope(b);
        for (std::size_t i = 0; i < ea.size(); ++i) {
            CHECK(ea[i] <= eb[i]);
            if (i > 0) CHECK(ea[i] >= ea[i - 1]);
        }
    }
    CHECK_THROWS_AS(monotone_envelope({}), std::invalid_argument);
}

TEST_CASE("fit_direction recovers synthetic staircase headings") {
    const auto field = dense_grid(4.0, 120.0);
    const KernelConfig cfg = default_kernel_config(field);
    const int grid = 180;

    SECTION("direction (1,2)/sqrt(5)") {
        const Vec2 dir = Vec2{1.0, 2.0}.normalized();
        const auto counters = oracle::synthetic_stairs(field, dir, std::sqrt(5.0), 0.0, 200);
        const Vec2 est = fit_direction(field, counters, cfg, grid);
        CHECK(angle_between(est, dir) <= 2.0 * M_PI / grid);
    }
    SECTION("due east") {
        const auto counters = oracle::synthetic_stairs(field, {1.0, 0.0}, 2.0, 0.0, 200);
        const Vec2 est = fit_direction(field, counters, cfg, grid);
        CHECK(angle_between(est, {1.0, 0.0}) <= 2.0 * M_PI / grid);
    }
    SECTION("deterministic on repeat calls") {
        const auto counters = oracle::synthetic_stairs(field, {0.6, 0.8}, 3.0, 10.0, 200);
        const Vec2 a = fit_direction(field, counters, cfg, grid);
        const Vec2 b = fit_direction(field, counters, cfg, grid);
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
    }
}

TEST_CASE("direction tie rule") {
    SECTION("mirror pair averages to the bisector") {
        const Vec2 r = resolve_direction_ties({M_PI / 4.0, 3.0 * M_PI / 4.0});
        CHECK(r.x == Approx(0.0).margin(1e-12));
        CHECK(r.y == Approx(1.0));
    }
    SECTION("antipodal pair falls back deterministically") {
        const Vec2 a = resolve_direction_ties({0.0, M_PI});
        const Vec2 b = resolve_direction_ties({0.0, M_PI});
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        CHECK(a.x == Approx(1.0)); // smallest tied angle
    }
    SECTION("clustered angles average") {
        const Vec2 r = resolve_direction_ties({0.1, 0.2});
        CHECK(std::atan2(r.y, r.x) == Approx(0.15).margin(1e-12));
    }
}

TEST_CASE("fit_direction is rotation-equivariant up to grid resolution") {
    const auto field = dense_grid(6.0, 120.0);
    const KernelConfig cfg = default_kernel_config(field);
    const Vec2 dir_a = Vec2{1.0, 0.3}.normalized();
    const auto counters_a = oracle::synthetic_stairs(field, dir_a, 2.5, 0.0, 200);
    const Vec2 est_a = fit_direction(field, counters_a, cfg, 90);

    const double phi = M_PI / 5.0;
    const Vec2 dir_b = from_angle(std::atan2(dir_a.y, dir_a.x) + phi);
    const auto counters_b = oracle::synthetic_stairs(field, dir_b, 2.5, 0.0, 200);
    const Vec2 est_b = fit_direction(field, counters_b, cfg, 90);

    const double angle_a = std::atan2(est_a.y, est_a.x);
    const double angle_b = std::atan2(est_b.y, est_b.x);
    const double diff = std::atan2(std::sin(angle_b - angle_a), std::cos(angle_b - angle_a));
    CHECK(std::abs(diff - phi) <= 2.0 * (2.0 * M_PI / 90.0));
}

TEST_CASE("fit_direction rejects bad input") {
    const auto field = dense_grid(10.0, 60.0);
    const CounterField flat(std::vector<long>(field.size(), 2), 5);
    const KernelConfig cfg = default_kernel_config(field);
    CHECK_THROWS_AS(fit_direction(field, flat, cfg, 90), std::invalid_argument);
    const auto counters = oracle::synthetic_stairs(field, {1.0, 0.0}, 2.0, 0.0, 50);
    CHECK_THROWS_AS(fit_direction(field, counters, cfg, 4), std::invalid_argument);
}

TEST_CASE("fit_speed recovers the synthetic step width") {
    const auto field = dense_grid(3.0, 120.0);

    SECTION("step width 2 within one fine-grid cell") {
        const auto counters = oracle::synthetic_stairs(field, {1.0, 0.0}, 2.0, 0.0, 200);
        const auto fit = fit_speed(field, counters, {1.0, 0.0});
        CHECK_FALSE(fit.unidentifiable);
        CHECK(std::abs(fit.speed - 2.0) <= fit.fine_cell + 1e-12);
    }
    SECTION("spatial scaling doubles the estimate") {
        const auto counters = oracle::synthetic_stairs(field, {1.0, 0.0}, 2.0, 0.0, 200);
        const auto base = fit_speed(field, counters, {1.0, 0.0});

        std::vector<Vec2> stretched;
        for (const auto& s : field.sensors()) stretched.push_back(2.0 * s);
        const SensorField field2(stretched, Rect{{0.0, 0.0}, {240.0, 240.0}});
        const auto counters2 = oracle::synthetic_stairs(field2, {1.0, 0.0}, 4.0, 0.0, 200);
        const auto scaled = fit_speed(field2, counters2, {1.0, 0.0});
        CHECK(scaled.speed == Approx(2.0 * base.speed).epsilon(0.05));
    }
    SECTION("single visible step edge is unidentifiable beyond a bound") {
        // Counters 0 on the left half, 1 on the right: any step width wider
        // than the populated right half fits exactly.
        std::vector<long> counts(field.size());
        double edge = 60.0;
        double right_min = 1e9, right_max = -1e9;
        for (std::size_t i = 0; i < field.size(); ++i) {
            counts[i] = field.sensor(i).x >= edge ? 1 : 0;
            if (counts[i] == 1) {
                right_min = std::min(right_min, field.sensor(i).x);
                right_max = std::max(right_max, field.sensor(i).x);
            }
        }
        const CounterField one_step(std::move(counts), 1);
        const auto fit = fit_speed(field, one_step, {1.0, 0.0});
        CHECK(fit.unidentifiable);
        CHECK(fit.speed >= (right_max - right_min) - fit.fine_cell - 1e-9);
    }
    SECTION("error paths") {
        const auto counters = oracle::synthetic_stairs(field, {1.0, 0.0}, 2.0, 0.0, 200);
        CHECK_THROWS_AS(fit_speed(field, counters, {2.0, 0.0}), std::invalid_argument);
        const CounterField flat(std::vector<long>(field.size(), 1), 3);
        CHECK_THROWS_AS(fit_speed(field, flat, {1.0, 0.0}), std::invalid_argument);
    }
}
