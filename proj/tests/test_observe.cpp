#include <catch2/catch.hpp>

#include <algorithm>

#include "bsn/observe.hpp"
#include "support/oracles.hpp"

using namespace bsn;

TEST_CASE("sign_at follows the range-rate criterion") {
    const TargetState t{{0.0, 0.0}, {1.0, 0.0}, 0.0};
    CHECK(sign_at({5.0, 0.0}, t) == +1);  // ahead, range closing
    CHECK(sign_at({-5.0, 0.0}, t) == -1); // behind, range opening
    CHECK(sign_at({0.0, 5.0}, t) == -1);  // orthogonal: tie broken to -1
    CHECK_THROWS_AS(sign_at({1.0, 1.0}, TargetState{{0.0, 0.0}, {0.0, 0.0}, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("snapshot labels split by projection") {
    const Rect bounds{{-10.0, -10.0}, {10.0, 10.0}};
    const SensorField field({{-7.0, 0.0}, {2.0, 0.0}, {6.0, 0.0}}, bounds);
    const TargetState t{{0.0, 0.0}, {1.0, 0.0}, 0.0};
    const auto reports = snapshot(field, t);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].sensor_index == 0);
    CHECK(reports[0].sign == -1);
    CHECK(reports[1].sign == +1);
    CHECK(reports[2].sign == +1);

    const TargetState ahead{{20.0, 0.0}, {1.0, 0.0}, 0.0};
    for (const auto& r : snapshot(field, ahead)) CHECK(r.sign == -1);
    const TargetState behind{{-20.0, 0.0}, {1.0, 0.0}, 0.0};
    for (const auto& r : snapshot(field, behind)) CHECK(r.sign == +1);
}

TEST_CASE("snapshots are deterministic") {
    const auto field = sample_field(40, Rect{{0.0, 0.0}, {100.0, 100.0}}, 5u);
    const TargetState t{{50.0, 50.0}, {1.0, 2.0}, 0.0};
    const auto a = snapshot(field, t);
    const auto b = snapshot(field, t);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].sign == b[i].sign);
}

TEST_CASE("flip noise") {
    const auto field = sample_field(10000, Rect{{0.0, 0.0}, {100.0, 100.0}}, 8u);
    const TargetState t{{50.0, 50.0}, {1.0, 0.0}, 0.0};
    const auto clean = snapshot(field, t);

    SECTION("p = 1 is the identity") {
        Rng rng = Rng(1u).derive("flip");
        const auto noisy = apply_flip_noise(clean, 1.0, rng);
        for (std::size_t i = 0; i < clean.size(); ++i) CHECK(noisy[i].sign == clean[i].sign);
    }
    SECTION("p = 0.5 flips about half, within 3 sigma") {
        Rng rng = Rng(2u).derive("flip");
        const auto noisy = apply_flip_noise(clean, 0.5, rng);
        long flips = 0;
        for (std::size_t i = 0; i < clean.size(); ++i)
            if (noisy[i].sign != clean[i].sign) ++flips;
        const double frac = static_cast<double>(flips) / 10000.0;
        CHECK(std::abs(frac - 0.5) < 3.0 * std::sqrt(0.25 / 10000.0));
    }
    SECTION("p outside (0, 1] is rejected") {
        Rng rng(3u);
        CHECK_THROWS_AS(apply_flip_noise(clean, 0.0, rng), std::invalid_argument);
        CHECK_THROWS_AS(apply_flip_noise(clean, 1.5, rng), std::invalid_argument);
    }
}

TEST_CASE("update_counters counts plus reports") {
    CounterField c(1);
    const std::vector<int> signs{+1, +1, -1, +1};
    for (int s : signs) c = update_counters(std::move(c), {{0, 0.0, s}});
    CHECK(c.count(0) == 3);
    CHECK(c.periods_elapsed() == 4);

    CounterField all_minus(3);
    for (int k = 0; k < 5; ++k)
        all_minus = update_counters(std::move(all_minus),
                                    {{0, 0.0, -1}, {1, 0.0, -1}, {2, 0.0, -1}});
    for (std::size_t i = 0; i < 3; ++i) CHECK(all_minus.count(i) == 0);
    CHECK(all_minus.periods_elapsed() == 5);

    CounterField mismatch(2);
    CHECK_THROWS_AS(update_counters(std::move(mismatch), {{0, 0.0, +1}}),
                    std::invalid_argument);
}

TEST_CASE("counter field constructor validates the bound invariant") {
    CHECK_NOTHROW(CounterField({0, 3, 5}, 5));
    CHECK_THROWS_AS(CounterField({0, 6}, 5), std::invalid_argument);
    CHECK_THROWS_AS(CounterField({-1, 0}, 5), std::invalid_argument);
}

TEST_CASE("cv counters match the closed-form crossing-time oracle") {
    const Rect bounds{{0.0, 0.0}, {200.0, 200.0}};
    const auto field = sample_field(150, bounds, 21u);
    const Vec2 x0{10.0, 15.0};
    const Vec2 v{1.5, 1.0};
    const double period = 1.0;
    const long periods = 90;

    CounterField counters(field.size());
    const TrajectoryModel model = ConstantVelocity{x0, v};
    for (long k = 0; k < periods; ++k) {
        const auto st = trajectory_state(model, static_cast<double>(k) * period);
        counters = update_counters(std::move(counters), snapshot(field, st));
    }

    const Vec2 dir = v.normalized();
    std::vector<std::size_t> order(field.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return field.sensor(a).dot(dir) < field.sensor(b).dot(dir);
    });

    long prev = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        CHECK(counters.count(i) == oracle::cv_count(field.sensor(i), x0, v, period, periods));
        CHECK(counters.count(i) >= prev); // non-decreasing along the heading
        CHECK(counters.count(i) <= counters.periods_elapsed());
        prev = counters.count(i);
    }
}

TEST_CASE("feasible_slab bounds") {
    const Rect bounds{{0.0, -1.0}, {10.0, 1.0}};
    const SensorField field({{1.0, 0.0}, {2.0, 0.0}, {5.0, 0.0}, {7.0, 0.0}}, bounds);
    const std::vector<SignReport> reports{
        {0, 0.0, -1}, {1, 0.0, -1}, {2, 0.0, +1}, {3, 0.0, +1}};
    const auto slab = feasible_slab(field, reports, {1.0, 0.0});
    CHECK(slab.lower == Approx(2.0));
    CHECK(slab.upper == Approx(5.0));
    CHECK_FALSE(slab.unbounded);
    CHECK(slab.midpoint() == Approx(3.5));

    const std::vector<SignReport> all_plus{
        {0, 0.0, +1}, {1, 0.0, +1}, {2, 0.0, +1}, {3, 0.0, +1}};
    const auto open = feasible_slab(field, all_plus, {1.0, 0.0});
    CHECK(open.unbounded);
    CHECK(open.lower == -std::numeric_limits<double>::infinity());
}

TEST_CASE("slab contains the true projection every period, noiseless") {
    const Rect bounds{{0.0, 0.0}, {120.0, 120.0}};
    const auto field = sample_field(80, bounds, 33u);
    const Vec2 v{1.0, 0.5};
    const Vec2 dir = v.normalized();
    const TrajectoryModel model = ConstantVelocity{{20.0, 30.0}, v};
    for (long k = 0; k < 30; ++k) {
        const auto st = trajectory_state(model, static_cast<double>(k));
        const auto slab = feasible_slab(field, snapshot(field, st), dir);
        if (slab.unbounded) continue; // target off the populated strip
        const double proj = st.position.dot(dir);
        CHECK(proj > slab.lower);
        CHECK(proj < slab.upper);
    }
}
