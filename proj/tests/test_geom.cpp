#include <catch2/catch.hpp>

#include "bsn/field.hpp"
#include "bsn/random.hpp"
#include "bsn/trajectory.hpp"
#include "bsn/vec2.hpp"

using namespace bsn;

TEST_CASE("sample_field is deterministic and contained") {
    const Rect unit{{0.0, 0.0}, {1.0, 1.0}};
    const auto a = sample_field(3, unit, 7u);
    const auto b = sample_field(3, unit, 7u);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(unit.contains(a.sensor(i)));
        CHECK(a.sensor(i).x == b.sensor(i).x);
        CHECK(a.sensor(i).y == b.sensor(i).y);
    }
}

TEST_CASE("sample_field empirical mean matches uniform moments") {
    const Rect bounds{{0.0, 0.0}, {300.0, 300.0}};
    const auto field = sample_field(100, bounds, 42u);
    Vec2 mean{0.0, 0.0};
    for (const auto& s : field.sensors()) mean += s;
    mean *= 1.0 / 100.0;
    // sigma of the mean of 100 uniforms on [0, 300]: (300/sqrt(12))/10
    const double three_sigma = 3.0 * (300.0 / std::sqrt(12.0)) / 10.0;
    CHECK(std::abs(mean.x - 150.0) < three_sigma);
    CHECK(std::abs(mean.y - 150.0) < three_sigma);
}

TEST_CASE("sample_field rejects bad inputs") {
    const Rect unit{{0.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(sample_field(2, unit, 1u), std::invalid_argument);
    CHECK_THROWS_AS(sample_field(5, Rect{{1.0, 0.0}, {1.0, 1.0}}, 1u), std::invalid_argument);
}

TEST_CASE("sensor field invariants") {
    const Rect unit{{0.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(SensorField({{0.1, 0.1}, {0.2, 0.2}, {1.5, 0.5}}, unit),
                    std::invalid_argument);
    CHECK_THROWS_AS(SensorField({{0.1, 0.1}, {0.2, 0.2}}, unit), std::invalid_argument);
}

TEST_CASE("trajectory_state closed forms") {
    SECTION("constant velocity") {
        const TrajectoryModel m = ConstantVelocity{{0.0, 0.0}, {1.0, 2.0}};
        const auto s = trajectory_state(m, 3.0);
        CHECK(s.position.x == Approx(3.0));
        CHECK(s.position.y == Approx(6.0));
        CHECK(s.velocity.x == Approx(1.0));
        CHECK(s.velocity.y == Approx(2.0));
    }
    SECTION("constant acceleration carries the unit quadratic coefficient") {
        const TrajectoryModel m = ConstantAcceleration{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
        const auto s = trajectory_state(m, 2.0);
        CHECK(s.position.x == Approx(2.0));
        CHECK(s.position.y == Approx(4.0)); // t^2 * 1, not t^2 / 2
        CHECK(s.velocity.x == Approx(1.0));
        CHECK(s.velocity.y == Approx(2.0));
    }
    SECTION("multi-leg piecewise integration, right-continuous at epochs") {
        const TrajectoryModel m =
            MultiLeg{{0.0, 0.0}, {{{1.0, 0.0}, 5.0}, {{0.0, 1.0}, 10.0}}};
        const auto s = trajectory_state(m, 7.0);
        CHECK(s.position.x == Approx(5.0));
        CHECK(s.position.y == Approx(2.0));
        CHECK(s.velocity.x == Approx(0.0));
        CHECK(s.velocity.y == Approx(1.0));

        const auto at_epoch = trajectory_state(m, 5.0);
        CHECK(at_epoch.velocity.y == Approx(1.0)); // new leg's velocity
    }
    SECTION("rejects stochastic model and negative time") {
        const TrajectoryModel walk = GaussianRandomWalk{{0.0, 0.0}, {1.0, 1.0}};
        CHECK_THROWS_AS(trajectory_state(walk, 1.0), std::invalid_argument);
        const TrajectoryModel cv = ConstantVelocity{{0.0, 0.0}, {1.0, 0.0}};
        CHECK_THROWS_AS(trajectory_state(cv, -1.0), std::invalid_argument);
    }
}

TEST_CASE("constant velocity displacement identity") {
    const Vec2 v{1.5, -0.75};
    const TrajectoryModel m = ConstantVelocity{{10.0, 20.0}, v};
    Rng rng(3u);
    for (int i = 0; i < 50; ++i) {
        const double t = rng.uniform(0.0, 100.0);
        const double s = rng.uniform(0.0, 100.0);
        const Vec2 d = trajectory_state(m, t + s).position - trajectory_state(m, t).position;
        CHECK(d.x == Approx(s * v.x).margin(1e-9));
        CHECK(d.y == Approx(s * v.y).margin(1e-9));
    }
}

TEST_CASE("single-leg multi-leg equals constant velocity") {
    const TrajectoryModel ml = MultiLeg{{1.0, 2.0}, {{{0.5, 0.25}, 40.0}}};
    const TrajectoryModel cv = ConstantVelocity{{1.0, 2.0}, {0.5, 0.25}};
    for (double t : {0.0, 1.0, 7.5, 39.9}) {
        const auto a = trajectory_state(ml, t);
        const auto b = trajectory_state(cv, t);
        CHECK(a.position.x == Approx(b.position.x));
        CHECK(a.position.y == Approx(b.position.y));
        CHECK(a.velocity.x == Approx(b.velocity.x));
        CHECK(a.velocity.y == Approx(b.velocity.y));
    }
}

TEST_CASE("model validation rejects broken invariants") {
    CHECK_THROWS_AS(validate(TrajectoryModel(ConstantVelocity{{0.0, 0.0}, {0.0, 0.0}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        validate(TrajectoryModel(MultiLeg{{0.0, 0.0}, {{{1.0, 0.0}, 5.0}, {{0.0, 1.0}, 5.0}}})),
        std::invalid_argument);

    GaussianRandomWalk bad_sym;
    bad_sym.Q.at(0, 1) = 1.0; // asymmetric
    CHECK_THROWS_AS(validate(TrajectoryModel(bad_sym)), std::invalid_argument);

    GaussianRandomWalk bad_psd;
    bad_psd.Q = Mat4::diag(1.0, 1.0, 1.0, -1.0);
    CHECK_THROWS_AS(validate(TrajectoryModel(bad_psd)), std::invalid_argument);
}

TEST_CASE("random walk with zero noise is the deterministic recurrence") {
    Rng rng(11u);
    SECTION("identity transition") {
        const TargetState s0{{3.0, 4.0}, {1.0, -1.0}, 0.0};
        const auto s1 = step_random_walk(s0, Mat4::identity(), Mat4::zero(), rng);
        CHECK(s1.position.x == s0.position.x);
        CHECK(s1.position.y == s0.position.y);
        CHECK(s1.velocity.x == s0.velocity.x);
        CHECK(s1.velocity.y == s0.velocity.y);
        CHECK(s1.time == Approx(1.0));
    }
    SECTION("cv transition advances position by velocity") {
        const TargetState s0{{3.0, 4.0}, {1.0, -1.0}, 0.0};
        const auto s1 = step_random_walk(s0, Mat4::cv_transition(1.0), Mat4::zero(), rng);
        CHECK(s1.position.x == Approx(4.0));
        CHECK(s1.position.y == Approx(3.0));
        CHECK(s1.velocity.x == Approx(1.0));
        CHECK(s1.velocity.y == Approx(-1.0));
    }
}

TEST_CASE("random walk innovation covariance matches Q") {
    const Mat4 Q = Mat4::diag(1.0, 1.0, 0.01, 0.01);
    const Mat4 F = Mat4::cv_transition(1.0);
    Rng rng = Rng(99u).derive("walk");

    const int n = 10000;
    std::vector<std::array<double, 4>> innovations;
    innovations.reserve(n);
    TargetState s{{0.0, 0.0}, {1.0, 1.0}, 0.0};
    for (int k = 0; k < n; ++k) {
        const std::array<double, 4> prev{s.position.x, s.position.y, s.velocity.x, s.velocity.y};
        const auto mean = F.apply(prev);
        s = step_random_walk(s, F, Q, rng);
        innovations.push_back({s.position.x - mean[0], s.position.y - mean[1],
                               s.velocity.x - mean[2], s.velocity.y - mean[3]});
    }
    for (int d = 0; d < 4; ++d) {
        double var = 0.0;
        for (const auto& inn : innovations) var += inn[static_cast<std::size_t>(d)] * inn[static_cast<std::size_t>(d)];
        var /= n;
        CHECK(var == Approx(Q.at(d, d)).epsilon(0.10));
    }
}

TEST_CASE("derived rng streams are independent and reproducible") {
    Rng base(17u);
    Rng a = base.derive("field");
    Rng b = base.derive("flip");
    Rng a2 = Rng(17u).derive("field");
    CHECK(a.next_u64() == a2.next_u64());
    CHECK(a.next_u64() != b.next_u64()); // distinct tags give distinct streams
}
