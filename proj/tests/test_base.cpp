#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cocyclab/base.hpp"
#include "cocyclab/errors.hpp"
#include "support.hpp"

#include <cmath>

using namespace cocyclab;

TEST_CASE("rotation step moves by the angle") {
  const BaseSystem sys = circle_rotation(0.3);
  CHECK(step(sys, make_point({0.0}))(0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(step(sys, make_point({0.9}))(0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(step(circle_rotation(), make_point({0.0}))(0) == doctest::Approx(golden_angle).epsilon(1e-15));
}

TEST_CASE("step with k = 0 is the identity") {
  testing::Gen g(1);
  for (const BaseSystem& sys : {circle_rotation(), torus_translation(), cat_map()}) {
    const BasePoint x = g.point(sys);
    CHECK((step(sys, x, 0) - x).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("cat map on a dyadic point") {
  // (2 1; 1 1) (0.5, 0.5) = (1.5, 1.0) = (0.5, 0) mod 1
  const BasePoint y = step(cat_map(), make_point({0.5, 0.5}));
  CHECK(y(0) == 0.5);
  CHECK(y(1) == 0.0);
}

TEST_CASE("step is invertible") {
  testing::Gen g(17);
  for (const BaseSystem& sys : {circle_rotation(), torus_translation(), cat_map()}) {
    for (int t = 0; t < 1000; ++t) {
      const BasePoint x = g.point(sys);
      const int k = g.integer(-500, 500);
      const BasePoint back = step(sys, step(sys, x, k), -k);
      REQUIRE(distance(sys, back, x) < 1e-12);
    }
  }
}

TEST_CASE("torus distance") {
  CHECK(distance(circle_rotation(), make_point({0.3}), make_point({0.3})) == 0.0);
  CHECK(distance(circle_rotation(), make_point({0.1}), make_point({0.9})) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(distance(torus_translation(), make_point({0.0, 0.0}), make_point({0.5, 0.5})) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(diameter(circle_rotation()) == 0.5);
  CHECK(diameter(cat_map()) == doctest::Approx(std::sqrt(2.0) / 2.0));
}

TEST_CASE("distance is a metric on random triples") {
  testing::Gen g(5);
  const BaseSystem sys = torus_translation();
  for (int t = 0; t < 500; ++t) {
    const BasePoint x = g.point(sys);
    const BasePoint y = g.point(sys);
    const BasePoint z = g.point(sys);
    CHECK(distance(sys, x, y) == distance(sys, y, x));
    CHECK(distance(sys, x, z) <= distance(sys, x, y) + distance(sys, y, z) + 1e-15);
    CHECK(distance(sys, x, y) <= diameter(sys) + 1e-15);
  }
}

TEST_CASE("sample_measure is deterministic") {
  const auto a = sample_measure(circle_rotation(), 1, 3);
  const auto b = sample_measure(circle_rotation(), 1, 3);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i](0) == b[i](0));
  CHECK(sample_measure(circle_rotation(), 2, 1)[0](0) != a[0](0));
  CHECK_THROWS_AS(sample_measure(circle_rotation(), 1, 0), PreconditionError);
}

TEST_CASE("sample_measure puts the Lebesgue mass of an arc") {
  const BaseSystem sys = circle_rotation();
  const auto pts = sample_measure(sys, 9, 100000);
  const BasePoint c = make_point({0.37});
  double inside = 0;
  for (const auto& x : pts) inside += distance(sys, x, c) < 0.1 ? 1 : 0;
  CHECK(inside / 1e5 == doctest::Approx(0.2).epsilon(0.05));  // 0.2 +- 0.01
}

TEST_CASE("every base map preserves the measure of a ball") {
  for (const BaseSystem& sys : {circle_rotation(), torus_translation(), cat_map()}) {
    const auto pts = sample_measure(sys, 21, 100000);
    const BasePoint c = sys.dim() == 1 ? make_point({0.4}) : make_point({0.4, 0.6});
    const double r = 0.15;
    double in_b = 0;
    double in_pre = 0;  // x in f^-1(B) iff f(x) in B
    for (const auto& x : pts) {
      in_b += distance(sys, x, c) < r ? 1 : 0;
      in_pre += distance(sys, step(sys, x), c) < r ? 1 : 0;
    }
    const double p = in_b / 1e5;
    const double se = std::sqrt(p * (1 - p) / 1e5);
    CHECK(std::abs(in_pre - in_b) / 1e5 < 3 * std::sqrt(2.0) * se);
  }
}

TEST_CASE("rotation orbits are dense at scale 1e-2") {
  const BaseSystem sys = circle_rotation();
  testing::Gen g(3);
  for (int t = 0; t < 5; ++t) {
    std::vector<bool> hit(100, false);
    BasePoint x = g.point(sys);
    for (int j = 0; j < 10000; ++j, x = step(sys, x)) hit[static_cast<std::size_t>(x(0) * 100)] = true;
    CHECK(std::count(hit.begin(), hit.end(), false) == 0);
  }
}

TEST_CASE("Kac mean return time on the rotation") {
  const ReturnStats s = return_time_stats(circle_rotation(), make_point({0.25}), 0.05, make_point({0.1}), 100000);
  CHECK(s.mean_return == doctest::Approx(10.0).epsilon(0.1));
  CHECK(s.visit_fraction == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("a ball covering the space is visited every step") {
  const ReturnStats s = return_time_stats(circle_rotation(), make_point({0.25}), 0.6, make_point({0.1}), 1000);
  CHECK(s.mean_return == 1.0);
  CHECK(s.visit_count == 1000);
}

TEST_CASE("return_time_stats rejects an empty horizon") {
  CHECK_THROWS_AS(return_time_stats(circle_rotation(), make_point({0.2}), 0.05, make_point({0.1}), 0),
                  PreconditionError);
}

TEST_CASE("period detection") {
  CHECK_FALSE(period_of(circle_rotation(), make_point({0.3}), 20).has_value());
  CHECK(period_of(circle_rotation(0.25), make_point({0.3}), 20) == 4);
  CHECK(period_of(cat_map(), make_point({0.0, 0.0}), 20) == 1);
  CHECK(period_of(cat_map(), make_point({0.5, 0.5}), 20) == 3);
}
