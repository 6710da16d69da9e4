#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cocyclab/errors.hpp"
#include "cocyclab/fixtures.hpp"
#include "cocyclab/perturb.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace cocyclab;

namespace {

const BaseSystem kRot = circle_rotation();
const double kLog2 = std::log(2.0);

struct Fixture {
  Cocycle a = doubling_harmonic_cocycle(16);
  SplittingSpec split = doubling_harmonic_splitting(16);
  std::vector<BasePoint> points = sample_measure(kRot, 3, 300);
};

}  // namespace

TEST_CASE("bump profile") {
  PerturbationParams p;
  p.p = make_point({0.5});
  p.r = 0.1;
  p.inner_fraction = 0.4;
  CHECK(bump(p, kRot, p.p) == 1.0);
  CHECK(bump(p, kRot, make_point({0.61})) == 0.0);
  CHECK(bump(p, kRot, make_point({0.75})) == 0.0);
  CHECK(bump_profile(p, (0.04 + 0.1) / 2) == doctest::Approx(0.5));
  testing::Gen g(2);
  for (int t = 0; t < 200; ++t) {
    const double v = bump(p, kRot, g.point(kRot));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("rotation isotopy") {
  PerturbationParams p;
  p.omega = std::numbers::pi / 6;
  CHECK((rotation_isotopy(p, 0.0, 2) - Eigen::Matrix2d::Identity()).norm() == 0.0);
  const Eigen::MatrixXd r = rotation_isotopy(p, 1.0, 2);
  CHECK(spectral_norm(Eigen::MatrixXd(Eigen::Matrix2d::Identity() - r)) == doctest::Approx(2 * std::sin(std::numbers::pi / 12)));
  CHECK(p.rotation_gap() == doctest::Approx(0.5176380902));
  testing::Gen g(8);
  for (int t = 0; t < 50; ++t) {
    const int dim = g.integer(2, 5);
    p.plane_first = 0;
    p.plane_second = dim - 1;
    p.omega = g.uniform(0, 1.5);
    const Eigen::MatrixXd q = rotation_isotopy(p, g.uniform(), dim);
    CHECK(q.determinant() == doctest::Approx(1.0));
    CHECK(orthonormality_defect(q) < 1e-14);
  }
  p.plane_second = 0;
  CHECK_THROWS_AS(rotation_isotopy(p, 0.5, 3), PreconditionError);
}

TEST_CASE("delta bound") {
  const Fixture f;
  CHECK(delta_bound(f.a, f.split, 0.1, f.points) == doctest::Approx(0.05));
  const Cocycle id = Cocycle::constant(Operator::identity(4));
  CHECK(delta_bound(id, SplittingSpec::from_axes(4, {0}, {1}), 0.1, f.points) == doctest::Approx(0.1));
  CHECK_THROWS_AS(delta_bound(f.a, f.split, 0.0, f.points), PreconditionError);
}

TEST_CASE("ball placement") {
  CHECK_NOTHROW(check_ball_disjointness(kRot, make_point({0.3}), 0.05));
  CHECK_THROWS_AS(check_ball_disjointness(kRot, make_point({0.3}), 0.3), ParameterError);
  const BasePoint c = choose_center(cat_map(), 5);
  CHECK_FALSE(period_of(cat_map(), c, 20).has_value());
}

TEST_CASE("rotation bump is exact where it should be") {
  const Fixture f;
  const PerturbationParams p = params_for_budget(f.a, f.split, make_point({0.3}), 0.05, 0.1, f.points);
  CHECK(p.delta == doctest::Approx(0.05));
  CHECK(2 * std::sin(p.omega / 2) <= p.delta * (1 + 1e-12));
  const Cocycle b = perturb_cu(f.a, kRot, f.split, p);
  testing::Gen g(19);
  const Eigen::MatrixXd stable = f.split.stable_bundle().head.constant_value();
  const double cu_norm = 2.0;  // |A restricted to E^cu|
  for (int t = 0; t < 500; ++t) {
    const BasePoint x = g.point(kRot);
    const Operator ax = f.a(x);
    const Operator bx = b(x);
    if (distance(kRot, x, p.p) >= p.r) REQUIRE((ax.block() - bx.block()).norm() == 0.0);
    const Eigen::VectorXd v = stable * g.unit(stable.cols());
    REQUIRE((ax.block() * v - bx.block() * v).norm() == 0.0);
    REQUIRE(operator_distance(ax, bx) <= cu_norm * p.rotation_gap() * (1 + 1e-12));
    REQUIRE(operator_distance(ax, bx) <= 0.1 * (1 + 1e-12));
  }
}

TEST_CASE("omega = 0 leaves the cocycle unchanged") {
  const Fixture f;
  PerturbationParams p;
  p.p = make_point({0.3});
  p.omega = 0.0;
  const Cocycle b = perturb_cu(f.a, kRot, f.split, p);
  testing::Gen g(4);
  for (int t = 0; t < 100; ++t) {
    const BasePoint x = g.point(kRot);
    REQUIRE((f.a(x).block() - b(x).block()).norm() == 0.0);
  }
  LemmaOptions o;
  o.horizon = 20000;
  o.samples = 200;
  o.x0 = make_point({0.1});
  const PerturbationReport r = verify_lemma(f.a, b, kRot, f.split, p, o);
  CHECK(r.verdict);
  CHECK(r.unstable_drop == 0.0);
  CHECK(r.central_sum_after == r.central_sum_before);
}

TEST_CASE("perturb_cu rejects angles beyond the budget and periodic centers") {
  const Fixture f;
  PerturbationParams p = params_for_budget(f.a, f.split, make_point({0.3}), 0.05, 0.1, f.points);
  p.omega *= 1.5;
  CHECK_THROWS_AS(perturb_cu(f.a, kRot, f.split, p), ParameterError);
  PerturbationParams q = params_for_budget(f.a, f.split, make_point({0.3}), 0.05, 0.1, f.points);
  q.p = make_point({0.0});
  CHECK_THROWS_AS(perturb_cu(f.a, circle_rotation(0.25), f.split, q), ParameterError);
}

TEST_CASE("the bump moves exponent mass from E^u to E^c and keeps the entropy") {
  const Fixture f;
  for (double omega : {0.1, 0.2}) {
    const PerturbationParams p = params_for_angle(f.a, f.split, make_point({0.3}), 0.05, omega, f.points);
    CHECK(p.epsilon == doctest::Approx(2.0 * 2.0 * std::sin(omega / 2)));
    const Cocycle b = perturb_cu(f.a, kRot, f.split, p);
    LemmaOptions o;
    o.horizon = 100000;
    o.samples = 300;
    o.x0 = make_point({0.1});
    const PerturbationReport r = verify_lemma(f.a, b, kRot, f.split, p, o);
    const std::string why = r.failures.empty() ? std::string() : r.failures.front();
    INFO(why);
    CHECK(r.verdict);
    CHECK(r.entropy_gap < 1e-2);
    CHECK(r.unstable_after < r.unstable_before);
    CHECK(r.central_sum_after > 0.0);
    CHECK(r.central_sum_after >= r.unstable_drop / 2);
    CHECK(r.unstable_before == doctest::Approx(kLog2).epsilon(1e-9));
    // Drop is of the order visit_fraction * -log(cos omega), well below the full -log(cos omega).
    CHECK(r.unstable_drop < r.predicted_full_drop);
  }
}

TEST_CASE("constants after a perturbation") {
  CHECK(rho_after(0.5) == 0.75);
  CHECK(k_ell(2.0, 0.1, 1) == 1.0);
  CHECK(k_ell(2.0, 0.1, 2) == doctest::Approx(2.0 + 2.1));
  CHECK(epsilon_max(1.0, 1, 1.0 / 3.0, 1.0) == doctest::Approx(0.125));
  CHECK(epsilon_max(2.0, 1, 0.5, 1.0) == doctest::Approx(1.0 / 6.0));
  CHECK(epsilon_max(1.0, 1, 1.0 - 1e-9, 1.0) < 1e-9);
}

TEST_CASE("rebalanced central scaling") {
  const Fixture f;
  for (double eps : {0.05, 0.1, 0.3}) {
    const Cocycle c = rebalanced_central_scaling(f.a, f.split, eps);
    const BasePoint x = make_point({0.2});
    const double oracle = std::max(2.0 * (1.0 - std::exp(-eps)), std::exp(eps) - 1.0);
    CHECK(std::abs(operator_distance(c(x), f.a(x)) - oracle) < 1e-12);
    CHECK(rebalanced_distance(eps) == doctest::Approx(oracle));
    CHECK(operator_distance(c(x), f.a(x)) <= 2 * eps);
    const QrResult q = lyapunov_qr(c, kRot, x, 1000, 2);
    CHECK(std::abs(q.exponents(1) - eps) < 1e-9);
    CHECK(std::abs(q.exponents.sum() - kLog2) < 1e-9);
  }
}

TEST_CASE("balancing needs a non-zero central sum") {
  Eigen::MatrixXd b = Eigen::Vector4d(2.0, std::exp(0.1), std::exp(-0.1), 0.2).asDiagonal();
  const Cocycle a = Cocycle::constant(Operator(b, Tail<>::zero()));
  const SplittingSpec split = SplittingSpec::from_axes(4, {0}, {1, 2});
  const auto spectrum = make_spectrum(lyapunov_qr(a, kRot, make_point({0.1}), 100, 4).exponents, 1e-3, a);
  CHECK_THROWS_AS(balance_central(a, split, 0.1, spectrum, sample_measure(kRot, 1, 20)), PreconditionError);
}

TEST_CASE("balancing equalizes and pushes the central exponents") {
  // Central exponents 0.02 and 0.0: balancing meets in the middle, then both move away from 0.
  Eigen::MatrixXd b = Eigen::Vector4d(2.0, std::exp(0.02), 1.0, 0.2).asDiagonal();
  const Cocycle a = Cocycle::constant(Operator(b, Tail<>::zero()));
  const SplittingSpec split = SplittingSpec::from_axes(4, {0}, {1, 2});
  const BasePoint x0 = make_point({0.1});
  const auto pts = sample_measure(kRot, 1, 20);
  const BalanceResult r = balance_central_iterated(a, kRot, split, 0.1, x0, 2000, 3, pts);
  const QrResult q = lyapunov_qr(r.cocycle, kRot, x0, 2000, 4);
  const double spread = std::abs(q.exponents(1) - q.exponents(2));
  CHECK(spread < 4 * 0.1);
  CHECK(std::min(std::abs(q.exponents(1)), std::abs(q.exponents(2))) > 1e-2);
  CHECK(r.log_factors(0) == 0.0);
  CHECK(operator_distance(r.cocycle(x0), a(x0)) <= 0.1 * r.rounds * (1 + 1e-12));
}

TEST_CASE("perturbation keeps partial hyperbolicity and balancing makes it non-uniformly Anosov") {
  const Fixture f;
  const BasePoint x0 = make_point({0.1});
  const PerturbationParams p = params_for_budget(f.a, f.split, make_point({0.3}), 0.05, 0.1, f.points);
  const Cocycle b = perturb_cu(f.a, kRot, f.split, p);
  SamplingPlan plan;
  plan.measure_samples = 100;
  plan.orbit_length = 300;
  auto classify = [&](const Cocycle& c) {
    const SplittingSpec s = finite_time_splitting(c, kRot, f.split, 40);
    const auto spectrum = make_spectrum(lyapunov_qr(c, kRot, x0, 50000, 4).exponents, 1e-3, c);
    PhEvidence ev;
    ev.unstable_central = check_domination(c, kRot, s.unstable_bundle(), s.central_bundle(), 1, 0.75, 1.0, plan);
    ev.central_stable = check_domination(c, kRot, s.central_bundle(), s.stable_bundle(), 1, 2.0 / 3.0, 0.5, plan);
    return classify_ph(spectrum, ev, 1e-2);
  };
  const PHClassification pb = classify(b);
  CHECK(pb.verdict == PhVerdict::partially_hyperbolic);
  CHECK(pb.d == 1);
  CHECK(pb.c == 1);
  const BalanceResult bal = balance_central_iterated(b, kRot, f.split, 0.1, x0, 50000, 3, f.points);
  CHECK(classify(bal.cocycle).verdict == PhVerdict::non_uniformly_anosov);
}
