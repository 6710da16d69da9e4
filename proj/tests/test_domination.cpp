#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cocyclab/domination.hpp"
#include "cocyclab/errors.hpp"
#include "cocyclab/fixtures.hpp"
#include "cocyclab/perturb.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace cocyclab;

namespace {

const BaseSystem kRot = circle_rotation();

SamplingPlan small_plan(std::uint64_t seed = 1) {
  SamplingPlan p;
  p.seed = seed;
  p.measure_samples = 100;
  p.orbit_length = 200;
  return p;
}

Cocycle diagonal(std::initializer_list<double> d, Tail<> tail = Tail<>::zero()) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return Cocycle::constant(Operator(Eigen::MatrixXd(v.asDiagonal()), tail));
}

Bundle axes(Eigen::Index m, std::initializer_list<Eigen::Index> a) { return {FrameField::constant(axis_frame(m, a))}; }

/// Independent re-evaluation of a witness: |A^l v| / |A^l u| by explicit products.
double replay_ratio(const Cocycle& a, const Witness& w, int ell) {
  HVector u = w.u;
  HVector v = w.v;
  BasePoint x = w.point;
  for (int j = 0; j < ell; ++j, x = step(kRot, x)) {
    u = apply(a(x), u);
    v = apply(a(x), v);
  }
  return v.norm() / u.norm();
}

}  // namespace

TEST_CASE("doubling-harmonic domination constants") {
  const Cocycle a = doubling_harmonic_cocycle(32);
  const SplittingSpec s = doubling_harmonic_splitting(32);
  const auto uc = tightest_constants(a, kRot, s.unstable_bundle(), s.central_bundle(), 1, small_plan());
  CHECK(uc.alpha == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(uc.theta == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(uc.gamma == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
  const auto cs = tightest_constants(a, kRot, s.central_bundle(), s.stable_bundle(), 1, small_plan());
  CHECK(cs.alpha == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(cs.theta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cs.tail2);
  const auto us = tightest_constants(a, kRot, s.unstable_bundle(), s.stable_bundle(), 1, small_plan());
  CHECK(us.alpha == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("check_domination passes and fails on the ratio 1/2") {
  const Cocycle a = doubling_harmonic_cocycle(8);
  const SplittingSpec s = doubling_harmonic_splitting(8);
  const auto ok = check_domination(a, kRot, s.unstable_bundle(), s.central_bundle(), 1, 0.6, 1.0, small_plan());
  CHECK(ok.pass);
  CHECK(ok.certificate.worst_witness.ratio == doctest::Approx(0.5));
  const auto bad = check_domination(a, kRot, s.unstable_bundle(), s.central_bundle(), 1, 0.4, 1.0, small_plan());
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.violations.empty());
  CHECK_THROWS_AS(check_domination(a, kRot, s.unstable_bundle(), s.unstable_bundle(), 1, 0.6, 1.0, small_plan()),
                  PreconditionError);
}

TEST_CASE("passing witnesses replay independently") {
  // Rotation bumps keep E^cu invariant, which the finite-time splitting relies on.
  testing::Gen g(71);
  const Cocycle a = doubling_harmonic_cocycle(8);
  const SplittingSpec ref = doubling_harmonic_splitting(8);
  const auto pts = sample_measure(kRot, 5, 100);
  for (int t = 0; t < 5; ++t) {
    const PerturbationParams p =
        params_for_budget(a, ref, make_point({g.uniform(0.1, 0.9)}), 0.05, g.uniform(0.05, 0.2), pts);
    const Cocycle c = perturb_cu(a, kRot, ref, p);
    const SplittingSpec s = finite_time_splitting(c, kRot, ref, 30);
    const auto tight = tightest_constants(c, kRot, s.unstable_bundle(), s.central_bundle(), 1, small_plan(t));
    if (!(tight.alpha < 0.95)) continue;
    const double alpha = std::min(0.99, tight.alpha * 1.01);
    const auto r = check_domination(c, kRot, s.unstable_bundle(), s.central_bundle(), 1, alpha, tight.theta / 2,
                                    small_plan(t));
    const std::string why = r.violations.empty() ? std::string() : r.violations.front();
    INFO(why);
    REQUIRE(r.pass);
    const double replayed = replay_ratio(c, r.certificate.worst_witness, 1);
    CHECK(replayed == doctest::Approx(r.certificate.worst_witness.ratio).epsilon(1e-10));
    CHECK(replayed <= alpha);
  }
}

TEST_CASE("alpha* is the ratio to the power ell") {
  const Cocycle a = doubling_harmonic_cocycle(8);
  const SplittingSpec s = doubling_harmonic_splitting(8);
  double previous = 1.0;
  for (int ell = 1; ell <= 5; ++ell) {
    const auto c = tightest_constants(a, kRot, s.unstable_bundle(), s.central_bundle(), ell, small_plan());
    CHECK(std::abs(c.alpha - std::pow(0.5, ell)) < 1e-12);
    CHECK(c.alpha < previous);
    previous = c.alpha;
  }
}

TEST_CASE("the exact extremization matches a dense direction grid") {
  const Cocycle c = random_table_cocycle(9, {3, 8, 0.8, 0.3, {}});
  const Bundle e1 = axes(3, {0, 1});
  const Bundle e2 = axes(3, {2});
  SamplingPlan plan = small_plan();
  plan.measure_samples = 20;
  plan.orbit_length = 0;
  const auto tight = tightest_constants(c, kRot, e1, e2, 1, plan);
  const Eigen::MatrixXd dirs = direction_grid(2, 20000, 1);
  double worst_u = std::numeric_limits<double>::infinity();
  double best_v = 0.0;
  for (const auto& x : sample_measure(kRot, plan.seed, plan.measure_samples)) {
    const Eigen::MatrixXd b = c(x).block();
    double min_u = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < dirs.cols(); ++j) min_u = std::min(min_u, (b.leftCols(2) * dirs.col(j)).norm());
    const double v = b.col(2).norm();
    worst_u = std::min(worst_u, min_u);
    best_v = std::max(best_v, v / min_u);
  }
  CHECK(tight.theta == doctest::Approx(worst_u).epsilon(1e-6));
  CHECK(tight.alpha == doctest::Approx(best_v).epsilon(1e-6));
}

TEST_CASE("direction grids are unit vectors") {
  for (int dim : {1, 2, 3, 5}) {
    const Eigen::MatrixXd g = direction_grid(dim, 50, 4);
    CHECK(g.rows() == dim);
    for (Eigen::Index j = 0; j < g.cols(); ++j) CHECK(g.col(j).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("finest dominated partitions") {
  const SplittingSpec s = doubling_harmonic_splitting(8);
  const FinestPartition p = finest_search(doubling_harmonic_cocycle(8), kRot, s.center_unstable, 1, 0.1, small_plan());
  CHECK(p.blocks == std::vector<int>{1, 1});
  const FinestPartition id =
      finest_search(Cocycle::constant(Operator::identity(3)), kRot, FrameField::constant(axis_frame(3, {0, 1, 2})), 1,
                    0.1, small_plan());
  CHECK(id.blocks == std::vector<int>{3});
  const Cocycle d = diagonal({4, 2, 1});
  const FrameField all = FrameField::constant(axis_frame(3, {0, 1, 2}));
  const FinestPartition three = finest_search(d, kRot, all, 1, 0.1, small_plan(1));
  CHECK(three.blocks == std::vector<int>{1, 1, 1});
  CHECK(finest_search(d, kRot, all, 1, 0.1, small_plan(2)).blocks == three.blocks);
}

TEST_CASE("partial hyperbolicity classification") {
  const Cocycle a = doubling_harmonic_cocycle(8);
  const SplittingSpec s = doubling_harmonic_splitting(8);
  const auto spectrum = make_spectrum(lyapunov_qr(a, kRot, make_point({0.1}), 1000, 4).exponents, 1e-3, a);
  PhEvidence ev;
  ev.unstable_central = check_domination(a, kRot, s.unstable_bundle(), s.central_bundle(), 1, 0.75, 1.0, small_plan());
  ev.central_stable = check_domination(a, kRot, s.central_bundle(), s.stable_bundle(), 1, 0.5, 0.5, small_plan());
  const PHClassification ph = classify_ph(spectrum, ev, 1e-2);
  CHECK(ph.verdict == PhVerdict::partially_hyperbolic);
  CHECK(ph.d == 1);
  CHECK(ph.c == 1);
  CHECK(ph.alpha == doctest::Approx(0.5));
  CHECK(ph.beta == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(classify_ph(spectrum, PhEvidence{ev.unstable_central, std::nullopt}, 1e-2), IncompleteEvidence);

  const Cocycle c = rebalanced_central_scaling(a, s, 0.1);
  const auto sc = make_spectrum(lyapunov_qr(c, kRot, make_point({0.1}), 1000, 4).exponents, 1e-3, c);
  PhEvidence evc;
  evc.unstable_central = check_domination(c, kRot, s.unstable_bundle(), s.central_bundle(), 1, 0.75, 1.0, small_plan());
  evc.central_stable = check_domination(c, kRot, s.central_bundle(), s.stable_bundle(), 1, 0.5, 0.5, small_plan());
  CHECK(classify_ph(sc, evc, 1e-2).verdict == PhVerdict::non_uniformly_anosov);
}

TEST_CASE("the identity has no unstable bundle") {
  const Cocycle id = Cocycle::constant(Operator::identity(3));
  const auto spectrum = make_spectrum(Eigen::Vector3d::Zero(), 1e-3, id);
  DominationResult fake;
  fake.certificate.dim1 = 1;
  fake.certificate.dim2 = 1;
  const PHClassification ph = classify_ph(spectrum, {fake, fake}, 1e-2);
  CHECK(ph.verdict == PhVerdict::fail);
  CHECK(ph.reason.find("unstable") != std::string::npos);
}

TEST_CASE("domination persists under small perturbations only") {
  const Cocycle a = doubling_harmonic_cocycle(8);
  const SplittingSpec s = doubling_harmonic_splitting(8);
  SamplingPlan plan = small_plan();
  plan.measure_samples = 50;
  plan.orbit_length = 50;
  const PersistenceTable t =
      persistence_probe(a, kRot, s.unstable_bundle(), s.central_bundle(), 1, 0.75, 1.0, {0.0, 0.05, 1.5}, 3, 16, plan);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].pass);
  CHECK(t.rows[0].alpha_worst == doctest::Approx(0.5));
  CHECK(t.rows[1].pass);
  // worst case ratio (1 + delta) / (2 - delta)
  CHECK(t.rows[1].alpha_worst <= (1.05 / 1.95) + 1e-12);
  CHECK(t.rows[1].alpha_worst <= 0.62);
  CHECK_FALSE(t.rows[2].pass);
  CHECK(t.first_failure == 1.5);
}
