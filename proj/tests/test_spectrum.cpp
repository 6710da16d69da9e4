#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cocyclab/errors.hpp"
#include "cocyclab/fixtures.hpp"
#include "cocyclab/perturb.hpp"
#include "cocyclab/spectrum.hpp"
#include "support.hpp"

#include <cmath>

using namespace cocyclab;

namespace {

const double kLog2 = std::log(2.0);
const BaseSystem kRot = circle_rotation();
const BasePoint kX0 = make_point({0.1});

/// log 2, 0, -log 3, ..., -log k computed from the diagonal entries.
Eigen::VectorXd doubling_oracle(int k) {
  Eigen::VectorXd e(k);
  for (int j = 1; j <= k; ++j) e(j - 1) = j == 1 ? kLog2 : (j == 2 ? 0.0 : -std::log(double(j)));
  return e;
}

Cocycle identity_cocycle(int m) { return Cocycle::constant(Operator::identity(m)); }

}  // namespace

TEST_CASE("QR exponents of the doubling-harmonic cocycle") {
  const QrResult q = lyapunov_qr(doubling_harmonic_cocycle(32), kRot, kX0, 10000, 4);
  CHECK((q.exponents - doubling_oracle(4)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(q.horizon == 10000);
  CHECK_FALSE(q.trace_steps.empty());
  CHECK(q.trace_steps.back() == 10000);
}

TEST_CASE("QR exponents of the identity vanish") {
  const QrResult q = lyapunov_qr(identity_cocycle(5), kRot, kX0, 500, 5);
  CHECK(q.exponents.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("QR rejects bad arguments") {
  CHECK_THROWS_AS(lyapunov_qr(identity_cocycle(3), kRot, kX0, 100, 4), PreconditionError);
  CHECK_THROWS_AS(lyapunov_qr(identity_cocycle(3), kRot, kX0, 5, 2), PreconditionError);
}

TEST_CASE("a zero block collapses the frame") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 2);
  z(0, 0) = 1.0;
  CHECK_THROWS_AS(lyapunov_qr(Cocycle::constant(Operator(z, Tail<>::zero())), kRot, kX0, 100, 2), UnderflowError);
}

TEST_CASE("limit-operator SVD of a diagonal cocycle is exact") {
  for (long long n : {1LL, 7LL, 300LL}) {
    const SingularExponents s = limit_operator_svd(doubling_harmonic_cocycle(8), kRot, kX0, n);
    REQUIRE(s.head.size() == 8);
    for (int j = 0; j < 8; ++j) CHECK(s.head[j].as_double() == doctest::Approx(doubling_oracle(8)(j)).epsilon(1e-12));
    CHECK(s.tail == Tail<>::harmonic());
  }
}

TEST_CASE("zero directions of the block are -inf") {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 3);
  b(0, 0) = 2.0;
  const SingularExponents s = limit_operator_svd(Cocycle::constant(Operator(b, Tail<>::zero())), kRot, kX0, 50);
  CHECK(s.head[0].as_double() == doctest::Approx(kLog2));
  CHECK_FALSE(s.head[1].is_finite());
  CHECK_FALSE(s.head[2].is_finite());
  CHECK(s.tail.is_zero());
}

TEST_CASE("QR and SVD agree on random table cocycles at long horizons") {
  // The two finite-time estimates differ by O(1/n); at n = 20000 they agree to 1e-3.
  for (int seed = 0; seed < 4; ++seed) {
    const Cocycle c = random_table_cocycle(200 + static_cast<std::uint64_t>(seed));
    const QrResult q = lyapunov_qr(c, kRot, kX0, 20000, 6);
    const SingularExponents s = limit_operator_svd(c, kRot, kX0, 20000);
    for (int j = 0; j < 6; ++j) CHECK(std::abs(q.exponents(j) - s.head[j].as_double()) < 1e-3);
  }
}

TEST_CASE("product SVD matches a direct SVD on short products") {
  testing::Gen g(12);
  for (int t = 0; t < 10; ++t) {
    const Cocycle c = random_table_cocycle(static_cast<std::uint64_t>(g.integer(0, 999)));
    const BasePoint x = g.point(kRot);
    const int n = g.integer(1, 12);
    const ProductSvd p = product_svd(c, kRot, x, n, Eigen::MatrixXd::Identity(6, 6));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cocycle_product(c, kRot, x, n).block());
    const Eigen::VectorXd sv = svd.singularValues();
    for (int j = 0; j < 6; ++j) {
      // A direct SVD only resolves singular values well above roundoff of the largest one.
      if (sv(j) > 1e-8 * sv(0)) {
        CHECK(p.log_singular_values(j) == doctest::Approx(std::log(sv(j))).epsilon(1e-9));
      } else {
        CHECK(std::exp(p.log_singular_values(j)) < 1e-7 * sv(0));
      }
    }
  }
}

TEST_CASE("vector exponents") {
  const Cocycle a = doubling_harmonic_cocycle(8);
  CHECK(vector_exponent(a, kRot, kX0, HVector::basis(8, 1), 1000).as_double() == doctest::Approx(kLog2));
  HVector mix{Eigen::VectorXd::Zero(8), Eigen::VectorXd()};
  mix.head(0) = mix.head(1) = 1.0 / std::sqrt(2.0);
  // |A^n v| = sqrt(4^n + 1) / sqrt(2): the first component dominates.
  const double n = 200;
  const double oracle = (0.5 * std::log(std::pow(4.0, n) + 1.0) - 0.5 * std::log(2.0)) / n;
  CHECK(vector_exponent(a, kRot, kX0, mix, 200).as_double() == doctest::Approx(oracle).epsilon(1e-12));
  const Cocycle zero_tail = Cocycle::constant(Operator(Eigen::MatrixXd::Identity(2, 2), Tail<>::zero()));
  CHECK_FALSE(vector_exponent(zero_tail, kRot, kX0, HVector::basis(2, 3), 10).is_finite());
}

TEST_CASE("Oseledets frames of a diagonal cocycle are coordinate axes") {
  const OseledetsFrames f = oseledets_frames(doubling_harmonic_cocycle(8), kRot, kX0, 50, {1, 1});
  REQUIRE(f.u_frames.size() == 2);
  CHECK(std::abs(std::abs(f.u_frames[0](0, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(f.u_frames[1](1, 0)) - 1.0) < 1e-12);
  CHECK_THROWS_AS(oseledets_frames(identity_cocycle(4), kRot, kX0, 50, {1, 1}), UnresolvedSplitting);
}

TEST_CASE("Oseledets frames move continuously under a small bump") {
  const Cocycle a = doubling_harmonic_cocycle(8);
  const SplittingSpec split = doubling_harmonic_splitting(8);
  PerturbationParams p;
  p.p = make_point({0.3});
  p.r = 0.05;
  p.omega = 0.05;
  const Cocycle b = Cocycle::rotation_bump(a, p, split, kRot);
  const OseledetsFrames f = oseledets_frames(b, kRot, make_point({0.31}), 40, {1, 1});
  const Eigen::VectorXd angle = principal_angles(f.u_frames[0], axis_frame(8, {0}));
  CHECK(angle(0) < 0.2);
}

TEST_CASE("determinant rates along the doubling-harmonic bundles") {
  const Cocycle a = doubling_harmonic_cocycle(8);
  const SplittingSpec s = doubling_harmonic_splitting(8);
  CHECK(det_rate(a, kRot, s.unstable, kX0, 1000) == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(std::abs(det_rate(a, kRot, s.central, kX0, 1000)) < 1e-14);
  CHECK(det_rate(a, kRot, s.center_unstable, kX0, 1000) == doctest::Approx(kLog2).epsilon(1e-12));
}

TEST_CASE("entropy by both routes") {
  const Cocycle a = doubling_harmonic_cocycle(16);
  const SplittingSpec s = doubling_harmonic_splitting(16);
  const EntropyReport e = cu_entropy(a, kRot, s, kX0, 20000);
  CHECK(e.birkhoff == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(e.spectral == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(e.discrepancy < 1e-9);
  const EntropyReport c = cu_entropy(rebalanced_central_scaling(a, s, 0.1), kRot, s, kX0, 20000);
  CHECK(std::abs(c.birkhoff - kLog2) < 1e-9);
  CHECK(std::abs(c.spectral - kLog2) < 1e-9);
}

TEST_CASE("entropy identity on a perturbed fixture") {
  const Cocycle a = doubling_harmonic_cocycle(16);
  const SplittingSpec s = doubling_harmonic_splitting(16);
  const auto pts = sample_measure(kRot, 4, 200);
  const PerturbationParams p = params_for_angle(a, s, make_point({0.3}), 0.05, 0.2, pts);
  const EntropyReport e = cu_entropy(perturb_cu(a, kRot, s, p), kRot, s, kX0, 100000);
  CHECK(e.discrepancy < 1e-2);
  CHECK(std::abs(e.birkhoff - kLog2) < 1e-2);
}

TEST_CASE("exponent sum equals the determinant rate of the fast subspace") {
  const Cocycle c = random_table_cocycle(31);
  const FrameField top2 = fast_subspace_field(c, kRot, FrameField::constant(axis_frame(6, {0, 1})), 60);
  const QrResult q = lyapunov_qr(c, kRot, kX0, 20000, 2);
  CHECK(std::abs(q.exponents.sum() - det_rate(c, kRot, top2, kX0, 20000)) < 1e-3);
}

TEST_CASE("Cauchy gap shrinks as the horizon doubles") {
  const Cocycle a = doubling_harmonic_cocycle(8);
  const QrResult q1 = lyapunov_qr(a, kRot, kX0, 1000, 3);
  const QrResult q2 = lyapunov_qr(a, kRot, kX0, 2000, 3);
  // Diagonal cocycle: the running averages are exact up to roundoff.
  CHECK(q1.cauchy_gap.maxCoeff() < 1e-12);
  CHECK(q2.cauchy_gap.maxCoeff() < 1e-12);
  const Cocycle c = random_table_cocycle(77);
  const QrResult r1 = lyapunov_qr(c, kRot, kX0, 4000, 3);
  const QrResult r2 = lyapunov_qr(c, kRot, kX0, 8000, 3);
  CHECK(r2.cauchy_gap.maxCoeff() <= 2.0 * r1.cauchy_gap.maxCoeff());
}

TEST_CASE("spectrum grouping, tail merging and lambda_p") {
  const Cocycle a = doubling_harmonic_cocycle(32);
  const QrResult q = lyapunov_qr(a, kRot, kX0, 10000, 4);
  const LyapunovSpectrum s = make_spectrum(q.exponents, kDefaultGapTolerance, a);
  REQUIRE(s.entries.size() == 4);
  CHECK(s.entries[0].multiplicity == 1);
  CHECK(lambda_p(s, 1) == doctest::Approx(kLog2));
  CHECK(lambda_p(s, 2) == doctest::Approx(kLog2));
  CHECK(lambda_p(s, 3) == doctest::Approx(kLog2 - std::log(3.0)));
  CHECK_THROWS_AS(s.leading(5), InsufficientHorizon);

  // With the whole head resolved, exponents past M come from the tail rule.
  Eigen::MatrixXd b = Eigen::Vector2d(2.0, 1.0).asDiagonal();
  const Cocycle small = Cocycle::constant(Operator(b, Tail<>::harmonic()));
  const LyapunovSpectrum full = make_spectrum(lyapunov_qr(small, kRot, kX0, 100, 2).exponents, 1e-3, small);
  const auto lead = full.leading(4);
  CHECK(lead[2].as_double() == doctest::Approx(-std::log(3.0)));
  CHECK(lead[3].as_double() == doctest::Approx(-std::log(4.0)));

  Eigen::VectorXd repeated(3);
  repeated << 1.0, 1.0 - 1e-5, -2.0;
  const LyapunovSpectrum grouped = make_spectrum(repeated, 1e-3, random_table_cocycle(1, {3, 4, 0.5, 0.3, {}}));
  REQUIRE(grouped.entries.size() == 2);
  CHECK(grouped.entries[0].multiplicity == 2);
}

TEST_CASE("finite-time splitting recovers the bundles of a constant cocycle") {
  const Cocycle a = doubling_harmonic_cocycle(8);
  const SplittingSpec ref = doubling_harmonic_splitting(8);
  const SplittingSpec s = finite_time_splitting(a, kRot, ref, 20);
  const BasePoint x = make_point({0.42});
  CHECK(principal_angles(s.unstable.at(x), axis_frame(8, {0}))(0) < 1e-12);
  CHECK(principal_angles(s.central.at(x), axis_frame(8, {1}))(0) < 1e-12);
}
