#pragma once

#include "cocyclab/cocycle.hpp"
#include "cocyclab/domination.hpp"
#include "cocyclab/spectrum.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cocyclab {

/// epsilon / sup_x ||A(x) restricted to E^cu(x)|| over the given points.
/// Throws RankLossError when the restriction is not invertible somewhere.
double delta_bound(const Cocycle& a, const SplittingSpec& split, double epsilon, const std::vector<BasePoint>& points);

/// Throws ParameterError unless B(p,r) is disjoint from its image and
/// preimage, checked on a grid of spacing r/100 inside the ball.
void check_ball_disjointness(const BaseSystem& sys, const BasePoint& p, double r);

/// First Lebesgue sample (from `seed`) that is not periodic with period <= 20.
BasePoint choose_center(const BaseSystem& sys, std::uint64_t seed);

/// Grid points of B(p, r) with `per_axis` nodes across each diameter.
std::vector<BasePoint> ball_points(const BaseSystem& sys, const BasePoint& p, double r, int per_axis);

/// Parameters spending the whole budget epsilon: delta from delta_bound and
/// the largest omega with 2 sin(omega/2) <= delta. The plane rotates the
/// first unstable direction towards the first central one.
PerturbationParams params_for_budget(const Cocycle& a, const SplittingSpec& split, const BasePoint& p, double r,
                                     double epsilon, const std::vector<BasePoint>& points);

/// Parameters for a prescribed angle; epsilon is the budget that angle uses.
PerturbationParams params_for_angle(const Cocycle& a, const SplittingSpec& split, const BasePoint& p, double r,
                                    double omega, const std::vector<BasePoint>& points);

/// B(x) v = A(x) v^s + A(x) Phi(bump(x)) v^cu.
Cocycle perturb_cu(const Cocycle& a, const BaseSystem& sys, const SplittingSpec& split,
                   const PerturbationParams& params);

struct ItemCheck {
  bool pass = false;
  double worst = 0.0;
  std::optional<BasePoint> witness;  // point realizing `worst`
};

struct LemmaOptions {
  long long horizon = 100000;
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  BasePoint x0;  // orbit start for exponents, entropy and return times
  double entropy_tolerance = 1e-2;
  int threads = 1;
};

struct PerturbationReport {
  ItemCheck equal_outside_ball;       // B = A off the ball
  ItemCheck stable_action_preserved;  // B v = A v for v in E^s
  ItemCheck rotation_form;            // B = A R_x on E^cu with R_x in SO(D)
  ItemCheck norm_distance;            // sup ||A - B|| <= epsilon
  double epsilon = 0.0;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  double entropy_gap = 0.0;
  double entropy_discrepancy_before = 0.0;
  double entropy_discrepancy_after = 0.0;
  bool entropy_pass = false;
  double unstable_before = 0.0;  // sum of the d unstable exponents
  double unstable_after = 0.0;
  double unstable_drop = 0.0;
  double central_sum_before = 0.0;
  double central_sum_after = 0.0;
  bool central_pass = false;
  double predicted_full_drop = 0.0;  // -log(Delta)
  double predicted_kac_drop = 0.0;   // -visit_fraction * log(Delta)
  ReturnStats returns;
  long long horizon = 0;
  QrResult qr_before;
  QrResult qr_after;
  bool verdict = false;
  std::vector<std::string> failures;
};

/// Checks every claim about the rotation-bump perturbation B of A.
PerturbationReport verify_lemma(const Cocycle& a, const Cocycle& b, const BaseSystem& sys, const SplittingSpec& split,
                                const PerturbationParams& params, const LemmaOptions& options);

/// (1 + alpha) / 2
double rho_after(double alpha);

/// sum_{i<ell} ||A||^i (||A|| + epsilon)^(ell-1-i)
double k_ell(double norm_a, double epsilon, int ell);

/// min(theta/2, (1/(2K)) ((1-alpha)/(1+alpha)) (theta/2)^ell)
double epsilon_max(double theta, int ell, double alpha, double k);

/// Sum of the p largest exponents with multiplicity; -inf if any is -inf.
double lambda_p(const LyapunovSpectrum& spectrum, int p);

/// Smallest |sum of central exponents| accepted as non-zero.
inline constexpr double kCentralSumFloor = 1e-9;

struct BalanceResult {
  Cocycle cocycle;
  Eigen::VectorXd log_factors;  // one per E^cu frame column; zero on E^u
  double budget = 0.0;          // log(1 + epsilon / sup ||B restricted to the central frame||)
  bool needs_iteration = false;
  std::string diagnostic;
  int rounds = 1;
};

/// Central scaling C = B (id + Q diag(e^s - 1) Q^T) on the central columns of
/// split.center_unstable. The balancing part s_j = mean - lambda_j is clamped
/// to the budget; the remaining budget pushes every central exponent away
/// from zero in the direction of the central sum.
BalanceResult balance_central(const Cocycle& b, const SplittingSpec& split, double epsilon,
                              const LyapunovSpectrum& spectrum, const std::vector<BasePoint>& points);

/// Repeats balance_central, recomputing the central exponents by QR at
/// `horizon` from x0, until no clamp is needed or `max_rounds` is reached.
/// The result is a single central scaling of b with the summed log factors;
/// every round spends at most epsilon.
BalanceResult balance_central_iterated(const Cocycle& b, const BaseSystem& sys, const SplittingSpec& split,
                                       double epsilon, const BasePoint& x0, long long horizon, int max_rounds,
                                       const std::vector<BasePoint>& points);

}  // namespace cocyclab
