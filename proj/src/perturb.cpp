#include "cocyclab/perturb.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace cocyclab {
namespace {

constexpr double kExactTolerance = 1e-12;

double restricted_min_singular(const Cocycle& a, const FrameField& frames, const std::vector<BasePoint>& points) {
  double worst = std::numeric_limits<double>::infinity();
  for (const BasePoint& x : points) {
    worst = std::min(worst, min_singular_value(Eigen::MatrixXd(a(x).block() * frames.at(x))));
  }
  return worst;
}

void record(ItemCheck& item, double value, const BasePoint& x) {
  if (!item.witness || value > item.worst) {
    item.worst = value;
    item.witness = x;
  }
}

}  // namespace

double delta_bound(const Cocycle& a, const SplittingSpec& split, double epsilon, const std::vector<BasePoint>& points) {
  if (!(epsilon > 0.0)) throw PreconditionError("delta_bound: epsilon must be positive");
  if (points.empty()) throw PreconditionError("delta_bound: no sample points");
  if (split.center_unstable.rows() != a.truncation()) throw ShapeError("delta_bound: splitting does not match M");
  if (!(restricted_min_singular(a, split.center_unstable, points) > 1e-12)) {
    throw RankLossError("delta_bound: A(x) restricted to E^cu is not invertible at some sample");
  }
  return epsilon / restricted_norm_sup(a, split.center_unstable, points);
}

std::vector<BasePoint> ball_points(const BaseSystem& sys, const BasePoint& p, double r, int per_axis) {
  if (per_axis < 2) throw PreconditionError("ball_points: need at least two nodes per axis");
  std::vector<BasePoint> pts;
  const double h = 2.0 * r / (per_axis - 1);
  if (sys.dim() == 1) {
    for (int i = 0; i < per_axis; ++i) pts.push_back(wrap(make_point({p(0) - r + h * i})));
    return pts;
  }
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      const double dx = -r + h * i;
      const double dy = -r + h * j;
      if (dx * dx + dy * dy < r * r) pts.push_back(wrap(make_point({p(0) + dx, p(1) + dy})));
    }
  }
  return pts;
}

void check_ball_disjointness(const BaseSystem& sys, const BasePoint& p, double r) {
  if (!(r > 0.0)) throw ParameterError("ball radius must be positive");
  for (const BasePoint& y : ball_points(sys, p, r, 201)) {
    if (distance(sys, y, p) >= r) continue;
    for (int k : {1, -1}) {
      if (distance(sys, step(sys, y, k), p) < r) {
        std::ostringstream os;
        os << "ball B(p, " << r << ") meets its " << (k > 0 ? "image" : "preimage") << "; choose a smaller r";
        throw ParameterError(os.str());
      }
    }
  }
}

BasePoint choose_center(const BaseSystem& sys, std::uint64_t seed) {
  for (const BasePoint& x : sample_measure(sys, seed, 64)) {
    if (!period_of(sys, x, 20)) return x;
  }
  throw ParameterError("no non-periodic center found among 64 samples");
}

PerturbationParams params_for_budget(const Cocycle& a, const SplittingSpec& split, const BasePoint& p, double r,
                                     double epsilon, const std::vector<BasePoint>& points) {
  PerturbationParams params;
  params.p = p;
  params.r = r;
  params.epsilon = epsilon;
  params.delta = delta_bound(a, split, epsilon, points);
  params.omega = 2.0 * std::asin(std::min(1.0, params.delta / 2.0));
  params.plane_first = 0;
  params.plane_second = split.d;
  return params;
}

PerturbationParams params_for_angle(const Cocycle& a, const SplittingSpec& split, const BasePoint& p, double r,
                                    double omega, const std::vector<BasePoint>& points) {
  if (!(omega > 0.0)) throw PreconditionError("params_for_angle: omega must be positive");
  const double gap = 2.0 * std::sin(omega / 2.0);
  PerturbationParams params;
  params.p = p;
  params.r = r;
  params.omega = omega;
  params.epsilon = gap * restricted_norm_sup(a, split.center_unstable, points);
  params.delta = delta_bound(a, split, params.epsilon, points);
  params.plane_first = 0;
  params.plane_second = split.d;
  return params;
}

Cocycle perturb_cu(const Cocycle& a, const BaseSystem& sys, const SplittingSpec& split,
                   const PerturbationParams& params) {
  if (split.d < 1) throw PreconditionError("perturb_cu: E^u must be non-trivial");
  if (!(params.omega >= 0.0 && params.omega < std::numbers::pi / 2)) {
    throw PreconditionError("perturb_cu: omega must lie in [0, pi/2)");
  }
  if (!(params.inner_fraction > 0.0 && params.inner_fraction < 1.0)) {
    throw PreconditionError("perturb_cu: inner fraction must lie in (0,1)");
  }
  if (params.rotation_gap() > params.delta * (1.0 + kExactTolerance)) {
    throw ParameterError("perturb_cu: 2 sin(omega/2) exceeds delta");
  }
  if (period_of(sys, params.p, 20)) throw ParameterError("perturb_cu: center p is periodic");
  check_ball_disjointness(sys, params.p, params.r);
  return Cocycle::rotation_bump(a, params, split, sys);
}

PerturbationReport verify_lemma(const Cocycle& a, const Cocycle& b, const BaseSystem& sys, const SplittingSpec& split,
                                const PerturbationParams& params, const LemmaOptions& options) {
  if (options.x0.size() != sys.dim()) throw ShapeError("verify_lemma: orbit start has the wrong dimension");
  PerturbationReport rep;
  rep.epsilon = params.epsilon;
  rep.horizon = options.horizon;
  const int d = split.d;
  const int dim_cu = split.D();

  std::vector<BasePoint> pts = sample_measure(sys, options.seed, options.samples);
  for (const BasePoint& x : ball_points(sys, params.p, params.r, sys.dim() == 1 ? 81 : 25)) pts.push_back(x);

  rep.equal_outside_ball.pass = true;
  rep.stable_action_preserved.pass = true;
  rep.rotation_form.pass = true;
  for (const BasePoint& x : pts) {
    const Operator ax = a(x);
    const Operator bx = b(x);
    const double diff = operator_distance(ax, bx);
    record(rep.norm_distance, diff, x);
    if (distance(sys, x, params.p) >= params.r) {
      const double off = (bx.block() - ax.block()).cwiseAbs().maxCoeff();
      record(rep.equal_outside_ball, off, x);
    }
    const Eigen::MatrixXd q = split.center_unstable.at(x);
    const Eigen::MatrixXd s = orthogonal_complement(q);
    const double scale = std::max(1.0, operator_norm(ax));
    double stable_gap = s.cols() > 0 ? (bx.block() * s - ax.block() * s).cwiseAbs().maxCoeff() / scale : 0.0;
    if (!(ax.tail() == bx.tail())) stable_gap = std::numeric_limits<double>::infinity();
    record(rep.stable_action_preserved, stable_gap, x);

    const Eigen::MatrixXd aq = ax.block() * q;
    const Eigen::MatrixXd bq = bx.block() * q;
    const Eigen::MatrixXd rot = aq.colPivHouseholderQr().solve(bq);
    const double expected = (rot - rotation_isotopy(params, bump(params, sys, x), dim_cu)).cwiseAbs().maxCoeff();
    const double form = std::max({orthonormality_defect(rot), std::abs(rot.determinant() - 1.0),
                                  (bq - aq * rot).cwiseAbs().maxCoeff() / scale, expected});
    record(rep.rotation_form, form, x);
  }
  rep.equal_outside_ball.pass = rep.equal_outside_ball.worst == 0.0;
  rep.stable_action_preserved.pass = rep.stable_action_preserved.worst <= kExactTolerance;
  rep.rotation_form.pass = rep.rotation_form.worst <= kExactTolerance;
  rep.norm_distance.pass = rep.norm_distance.worst <= params.epsilon * (1.0 + kExactTolerance);

  auto run = [&](const Cocycle& c) {
    return std::make_pair(cu_entropy(c, sys, split, options.x0, options.horizon),
                          lyapunov_qr(c, sys, options.x0, options.horizon, dim_cu));
  };
  std::pair<EntropyReport, QrResult> before, after;
  if (options.threads > 1) {
    auto fa = std::async(std::launch::async, run, std::cref(a));
    after = run(b);
    before = fa.get();
  } else {
    before = run(a);
    after = run(b);
  }
  rep.entropy_before = before.first.birkhoff;
  rep.entropy_after = after.first.birkhoff;
  rep.entropy_discrepancy_before = before.first.discrepancy;
  rep.entropy_discrepancy_after = after.first.discrepancy;
  rep.entropy_gap = std::abs(rep.entropy_after - rep.entropy_before);
  rep.entropy_pass = rep.entropy_gap < options.entropy_tolerance;
  rep.qr_before = std::move(before.second);
  rep.qr_after = std::move(after.second);
  rep.unstable_before = rep.qr_before.exponents.head(d).sum();
  rep.unstable_after = rep.qr_after.exponents.head(d).sum();
  rep.unstable_drop = rep.unstable_before - rep.unstable_after;
  rep.central_sum_before = rep.qr_before.exponents.segment(d, split.c).sum();
  rep.central_sum_after = rep.qr_after.exponents.segment(d, split.c).sum();
  if (params.omega > 0.0) {
    rep.central_pass = rep.central_sum_after > 0.0 && rep.central_sum_after >= 0.5 * rep.unstable_drop;
  } else {
    rep.central_pass = std::abs(rep.central_sum_after - rep.central_sum_before) <= kExactTolerance &&
                       std::abs(rep.unstable_drop) <= kExactTolerance;
  }

  rep.returns = return_time_stats(sys, params.p, params.r, options.x0, options.horizon);
  const double log_delta = std::log(params.cos_bound());
  rep.predicted_full_drop = -log_delta;
  rep.predicted_kac_drop = -rep.returns.visit_fraction * log_delta;

  auto fail_if = [&](bool ok, const char* what) {
    if (!ok) rep.failures.emplace_back(what);
  };
  fail_if(rep.equal_outside_ball.pass, "B differs from A outside the ball");
  fail_if(rep.stable_action_preserved.pass, "B changes the action on E^s");
  fail_if(rep.rotation_form.pass, "B restricted to E^cu is not A composed with a rotation");
  fail_if(rep.norm_distance.pass, "sup ||A - B|| exceeds epsilon");
  fail_if(rep.entropy_pass, "center-unstable entropy changed");
  fail_if(rep.central_pass, "central exponent sum did not become positive");
  rep.verdict = rep.failures.empty();
  return rep;
}

double rho_after(double alpha) { return (1.0 + alpha) / 2.0; }

double k_ell(double norm_a, double epsilon, int ell) {
  if (ell < 1) throw PreconditionError("k_ell: ell must be at least 1");
  double k = 0.0;
  for (int i = 0; i < ell; ++i) k += std::pow(norm_a, i) * std::pow(norm_a + epsilon, ell - 1 - i);
  return k;
}

double epsilon_max(double theta, int ell, double alpha, double k) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(theta > 0.0) || ell < 1 || !(k > 0.0)) {
    throw PreconditionError("epsilon_max: need alpha in (0,1), theta > 0, ell >= 1, K > 0");
  }
  const double half = theta / 2.0;
  return std::min(half, (1.0 / (2.0 * k)) * ((1.0 - alpha) / (1.0 + alpha)) * std::pow(half, ell));
}

double lambda_p(const LyapunovSpectrum& spectrum, int p) {
  double s = 0.0;
  for (const Exponent& e : spectrum.leading(p)) {
    if (!e.is_finite()) return -std::numeric_limits<double>::infinity();
    s += e.value;
  }
  return s;
}

BalanceResult balance_central(const Cocycle& b, const SplittingSpec& split, double epsilon,
                              const LyapunovSpectrum& spectrum, const std::vector<BasePoint>& points) {
  if (!(epsilon > 0.0)) throw PreconditionError("balance_central: epsilon must be positive");
  if (split.c < 1) throw PreconditionError("balance_central: E^c is empty");
  const int d = split.d;
  const int c = split.c;
  if (static_cast<int>(spectrum.values.size()) < d + c) {
    throw PreconditionError("balance_central: spectrum head must cover E^cu");
  }
  Eigen::VectorXd central(c);
  for (int j = 0; j < c; ++j) central(j) = spectrum.values[static_cast<std::size_t>(d + j)];
  const double sum = central.sum();
  if (!(std::abs(sum) > kCentralSumFloor)) {
    throw PreconditionError("balance_central: central exponents sum to zero; perturb E^cu first");
  }
  BalanceResult out;
  const double norm = restricted_norm_sup(b, column_slice(split.center_unstable, d, c), points);
  out.budget = std::log1p(epsilon / norm);
  const double mean = sum / c;
  Eigen::VectorXd shift = (Eigen::VectorXd::Constant(c, mean) - central);
  if (shift.cwiseAbs().maxCoeff() > out.budget) {
    out.needs_iteration = true;
    std::ostringstream os;
    os << "balancing shift " << shift.cwiseAbs().maxCoeff() << " exceeds the budget " << out.budget
       << "; apply again";
    out.diagnostic = os.str();
    shift = shift.cwiseMax(-out.budget).cwiseMin(out.budget);
  }
  const double room = out.budget - shift.cwiseAbs().maxCoeff();
  shift.array() += (sum > 0.0 ? 1.0 : -1.0) * 0.95 * room;
  out.log_factors = Eigen::VectorXd::Zero(d + c);
  out.log_factors.tail(c) = shift;
  out.cocycle = Cocycle::central_scaling(b, out.log_factors, split);
  return out;
}

BalanceResult balance_central_iterated(const Cocycle& b, const BaseSystem& sys, const SplittingSpec& split,
                                       double epsilon, const BasePoint& x0, long long horizon, int max_rounds,
                                       const std::vector<BasePoint>& points) {
  if (max_rounds < 1) throw PreconditionError("balance_central_iterated: at least one round");
  // Scalings on the same frame field compose additively in the log factors,
  // so every round is folded into one central scaling of b.
  Cocycle current = b;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(split.D());
  BalanceResult out;
  for (int round = 1; round <= max_rounds; ++round) {
    const QrResult qr = lyapunov_qr(current, sys, x0, horizon, split.D());
    const LyapunovSpectrum spec = make_spectrum(qr.exponents, kDefaultGapTolerance, current);
    out = balance_central(current, split, epsilon, spec, points);
    total += out.log_factors;
    out.log_factors = total;
    out.cocycle = Cocycle::central_scaling(b, total, split);
    out.rounds = round;
    current = out.cocycle;
    if (!out.needs_iteration) break;
  }
  return out;
}

}  // namespace cocyclab
