#include "scenarios.hpp"

#include "cocyclab/errors.hpp"
#include "cocyclab/fixtures.hpp"
#include "cocyclab/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cocyclab::cli {
namespace {

const json& empty_object() {
  static const json e = json::object();
  return e;
}

Node section(const Context& ctx, const char* key) {
  if (auto n = ctx.root.optional_child(key)) return *n;
  return Node(empty_object(), ctx.root.path() + "." + key);
}

BaseSystem base_of(const Context& ctx) { return make_base(ctx.root.child("base")); }

CocycleSetup cocycle_of(const Context& ctx) { return make_cocycle(ctx.root.child("cocycle"), ctx.dir); }

SplittingSpec splitting_of(const Context& ctx, const CocycleSetup& setup) {
  const Eigen::Index m = setup.cocycle.truncation();
  if (ctx.root.has("splitting")) return make_splitting(ctx.root.child("splitting"), m);
  if (setup.kind == "doubling_harmonic") return doubling_harmonic_splitting(m);
  ctx.root.fail("splitting", "required field is missing (only doubling_harmonic has a default)");
}

BasePoint start_point(const Node& p, const BaseSystem& sys, std::uint64_t seed) {
  if (p.has("x0")) return make_point_from(p, "x0", sys);
  return sample_measure(sys, seed, 1).front();
}

BasePoint center_point(const Node& p, const BaseSystem& sys, std::uint64_t seed) {
  if (p.has("center")) return make_point_from(p, "center", sys);
  return choose_center(sys, seed);
}

long long horizon_of(const Node& p, long long fallback) { return p.integer("horizon", fallback, 10, 1000000000LL); }

double positive(const Node& n, const char* key, double fallback, double hi) {
  const double v = n.number_in(key, fallback, 0.0, hi);
  if (!(v > 0.0)) n.fail(key, "must be positive");
  return v;
}

json stage_a() { return {{"name", "A"}}; }

json stage_b(const PerturbationParams& params) {
  return {{"name", "B"}, {"perturbation", perturbation_json(params)}};
}

json stage_c(const PerturbationParams& params, const Eigen::VectorXd& log_factors) {
  return {{"name", "C"}, {"perturbation", perturbation_json(params)}, {"log_factors", vector_json(log_factors)}};
}

json domination_witness(const std::string& id, const json& stage, const SplittingCertificate& c,
                        std::optional<double> alpha_required, std::optional<double> theta_required) {
  const Witness& w = c.worst_witness;
  return {{"id", id},
          {"kind", "domination"},
          {"stage", stage},
          {"ell", c.ell},
          {"alpha_required", alpha_required ? number_json(*alpha_required) : json(nullptr)},
          {"theta_required", theta_required ? number_json(*theta_required) : json(nullptr)},
          {"point", point_json(w.point)},
          {"u", hvector_json(w.u)},
          {"v", hvector_json(w.v)},
          {"ratio", number_json(w.ratio)}};
}

json certificate_json(const SplittingCertificate& c) {
  return {{"ell", c.ell},
          {"alpha", number_json(c.alpha)},
          {"theta", number_json(c.theta)},
          {"gamma", number_json(c.gamma)},
          {"invariance_drift", number_json(c.invariance_drift)},
          {"dim1", c.dim1},
          {"dim2", c.dim2},
          {"tail1", c.tail1},
          {"tail2", c.tail2},
          {"samples", c.samples},
          {"alpha_measure", number_json(c.alpha_measure)},
          {"alpha_orbit", number_json(c.alpha_orbit)}};
}

json domination_json(const DominationResult& r) {
  return {{"pass", r.pass}, {"certificate", certificate_json(r.certificate)}, {"violations", r.violations}};
}

json qr_json(const QrResult& q) {
  return {{"horizon", q.horizon},
          {"exponents", vector_json(q.exponents)},
          {"half_horizon", vector_json(q.half_horizon)},
          {"cauchy_gap", vector_json(q.cauchy_gap)}};
}

json spectrum_json(const LyapunovSpectrum& s) {
  json entries = json::array();
  for (const auto& e : s.entries) entries.push_back({{"lambda", number_json(e.lambda)}, {"multiplicity", e.multiplicity}});
  return {{"entries", entries}, {"tail_rule", s.tail_rule()}};
}

json classification_json(const PHClassification& c) {
  return {{"d", c.d},
          {"c", c.c},
          {"ell", c.ell},
          {"alpha", number_json(c.alpha)},
          {"beta", number_json(c.beta)},
          {"verdict", to_string(c.verdict)},
          {"reason", c.reason}};
}

json returns_json(const ReturnStats& r) {
  json j = {{"mean_return", number_json(r.mean_return)},
            {"visit_count", r.visit_count},
            {"visit_fraction", number_json(r.visit_fraction)}};
  if (r.diagnostic) j["diagnostic"] = *r.diagnostic;
  return j;
}

/// Running sums of exponents [begin, end) along a QR trace.
void trace_sum(Outcome& out, const QrResult& q, const std::string& quantity, int begin, int end) {
  for (std::size_t i = 0; i < q.trace_steps.size(); ++i) {
    out.trace.push_back({q.trace_steps[i], quantity, q.trace_values[i].segment(begin, end - begin).sum()});
  }
}

void trace_each(Outcome& out, const QrResult& q, const std::string& prefix) {
  for (std::size_t i = 0; i < q.trace_steps.size(); ++i) {
    for (Eigen::Index j = 0; j < q.trace_values[i].size(); ++j) {
      out.trace.push_back({q.trace_steps[i], prefix + std::to_string(j + 1), q.trace_values[i](j)});
    }
  }
}

double sup_norm(const Cocycle& a, const std::vector<BasePoint>& points) {
  double s = 0.0;
  for (const auto& x : points) s = std::max(s, operator_norm(a(x)));
  return s;
}

double sup_distance(const Cocycle& a, const Cocycle& b, const std::vector<BasePoint>& points) {
  double s = 0.0;
  for (const auto& x : points) s = std::max(s, operator_distance(a(x), b(x)));
  return s;
}

/// Exponents of a diagonal head, largest first; -inf for zero entries.
std::optional<Eigen::VectorXd> diagonal_exponents(const Cocycle& a) {
  if (!a.is_constant()) return std::nullopt;
  const Eigen::MatrixXd b = a(make_point({0.0})).block();
  if (!b.isDiagonal(0.0)) return std::nullopt;
  Eigen::VectorXd e = b.diagonal().cwiseAbs().array().log();
  std::sort(e.data(), e.data() + e.size(), std::greater<>());
  return e;
}

bool close_exponent(double got, double want, double tol) {
  if (std::isinf(want)) return got <= kMinusInfinityLogThreshold;
  return std::abs(got - want) <= tol;
}

// ---------------------------------------------------------------------------

Outcome spectrum_scenario(const Context& ctx) {
  const Node p = section(ctx, "parameters");
  const Node t = section(ctx, "tolerances");
  p.allow({"horizon", "k", "x0", "svd_horizon", "gap_tolerance", "trace_points"});
  t.allow({"closed_form", "cross_method"});
  const BaseSystem sys = base_of(ctx);
  const CocycleSetup setup = cocycle_of(ctx);
  const Cocycle& a = setup.cocycle;
  const Eigen::Index m = a.truncation();
  const long long horizon = horizon_of(p, 10000);
  const int k = static_cast<int>(p.integer("k", std::min<long long>(m, 4), 1, m));
  const long long svd_cap = std::max<long long>(1, static_cast<long long>(4e7 / static_cast<double>(m * m)));
  const long long svd_horizon = p.integer("svd_horizon", std::min(horizon, svd_cap), 1, svd_cap);
  const double gap = p.number_in("gap_tolerance", kDefaultGapTolerance, 0.0, 1.0);
  const int trace_points = static_cast<int>(p.integer("trace_points", 64, 0, 100000));
  const double closed_tol = t.number_in("closed_form", 1e-9, 0.0, 1.0);
  const double cross_tol = t.number_in("cross_method", 1e-3, 0.0, 10.0);
  const BasePoint x0 = start_point(p, sys, ctx.seed);

  Outcome out;
  const QrResult qr = lyapunov_qr(a, sys, x0, horizon, k, trace_points);
  const SingularExponents sv = limit_operator_svd(a, sys, x0, svd_horizon);
  const LyapunovSpectrum spectrum = make_spectrum(qr.exponents, gap, a);

  json svd_head = json::array();
  for (const auto& e : sv.head) svd_head.push_back(exponent_json(e));
  json lp = json::array();
  for (int q = 1; q <= k; ++q) lp.push_back(number_json(lambda_p(spectrum, q)));
  out.results["x0"] = point_json(x0);
  out.results["qr"] = qr_json(qr);
  out.results["svd"] = {{"horizon", svd_horizon},
                        {"head", svd_head},
                        {"tail_rule", spectrum.tail_rule()},
                        {"accumulated", sv.accumulated}};
  out.results["spectrum"] = spectrum_json(spectrum);
  out.results["lambda_p"] = lp;

  if (const auto expected = diagonal_exponents(a)) {
    double qr_err = 0.0;
    double svd_err = 0.0;
    bool qr_ok = true;
    bool svd_ok = true;
    for (int j = 0; j < k; ++j) {
      const double want = (*expected)(j);
      qr_ok = qr_ok && close_exponent(qr.exponents(j), want, closed_tol);
      svd_ok = svd_ok && close_exponent(sv.head[j].as_double(), want, closed_tol);
      if (std::isfinite(want)) {
        qr_err = std::max(qr_err, std::abs(qr.exponents(j) - want));
        svd_err = std::max(svd_err, std::abs(sv.head[j].as_double() - want));
      }
    }
    out.results["closed_form"] = {{"expected", vector_json(expected->head(k))},
                                  {"qr_max_error", qr_err},
                                  {"svd_max_error", svd_err}};
    out.verdict("qr_closed_form", qr_ok);
    out.verdict("svd_closed_form", svd_ok);
  } else {
    double diff = 0.0;
    for (int j = 0; j < k; ++j) {
      const double s = sv.head[j].as_double();
      diff = std::max(diff, std::isinf(s) && qr.exponents(j) <= kMinusInfinityLogThreshold ? 0.0
                                                                                        : std::abs(qr.exponents(j) - s));
    }
    out.results["qr_svd_max_difference"] = number_json(diff);
    out.verdict("qr_svd_agreement", diff <= cross_tol);
  }
  trace_each(out, qr, "lambda_");
  return out;
}

// ---------------------------------------------------------------------------

struct PerturbationSetup {
  PerturbationParams params;
  Cocycle b;
};

PerturbationSetup perturbation_of(const Node& p, const Cocycle& a, const BaseSystem& sys, const SplittingSpec& split,
                                  std::uint64_t seed, const std::vector<BasePoint>& points, double omega_default) {
  const double r = positive(p, "r", 0.05, 0.5);
  const double inner = p.number_in("inner_fraction", 0.5, 0.0, 1.0);
  if (!(inner < 1.0)) p.fail("inner_fraction", "must be below 1");
  const BasePoint center = center_point(p, sys, seed);
  if (p.has("omega") && p.has("epsilon")) p.fail("omega", "give either omega or epsilon, not both");
  PerturbationParams params;
  if (p.has("omega") || (!p.has("epsilon") && omega_default > 0.0)) {
    params = params_for_angle(a, split, center, r, p.number_in("omega", omega_default, 0.0, 1.5), points);
  } else {
    params = params_for_budget(a, split, center, r, positive(p, "epsilon", 0.1, 10.0), points);
  }
  params.inner_fraction = inner;
  return {params, perturb_cu(a, sys, split, params)};
}

json item_json(const ItemCheck& c) {
  json j = {{"pass", c.pass}, {"worst", number_json(c.worst)}};
  if (c.witness) j["witness"] = point_json(*c.witness);
  return j;
}

Outcome theorem_a_scenario(const Context& ctx) {
  const Node p = section(ctx, "parameters");
  const Node t = section(ctx, "tolerances");
  p.allow({"epsilon", "omega", "r", "inner_fraction", "center", "horizon", "x0", "samples"});
  t.allow({"entropy", "unstable_drop", "central_sum"});
  const BaseSystem sys = base_of(ctx);
  const CocycleSetup setup = cocycle_of(ctx);
  const Cocycle& a = setup.cocycle;
  const SplittingSpec split = splitting_of(ctx, setup);
  const auto samples = static_cast<std::size_t>(p.integer("samples", 1000, 1, 10000000));
  const std::vector<BasePoint> points = sample_measure(sys, ctx.seed, samples);
  const PerturbationSetup pert = perturbation_of(p, a, sys, split, ctx.seed, points, 0.0);

  LemmaOptions opts;
  opts.horizon = horizon_of(p, 100000);
  opts.seed = ctx.seed;
  opts.samples = samples;
  opts.x0 = start_point(p, sys, ctx.seed);
  opts.entropy_tolerance = positive(t, "entropy", 1e-2, 10.0);
  opts.threads = ctx.threads;
  const PerturbationReport rep = verify_lemma(a, pert.b, sys, split, pert.params, opts);

  Outcome out;
  out.results["perturbation"] = perturbation_json(pert.params);
  out.results["items"] = {{"equal_outside_ball", item_json(rep.equal_outside_ball)},
                          {"stable_action_preserved", item_json(rep.stable_action_preserved)},
                          {"rotation_form", item_json(rep.rotation_form)},
                          {"norm_distance", item_json(rep.norm_distance)}};
  out.results["entropy"] = {{"before", rep.entropy_before},
                            {"after", rep.entropy_after},
                            {"gap", rep.entropy_gap},
                            {"discrepancy_before", rep.entropy_discrepancy_before},
                            {"discrepancy_after", rep.entropy_discrepancy_after}};
  out.results["unstable"] = {{"before", rep.unstable_before}, {"after", rep.unstable_after}, {"drop", rep.unstable_drop}};
  out.results["central_sum"] = {{"before", rep.central_sum_before}, {"after", rep.central_sum_after}};
  out.results["predicted_drop"] = {{"full", number_json(rep.predicted_full_drop)},
                                   {"visit_fraction", number_json(rep.predicted_kac_drop)}};
  out.results["returns"] = returns_json(rep.returns);
  out.results["horizon"] = rep.horizon;
  out.results["failures"] = rep.failures;

  out.verdict("equal_outside_ball", rep.equal_outside_ball.pass);
  out.verdict("stable_action_preserved", rep.stable_action_preserved.pass);
  out.verdict("rotation_form", rep.rotation_form.pass);
  out.verdict("norm_distance", rep.norm_distance.pass);
  out.verdict("entropy_conserved", rep.entropy_pass);
  out.verdict("central_sum_positive", rep.central_pass);
  if (t.has("unstable_drop")) {
    out.verdict("unstable_drop_margin", rep.unstable_after < rep.unstable_before - t.number("unstable_drop"));
  }
  if (t.has("central_sum")) out.verdict("central_sum_margin", rep.central_sum_after > t.number("central_sum"));

  if (rep.norm_distance.witness) {
    out.witnesses.push_back({{"id", "norm_distance"},
                             {"kind", "norm_distance"},
                             {"stage", stage_b(pert.params)},
                             {"point", point_json(*rep.norm_distance.witness)},
                             {"value", number_json(rep.norm_distance.worst)},
                             {"bound", pert.params.epsilon}});
  }
  trace_sum(out, rep.qr_before, "A.unstable", 0, split.d);
  trace_sum(out, rep.qr_before, "A.central_sum", split.d, split.D());
  trace_sum(out, rep.qr_after, "B.unstable", 0, split.d);
  trace_sum(out, rep.qr_after, "B.central_sum", split.d, split.D());
  return out;
}

// ---------------------------------------------------------------------------

struct Thresholds {
  double alpha_uc = 0.0;
  double theta_uc = 0.0;
  double alpha_cs = 0.0;
  double theta_cs = 0.0;
};

struct StageCheck {
  QrResult qr;
  LyapunovSpectrum spectrum;
  DominationResult uc;
  DominationResult cs;
  PHClassification ph;
};

StageCheck check_stage(const Cocycle& a, const BaseSystem& sys, const SplittingSpec& split, const BasePoint& x0,
                       long long horizon, int ell, const Thresholds& th, const SamplingPlan& plan, double zero_gap) {
  const int k = static_cast<int>(std::min<Eigen::Index>(split.D() + 2, a.truncation()));
  StageCheck s;
  s.qr = lyapunov_qr(a, sys, x0, horizon, k);
  s.spectrum = make_spectrum(s.qr.exponents, kDefaultGapTolerance, a);
  s.uc = check_domination(a, sys, split.unstable_bundle(), split.central_bundle(), ell, th.alpha_uc, th.theta_uc, plan);
  s.cs = check_domination(a, sys, split.central_bundle(), split.stable_bundle(), ell, th.alpha_cs, th.theta_cs, plan);
  s.ph = classify_ph(s.spectrum, {s.uc, s.cs}, zero_gap);
  return s;
}

json stage_json(const StageCheck& s) {
  return {{"qr", qr_json(s.qr)},
          {"spectrum", spectrum_json(s.spectrum)},
          {"unstable_central", domination_json(s.uc)},
          {"central_stable", domination_json(s.cs)},
          {"classification", classification_json(s.ph)}};
}

void stage_witnesses(Outcome& out, const std::string& name, const json& stage, const StageCheck& s,
                     const Thresholds& th) {
  out.witnesses.push_back(
      domination_witness(name + ":unstable/central", stage, s.uc.certificate, th.alpha_uc, th.theta_uc));
  out.witnesses.push_back(
      domination_witness(name + ":central/stable", stage, s.cs.certificate, th.alpha_cs, th.theta_cs));
}

Outcome theorem_b_scenario(const Context& ctx) {
  const Node p = section(ctx, "parameters");
  p.allow({"epsilon", "r", "inner_fraction", "center", "horizon", "x0", "samples", "zero_gap", "frame_horizon",
           "max_rounds", "ell", "sampling"});
  section(ctx, "tolerances").allow({});
  const BaseSystem sys = base_of(ctx);
  const CocycleSetup setup = cocycle_of(ctx);
  const Cocycle& a = setup.cocycle;
  const SplittingSpec split = splitting_of(ctx, setup);
  const double epsilon = positive(p, "epsilon", 0.1, 10.0);
  const long long horizon = horizon_of(p, 100000);
  const auto samples = static_cast<std::size_t>(p.integer("samples", 1000, 1, 10000000));
  const double zero_gap = positive(p, "zero_gap", 1e-2, 10.0);
  const int frame_horizon = static_cast<int>(p.integer("frame_horizon", 48, 1, 100000));
  const int max_rounds = static_cast<int>(p.integer("max_rounds", 3, 1, 100));
  const int ell = static_cast<int>(p.integer("ell", 1, 1, 64));
  const SamplingPlan plan = make_sampling(p.optional_child("sampling"), ctx.seed, ctx.threads, 300, 1000);
  const BasePoint x0 = start_point(p, sys, ctx.seed);
  const std::vector<BasePoint> points = sample_measure(sys, ctx.seed, samples);

  // Thresholds every stage is held to: the constants the perturbation theory guarantees.
  const SplittingCertificate tight_uc =
      tightest_constants(a, sys, split.unstable_bundle(), split.central_bundle(), ell, plan);
  const SplittingCertificate tight_cs =
      tightest_constants(a, sys, split.central_bundle(), split.stable_bundle(), ell, plan);
  if (!(tight_uc.alpha < 1.0 && tight_cs.alpha < 1.0)) {
    throw PreconditionError("theorem-B: the configured splitting of A is not dominated");
  }
  const Thresholds th{rho_after(tight_uc.alpha), tight_uc.theta / 2.0, rho_after(tight_cs.alpha),
                      tight_cs.theta / 2.0};
  const double k = k_ell(sup_norm(a, points), epsilon, ell);
  const double eps_max = std::min(epsilon_max(tight_uc.theta, ell, tight_uc.alpha, k),
                                  epsilon_max(tight_cs.theta, ell, tight_cs.alpha, k));

  Outcome out;
  out.results["thresholds"] = {{"alpha_unstable_central", th.alpha_uc},
                               {"theta_unstable_central", th.theta_uc},
                               {"alpha_central_stable", th.alpha_cs},
                               {"theta_central_stable", th.theta_cs},
                               {"k_ell", k},
                               {"epsilon_max", eps_max}};

  const StageCheck sa = check_stage(a, sys, split, x0, horizon, ell, th, plan, zero_gap);
  out.results["A"] = stage_json(sa);
  stage_witnesses(out, "A", stage_a(), sa, th);

  const PerturbationSetup pert = perturbation_of(p, a, sys, split, ctx.seed, points, 0.0);
  const SplittingSpec split_b = finite_time_splitting(pert.b, sys, split, frame_horizon);
  const StageCheck sb = check_stage(pert.b, sys, split_b, x0, horizon, ell, th, plan, zero_gap);
  out.results["B"] = stage_json(sb);
  out.results["B"]["perturbation"] = perturbation_json(pert.params);
  stage_witnesses(out, "B", stage_b(pert.params), sb, th);

  const BalanceResult bal = balance_central_iterated(pert.b, sys, split, epsilon, x0, horizon, max_rounds, points);
  const SplittingSpec split_c = finite_time_splitting(bal.cocycle, sys, split, frame_horizon);
  const StageCheck sc = check_stage(bal.cocycle, sys, split_c, x0, horizon, ell, th, plan, zero_gap);
  const double dist_cb = sup_distance(bal.cocycle, pert.b, points);
  const Eigen::VectorXd central = sc.qr.exponents.segment(split.d, split.c);
  const double spread = central.maxCoeff() - central.minCoeff();
  const double min_abs = central.cwiseAbs().minCoeff();
  out.results["C"] = stage_json(sc);
  out.results["C"]["balance"] = {{"log_factors", vector_json(bal.log_factors)},
                                 {"budget", bal.budget},
                                 {"rounds", bal.rounds},
                                 {"needs_iteration", bal.needs_iteration},
                                 {"diagnostic", bal.diagnostic},
                                 {"distance_to_B", dist_cb},
                                 {"central_exponents", vector_json(central)},
                                 {"central_spread", spread},
                                 {"central_min_abs", min_abs}};
  stage_witnesses(out, "C", stage_c(pert.params, bal.log_factors), sc, th);

  out.verdict("epsilon_within_persistence_bound", epsilon <= eps_max);
  out.verdict("A_partially_hyperbolic", sa.ph.verdict == PhVerdict::partially_hyperbolic);
  out.verdict("B_partially_hyperbolic", sb.ph.verdict != PhVerdict::fail);
  out.verdict("B_dimensions_unchanged", sb.ph.d == split.d && sb.ph.c == split.c);
  out.verdict("C_non_uniformly_anosov", sc.ph.verdict == PhVerdict::non_uniformly_anosov);
  out.verdict("C_within_budget", dist_cb <= epsilon * bal.rounds * (1.0 + 1e-12));
  out.verdict("C_central_spread", spread < 4.0 * epsilon);
  out.verdict("C_central_away_from_zero", min_abs > zero_gap);

  for (const auto& [name, s] : {std::pair{"A", &sa}, std::pair{"B", &sb}, std::pair{"C", &sc}}) {
    trace_sum(out, s->qr, std::string(name) + ".unstable", 0, split.d);
    trace_sum(out, s->qr, std::string(name) + ".central_sum", split.d, split.D());
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome domination_scenario(const Context& ctx) {
  const Node p = section(ctx, "parameters");
  p.allow({"ell", "pairs", "sampling", "finest"});
  section(ctx, "tolerances").allow({});
  const BaseSystem sys = base_of(ctx);
  const CocycleSetup setup = cocycle_of(ctx);
  const Cocycle& a = setup.cocycle;
  const SplittingSpec split = splitting_of(ctx, setup);
  const int ell = static_cast<int>(p.integer("ell", 1, 1, 64));
  const SamplingPlan plan = make_sampling(p.optional_child("sampling"), ctx.seed, ctx.threads, 1000, 10000);

  Outcome out;
  out.results["pairs"] = json::array();
  for (const Node& pair : p.children("pairs")) {
    pair.allow({"first", "second", "alpha", "theta"});
    const std::string first = pair.text("first");
    const std::string second = pair.text("second");
    Bundle e1;
    Bundle e2;
    try {
      e1 = bundle_by_name(split, first);
      e2 = bundle_by_name(split, second);
    } catch (const ConfigError& e) {
      pair.fail("first", e.what());
    }
    const std::string id = first + "/" + second;
    const SplittingCertificate tight = tightest_constants(a, sys, e1, e2, ell, plan);
    json entry = {{"first", first}, {"second", second}, {"tightest", certificate_json(tight)}};
    std::optional<double> alpha;
    std::optional<double> theta;
    if (pair.has("alpha") || pair.has("theta")) {
      alpha = pair.number_in("alpha", 0.5, 0.0, 1.0);
      theta = pair.number("theta", 0.0);
      const DominationResult r = check_domination(a, sys, e1, e2, ell, *alpha, *theta, plan);
      entry["check"] = domination_json(r);
      out.verdict(id, r.pass);
      out.witnesses.push_back(domination_witness(id, stage_a(), r.certificate, alpha, theta));
    } else {
      out.verdict(id, tight.alpha < 1.0 && tight.theta > 0.0 && tight.invariance_drift <= kInvarianceTolerance);
      out.witnesses.push_back(domination_witness(id, stage_a(), tight, std::nullopt, std::nullopt));
    }
    out.results["pairs"].push_back(entry);
  }

  if (const auto f = p.optional_child("finest")) {
    f->allow({"bundle", "ell", "gap_tolerance", "expected_blocks"});
    const std::string name = f->text("bundle", "center_unstable");
    FrameField frames;
    try {
      frames = bundle_by_name(split, name).head;
    } catch (const ConfigError& e) {
      f->fail("bundle", e.what());
    }
    const FinestPartition part = finest_search(a, sys, frames, static_cast<int>(f->integer("ell", ell, 1, 64)),
                                               f->number_in("gap_tolerance", 0.1, 0.0, 1.0), plan);
    out.results["finest"] = {{"bundle", name}, {"blocks", part.blocks}, {"split_alphas", part.split_alphas}};
    if (f->has("expected_blocks")) out.verdict("finest_partition", part.blocks == f->integers("expected_blocks"));
  }
  return out;
}

// ---------------------------------------------------------------------------

json entropy_json(const EntropyReport& e) {
  return {{"birkhoff", e.birkhoff}, {"spectral", e.spectral}, {"discrepancy", e.discrepancy}, {"horizon", e.horizon}};
}

Outcome entropy_scenario(const Context& ctx) {
  const Node p = section(ctx, "parameters");
  const Node t = section(ctx, "tolerances");
  p.allow({"horizon", "x0", "omega", "r", "inner_fraction", "center", "samples"});
  t.allow({"unperturbed", "perturbed"});
  const BaseSystem sys = base_of(ctx);
  const CocycleSetup setup = cocycle_of(ctx);
  const Cocycle& a = setup.cocycle;
  const SplittingSpec split = splitting_of(ctx, setup);
  const long long horizon = horizon_of(p, 100000);
  const BasePoint x0 = start_point(p, sys, ctx.seed);
  const auto samples = static_cast<std::size_t>(p.integer("samples", 1000, 1, 10000000));
  const double tol_a = positive(t, "unperturbed", 1e-9, 10.0);
  const double tol_b = positive(t, "perturbed", 1e-2, 10.0);
  const std::vector<BasePoint> points = sample_measure(sys, ctx.seed, samples);
  const PerturbationSetup pert = perturbation_of(p, a, sys, split, ctx.seed, points, 0.2);

  const EntropyReport ea = cu_entropy(a, sys, split, x0, horizon);
  const EntropyReport eb = cu_entropy(pert.b, sys, split, x0, horizon);
  Outcome out;
  out.results["unperturbed"] = entropy_json(ea);
  out.results["perturbed"] = entropy_json(eb);
  out.results["perturbation"] = perturbation_json(pert.params);
  out.verdict("unperturbed_dual_path", ea.discrepancy < tol_a);
  out.verdict("perturbed_dual_path", eb.discrepancy < tol_b);
  out.verdict("entropy_conserved", std::abs(eb.birkhoff - ea.birkhoff) < tol_b);
  return out;
}

// ---------------------------------------------------------------------------

Outcome persistence_scenario(const Context& ctx) {
  const Node p = section(ctx, "parameters");
  p.allow({"first", "second", "ell", "alpha", "theta", "magnitudes", "trials", "sampling", "expect_pass_up_to",
           "expect_fail_at"});
  section(ctx, "tolerances").allow({});
  const BaseSystem sys = base_of(ctx);
  const CocycleSetup setup = cocycle_of(ctx);
  const Cocycle& a = setup.cocycle;
  const SplittingSpec split = splitting_of(ctx, setup);
  const std::string first = p.text("first", "unstable");
  const std::string second = p.text("second", "central");
  Bundle e1;
  Bundle e2;
  try {
    e1 = bundle_by_name(split, first);
    e2 = bundle_by_name(split, second);
  } catch (const ConfigError& e) {
    p.fail("first", e.what());
  }
  const int ell = static_cast<int>(p.integer("ell", 1, 1, 64));
  const int trials = static_cast<int>(p.integer("trials", 32, 1, 100000));
  const SamplingPlan plan = make_sampling(p.optional_child("sampling"), ctx.seed, ctx.threads, 200, 500);
  std::vector<double> magnitudes = {0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 1.5};
  if (p.has("magnitudes")) magnitudes = p.numbers("magnitudes");
  for (double m : magnitudes) {
    if (!(m >= 0.0)) p.fail("magnitudes", "magnitudes must be non-negative");
  }

  const SplittingCertificate tight = tightest_constants(a, sys, e1, e2, ell, plan);
  const double alpha = p.has("alpha") ? p.number_in("alpha", 0.5, 0.0, 1.0) : rho_after(tight.alpha);
  const double theta = p.has("theta") ? p.number("theta") : tight.theta / 2.0;
  const DominationResult base = check_domination(a, sys, e1, e2, ell, alpha, theta, plan);
  const PersistenceTable table = persistence_probe(a, sys, e1, e2, ell, alpha, theta, magnitudes, ctx.seed, trials, plan);

  Outcome out;
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"delta", r.delta},
                    {"pass", r.pass},
                    {"alpha_worst", number_json(r.alpha_worst)},
                    {"theta_worst", number_json(r.theta_worst)},
                    {"trials", r.trials}});
  }
  out.results["pair"] = {{"first", first}, {"second", second}, {"ell", ell}, {"alpha", alpha}, {"theta", theta}};
  out.results["tightest"] = certificate_json(tight);
  out.results["rows"] = rows;
  out.results["first_failure"] = table.first_failure ? json(*table.first_failure) : json(nullptr);
  out.verdict("base_certificate", base.pass);
  out.witnesses.push_back(domination_witness(first + "/" + second, stage_a(), base.certificate, alpha, theta));

  if (p.has("expect_pass_up_to")) {
    const double up_to = p.number("expect_pass_up_to");
    bool ok = true;
    for (const auto& r : table.rows) ok = ok && (r.delta > up_to || r.pass);
    out.verdict("persists_up_to_expected", ok);
  }
  if (p.has("expect_fail_at")) {
    const double at = p.number("expect_fail_at");
    const auto it = std::find_if(table.rows.begin(), table.rows.end(), [&](const auto& r) { return r.delta == at; });
    if (it == table.rows.end()) p.fail("expect_fail_at", "must be one of the magnitudes");
    out.verdict("fails_at_expected", !it->pass);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome kac_scenario(const Context& ctx) {
  const Node p = section(ctx, "parameters");
  const Node t = section(ctx, "tolerances");
  p.allow({"r", "horizon", "center", "x0"});
  t.allow({"relative"});
  const BaseSystem sys = base_of(ctx);
  const double r = positive(p, "r", 0.05, 0.5);
  const long long horizon = horizon_of(p, 100000);
  const double tol = positive(t, "relative", 0.1, 10.0);
  const BasePoint center = center_point(p, sys, ctx.seed);
  const BasePoint x0 = start_point(p, sys, ctx.seed + 1);

  const double measure = sys.dim() == 1 ? 2.0 * r : std::numbers::pi * r * r;
  const ReturnStats s = return_time_stats(sys, center, r, x0, horizon);
  const double kac = 1.0 / measure;
  const double rel = std::abs(s.mean_return - kac) / kac;
  Outcome out;
  out.results["center"] = point_json(center);
  out.results["x0"] = point_json(x0);
  out.results["ball_measure"] = measure;
  out.results["kac_mean_return"] = kac;
  out.results["returns"] = returns_json(s);
  out.results["relative_error"] = number_json(rel);
  out.verdict("kac_mean_return", rel <= tol);
  return out;
}

}  // namespace

const std::vector<ScenarioInfo>& scenarios() {
  static const std::vector<ScenarioInfo> all = {
      {"example-2.8-spectrum", "Lyapunov spectrum by QR and by the limit-operator SVD", spectrum_scenario},
      {"theorem-A", "rotation-bump perturbation checked item by item", theorem_a_scenario},
      {"theorem-B", "perturbation, central balancing and partial-hyperbolicity classification", theorem_b_scenario},
      {"domination-certify", "domination constants, checks and the finest dominated partition", domination_scenario},
      {"entropy-dualpath", "center-unstable entropy by determinant average and by exponent sum", entropy_scenario},
      {"persistence-probe", "domination under random perturbations of growing size", persistence_scenario},
      {"kac-return", "mean return time to a ball against the inverse of its measure", kac_scenario},
  };
  return all;
}

Cocycle rebuild_stage(const json& stage, const Context& ctx) {
  const CocycleSetup setup = cocycle_of(ctx);
  const std::string name = stage.at("name").get<std::string>();
  if (name == "A") return setup.cocycle;
  const BaseSystem sys = base_of(ctx);
  const SplittingSpec split = splitting_of(ctx, setup);
  const Cocycle b = perturb_cu(setup.cocycle, sys, split, perturbation_from(stage.at("perturbation")));
  if (name == "B") return b;
  if (name == "C") {
    const json& f = stage.at("log_factors");
    Eigen::VectorXd s(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) s(static_cast<Eigen::Index>(i)) = f[i].get<double>();
    return Cocycle::central_scaling(b, s, split);
  }
  throw ConfigError("witness stage '" + name + "' is not one of A, B, C");
}

}  // namespace cocyclab::cli
