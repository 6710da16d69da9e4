#include "cocyclab/domination.hpp"

#include "cocyclab/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace cocyclab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PointEval {
  double ratio = 0.0;
  HVector u;
  HVector v;
  double theta = kInf;
  double gamma = std::numbers::pi / 2;
  double drift = 0.0;
  bool rank_loss = false;
};

// Largest sine between a pushed frame column and span(target).
double pushed_drift(const Eigen::MatrixXd& pushed, const Eigen::MatrixXd& target) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < pushed.cols(); ++j) {
    const double n = pushed.col(j).norm();
    if (n == 0.0) continue;
    const Eigen::VectorXd r = pushed.col(j) - target * (target.transpose() * pushed.col(j));
    worst = std::max(worst, r.norm() / n);
  }
  return worst;
}

// Smallest singular value of w and its right singular vector.
std::pair<double, Eigen::VectorXd> smallest_direction(const Eigen::MatrixXd& w) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullV);
  const Eigen::Index k = w.cols();
  return {svd.singularValues()(k - 1), svd.matrixV().col(k - 1)};
}

// Largest singular value of w and its right singular vector.
std::pair<double, Eigen::VectorXd> largest_direction(const Eigen::MatrixXd& w) {
  if (w.cols() <= 8) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullV);
    return {svd.singularValues()(0), svd.matrixV().col(0)};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w.transpose() * w);
  const Eigen::Index k = w.cols();
  return {std::sqrt(std::max(0.0, eig.eigenvalues()(k - 1))), eig.eigenvectors().col(k - 1)};
}

PointEval evaluate(const Cocycle& a, const BaseSystem& sys, const Bundle& e1, const Bundle& e2, int ell,
                   const BasePoint& x) {
  const Eigen::Index m = a.truncation();
  const auto mm = static_cast<long long>(m);
  const Tail<> tail_ell = a.tail().pow(ell);
  const Eigen::MatrixXd q1 = e1.head.at(x);
  const Eigen::MatrixXd q2 = e2.head.at(x);
  PointEval pe;

  const Operator first = a(x);
  const BasePoint fx = step(sys, x, 1);
  Eigen::MatrixXd w1 = first.block() * q1;
  Eigen::MatrixXd w2 = first.block() * q2;
  if (q1.cols() > 0) {
    pe.theta = min_singular_value(w1);
    pe.drift = std::max(pe.drift, pushed_drift(w1, e1.head.at(fx)));
  }
  if (q2.cols() > 0) pe.drift = std::max(pe.drift, pushed_drift(w2, e2.head.at(fx)));
  if (e1.includes_tail) pe.theta = std::min(pe.theta, a.tail().inf_beyond(mm));
  if (q1.cols() > 0 && q2.cols() > 0) pe.gamma = principal_angles(q1, q2).minCoeff();

  BasePoint y = fx;
  for (int j = 1; j < ell; ++j) {
    const Operator op = a(y);
    w1 = op.block() * w1;
    w2 = op.block() * w2;
    y = step(sys, y, 1);
  }

  double den = kInf;
  pe.u = HVector::basis(m, m + 1);
  if (q1.cols() > 0) {
    auto [s, dir] = smallest_direction(w1);
    den = s;
    pe.u = HVector{q1 * dir, Eigen::VectorXd()};
  }
  if (e1.includes_tail) {
    const double t = tail_ell.inf_beyond(mm);
    if (t < den) {
      den = t;
      pe.u = HVector::basis(m, m + 1);
    }
  }
  double num = 0.0;
  pe.v = HVector::basis(m, m + 1);
  if (q2.cols() > 0) {
    auto [s, dir] = largest_direction(w2);
    num = s;
    pe.v = HVector{q2 * dir, Eigen::VectorXd()};
  }
  if (e2.includes_tail) {
    const double t = tail_ell.sup_beyond(mm);
    if (t > num) {
      num = t;
      pe.v = HVector::basis(m, m + 1);
    }
  }
  pe.rank_loss = !(pe.theta > 0.0) || !(den > 0.0);
  pe.ratio = den > 0.0 ? num / den : kInf;
  return pe;
}

std::vector<BasePoint> sample_points(const BaseSystem& sys, const SamplingPlan& plan) {
  std::vector<BasePoint> pts;
  if (plan.measure_samples > 0) pts = sample_measure(sys, plan.seed, plan.measure_samples);
  if (plan.orbit_length > 0) {
    BasePoint x = sample_measure(sys, plan.seed + 0x9E3779B97F4A7C15ULL, 1).front();
    for (long long j = 0; j < plan.orbit_length; ++j) {
      pts.push_back(x);
      x = step(sys, x, 1);
    }
  }
  if (pts.empty()) throw PreconditionError("sampling plan selects no points");
  return pts;
}

void check_inputs(const Cocycle& a, const Bundle& e1, const Bundle& e2, int ell, const BasePoint& x) {
  if (ell < 1) throw PreconditionError("domination: ell must be at least 1");
  if (e1.head.rows() != a.truncation() || e2.head.rows() != a.truncation()) {
    throw ShapeError("domination: bundle frames must have M rows");
  }
  if (e1.includes_tail && e2.includes_tail) throw PreconditionError("domination: bundles overlap in the tail");
  if ((e1.head.cols() == 0 && !e1.includes_tail) || (e2.head.cols() == 0 && !e2.includes_tail)) {
    throw PreconditionError("domination: empty bundle");
  }
  const Eigen::MatrixXd q1 = e1.head.at(x);
  const Eigen::MatrixXd q2 = e2.head.at(x);
  if (orthonormality_defect(q1) > 1e-8 || orthonormality_defect(q2) > 1e-8) {
    throw PreconditionError("domination: frames must be orthonormal");
  }
  if (q1.cols() > 0 && q2.cols() > 0 && principal_angles(q1, q2).minCoeff() < 1e-10) {
    throw PreconditionError("domination: bundles are not independent");
  }
}

}  // namespace

Eigen::MatrixXd direction_grid(int dim, int count, std::uint64_t seed) {
  if (dim < 1 || count < 1) throw PreconditionError("direction_grid: dim and count must be positive");
  if (dim == 1) return Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd g(dim, count);
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double t = std::numbers::pi * i / count;
      g.col(i) << std::cos(t), std::sin(t);
    }
    return g;
  }
  if (dim == 3) {
    const double turn = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      g.col(i) << r * std::cos(turn * i), r * std::sin(turn * i), z;
    }
    return g;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int i = 0; i < count; ++i) {
    for (int r = 0; r < dim; ++r) g(r, i) = normal(rng);
    g.col(i).normalize();
  }
  return g;
}

SplittingCertificate tightest_constants(const Cocycle& a, const BaseSystem& sys, const Bundle& e1, const Bundle& e2,
                                        int ell, const SamplingPlan& plan) {
  const std::vector<BasePoint> pts = sample_points(sys, plan);
  check_inputs(a, e1, e2, ell, pts.front());
  const std::vector<PointEval> evals =
      parallel_map(pts.size(), plan.threads, [&](std::size_t i) { return evaluate(a, sys, e1, e2, ell, pts[i]); });

  SplittingCertificate c;
  c.ell = ell;
  c.dim1 = static_cast<int>(e1.head.cols());
  c.dim2 = static_cast<int>(e2.head.cols());
  c.tail1 = e1.includes_tail;
  c.tail2 = e2.includes_tail;
  c.samples = static_cast<long long>(pts.size());
  c.alpha = -1.0;
  c.theta = kInf;
  c.gamma = kInf;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    const PointEval& pe = evals[i];
    if (pe.ratio > c.alpha) {
      c.alpha = pe.ratio;
      c.worst_witness = {pts[i], pe.u, pe.v, pe.ratio};
    }
    if (i < plan.measure_samples) {
      c.alpha_measure = std::max(c.alpha_measure, pe.ratio);
    } else {
      c.alpha_orbit = std::max(c.alpha_orbit, pe.ratio);
    }
    c.theta = std::min(c.theta, pe.theta);
    c.gamma = std::min(c.gamma, pe.gamma);
    c.invariance_drift = std::max(c.invariance_drift, pe.drift);
  }
  return c;
}

DominationResult check_domination(const Cocycle& a, const BaseSystem& sys, const Bundle& e1, const Bundle& e2, int ell,
                                  double alpha, double theta, const SamplingPlan& plan) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("check_domination: alpha must lie in (0,1)");
  if (!(theta > 0.0)) throw PreconditionError("check_domination: theta must be positive");
  DominationResult r;
  r.certificate = tightest_constants(a, sys, e1, e2, ell, plan);
  const SplittingCertificate& c = r.certificate;
  auto note = [&](const std::string& s) { r.violations.push_back(s); };
  std::ostringstream os;
  os.precision(17);
  if (c.invariance_drift >= kInvarianceTolerance) {
    os << "(I) invariance: pushed frame leaves its bundle, drift " << c.invariance_drift;
    note(os.str());
    os.str("");
  }
  if (!(c.theta > 0.0)) {
    note("(III.1) kernel of A(x) meets E1");
  } else if (c.theta < theta) {
    os << "(III.1) min ||A(x)u|| = " << c.theta << " < theta = " << theta;
    note(os.str());
    os.str("");
  }
  if (!(c.alpha <= alpha)) {
    os << "(III.2) ratio " << c.alpha << " > alpha = " << alpha;
    note(os.str());
  }
  r.pass = r.violations.empty();
  return r;
}

FrameField column_slice(const FrameField& f, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > f.cols()) throw ShapeError("column_slice: range outside the frame");
  if (f.is_constant()) return FrameField::constant(f.constant_value().middleCols(begin, count));
  return FrameField::from_function(f.rows(), count, [f, begin, count](const BasePoint& x) {
    return Eigen::MatrixXd(f.at(x).middleCols(begin, count));
  });
}

FinestPartition finest_search(const Cocycle& a, const BaseSystem& sys, const FrameField& frames, int ell,
                              double gap_tol, const SamplingPlan& plan) {
  const auto total = static_cast<int>(frames.cols());
  if (total < 1 || total > 8) throw PreconditionError("finest_search: frame dimension must be between 1 and 8");
  if (!(gap_tol > 0.0 && gap_tol < 1.0)) throw PreconditionError("finest_search: gap_tol must lie in (0,1)");
  FinestPartition out;
  auto split = [&](auto&& self, int begin, int size) -> void {
    for (int p = 1; p < size; ++p) {
      const Bundle upper{column_slice(frames, begin, p), false};
      const Bundle lower{column_slice(frames, begin + p, size - p), false};
      const SplittingCertificate c = tightest_constants(a, sys, upper, lower, ell, plan);
      if (c.alpha <= 1.0 - gap_tol && c.theta > 0.0 && c.invariance_drift < kInvarianceTolerance) {
        out.split_alphas.push_back(c.alpha);
        self(self, begin, p);
        self(self, begin + p, size - p);
        return;
      }
    }
    out.blocks.push_back(size);
  };
  split(split, 0, total);
  return out;
}

std::string to_string(PhVerdict v) {
  switch (v) {
    case PhVerdict::partially_hyperbolic:
      return "partially_hyperbolic";
    case PhVerdict::non_uniformly_anosov:
      return "non_uniformly_anosov";
    case PhVerdict::fail:
      break;
  }
  return "fail";
}

PHClassification classify_ph(const LyapunovSpectrum& spectrum, const PhEvidence& evidence, double zero_gap) {
  if (!evidence.unstable_central || !evidence.central_stable) {
    throw IncompleteEvidence("classify_ph: certificates for (E^u,E^c) and (E^c,E^s) are both required");
  }
  if (!(zero_gap > 0.0)) throw PreconditionError("classify_ph: zero_gap must be positive");
  const DominationResult& uc = *evidence.unstable_central;
  const DominationResult& cs = *evidence.central_stable;
  PHClassification out;
  out.d = uc.certificate.dim1;
  out.c = cs.certificate.dim1;
  out.ell = uc.certificate.ell;
  out.alpha = uc.certificate.alpha;
  out.beta = cs.certificate.alpha;
  auto fail = [&](std::string why) {
    out.verdict = PhVerdict::fail;
    out.reason = std::move(why);
    return out;
  };
  if (uc.certificate.tail1 || cs.certificate.tail1) return fail("E^u and E^c must be finite-dimensional");
  if (uc.certificate.dim2 != out.c || uc.certificate.tail2) return fail("certificates disagree on dim E^c");
  const int dim_cu = out.d + out.c;
  const auto& v = spectrum.values;
  if (static_cast<int>(v.size()) < dim_cu) {
    throw PreconditionError("classify_ph: spectrum head must cover E^cu");
  }
  if (out.d == 0 || v.empty() || !(v.front() > zero_gap)) {
    return fail("no positive exponent: trivial unstable bundle");
  }
  for (int i = 0; i < out.d; ++i) {
    if (!(v[i] > zero_gap)) return fail("E^u carries an exponent not above zero_gap");
  }
  for (std::size_t i = static_cast<std::size_t>(dim_cu); i < v.size(); ++i) {
    if (!(v[i] < -zero_gap)) return fail("E^s carries an exponent not below -zero_gap");
  }
  if (!spectrum.tail.is_zero() && !(spectrum.tail.log_abs(spectrum.truncation + 1) < -zero_gap)) {
    return fail("tail exponents are not below -zero_gap");
  }
  if (!uc.pass) return fail("E^u does not dominate E^c: " + (uc.violations.empty() ? "" : uc.violations.front()));
  if (!cs.pass) return fail("E^c does not dominate E^s: " + (cs.violations.empty() ? "" : cs.violations.front()));
  bool zero_inside = false;
  for (int i = out.d; i < dim_cu; ++i) zero_inside = zero_inside || std::abs(v[i]) <= zero_gap;
  out.verdict = zero_inside ? PhVerdict::partially_hyperbolic : PhVerdict::non_uniformly_anosov;
  return out;
}

PersistenceTable persistence_probe(const Cocycle& a, const BaseSystem& sys, const Bundle& e1, const Bundle& e2, int ell,
                                   double alpha, double theta, const std::vector<double>& magnitudes,
                                   std::uint64_t seed, int trials, const SamplingPlan& plan) {
  if (trials < 1) throw PreconditionError("persistence_probe: at least one trial");
  PersistenceTable table;
  for (std::size_t di = 0; di < magnitudes.size(); ++di) {
    const double delta = magnitudes[di];
    if (!(delta >= 0.0)) throw PreconditionError("persistence_probe: magnitudes must be non-negative");
    PersistenceRow row;
    row.delta = delta;
    row.trials = trials;
    row.pass = true;
    row.theta_worst = kInf;
    for (int t = 0; t < trials; ++t) {
      std::mt19937_64 rng(seed + 0x100000001B3ULL * (di + 1) + static_cast<std::uint64_t>(t));
      std::normal_distribution<double> normal;
      std::vector<FrameField> frames;
      std::vector<Eigen::MatrixXd> blocks;
      for (const Bundle* b : {&e1, &e2}) {
        const Eigen::Index k = b->head.cols();
        if (k == 0) continue;
        Eigen::MatrixXd g(k, k);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
        g *= delta / spectral_norm(g);
        frames.push_back(b->head);
        blocks.push_back(std::move(g));
      }
      const Cocycle perturbed = Cocycle::frame_block_perturbation(a, frames, blocks, sys);
      const DominationResult r = check_domination(perturbed, sys, e1, e2, ell, alpha, theta, plan);
      row.pass = row.pass && r.pass;
      row.alpha_worst = std::max(row.alpha_worst, r.certificate.alpha);
      row.theta_worst = std::min(row.theta_worst, r.certificate.theta);
    }
    if (!row.pass && (!table.first_failure || delta < *table.first_failure)) table.first_failure = delta;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace cocyclab
