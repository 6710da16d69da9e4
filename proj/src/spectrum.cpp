#include "cocyclab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cocyclab {
namespace {

constexpr double kCollapse = 1e-300;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Exponent to_exponent(double per_step) {
  if (!(per_step >= kMinusInfinityLogThreshold)) return Exponent::negative_infinity();
  return Exponent::finite(per_step);
}

// Sort log-singular values descending and permute the matching columns.
void sort_descending(Eigen::VectorXd& values, Eigen::MatrixXd& columns) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return values(i) > values(j); });
  Eigen::VectorXd v(values.size());
  Eigen::MatrixXd c(columns.rows(), columns.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = values(order[i]);
    c.col(static_cast<Eigen::Index>(i)) = columns.col(order[i]);
  }
  values = std::move(v);
  columns = std::move(c);
}

}  // namespace

double Exponent::as_double() const { return minus_infinity ? kNegInf : value; }

bool operator<(const Exponent& a, const Exponent& b) { return a.as_double() < b.as_double(); }

std::string LyapunovSpectrum::tail_rule() const {
  if (tail.is_zero()) return "-inf for every n > " + std::to_string(truncation);
  std::ostringstream os;
  os << "log|tau(n)| for n > " << truncation << ", tau = " << tail.describe();
  return os.str();
}

std::vector<Exponent> LyapunovSpectrum::leading(int p) const {
  if (p < 0) throw PreconditionError("leading: p must be non-negative");
  std::vector<Exponent> out;
  out.reserve(static_cast<std::size_t>(p));
  std::size_t h = 0;
  long long n = truncation + 1;
  const bool head_complete = head_count >= truncation;
  while (static_cast<int>(out.size()) < p) {
    const double tail_value = tail.log_abs(n);
    const bool head_left = h < values.size();
    if (head_left && values[h] >= tail_value) {
      out.push_back(to_exponent(values[h++]));
      continue;
    }
    // Uncomputed head exponents could exceed the tail value.
    if (!head_complete && !head_left) throw InsufficientHorizon("requested exponent lies below the resolved part of the head");
    out.push_back(tail.is_zero() ? Exponent::negative_infinity() : Exponent::finite(tail_value));
    ++n;
  }
  return out;
}

LyapunovSpectrum make_spectrum(const Eigen::VectorXd& head_exponents, double gap_tol, const Cocycle& a) {
  LyapunovSpectrum s;
  s.truncation = a.truncation();
  s.tail = a.tail();
  s.head_count = static_cast<int>(head_exponents.size());
  s.values.assign(head_exponents.data(), head_exponents.data() + head_exponents.size());
  std::sort(s.values.begin(), s.values.end(), std::greater<>());
  std::size_t i = 0;
  while (i < s.values.size()) {
    std::size_t j = i + 1;
    double sum = s.values[i];
    while (j < s.values.size() && s.values[j - 1] - s.values[j] < gap_tol) sum += s.values[j++];
    s.entries.push_back({sum / static_cast<double>(j - i), static_cast<int>(j - i)});
    i = j;
  }
  return s;
}

QrResult lyapunov_qr(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n, int k,
                     int trace_points) {
  if (k < 1 || k > a.truncation()) throw PreconditionError("lyapunov_qr: need 1 <= k <= M");
  return lyapunov_qr(a, sys, x0, n, Eigen::MatrixXd::Identity(a.truncation(), k), trace_points);
}

QrResult lyapunov_qr(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n,
                     const Eigen::MatrixXd& initial, int trace_points) {
  const Eigen::Index k = initial.cols();
  if (initial.rows() != a.truncation()) throw ShapeError("lyapunov_qr: initial frame must have M rows");
  if (k < 1 || k > a.truncation()) throw PreconditionError("lyapunov_qr: need 1 <= k <= M");
  if (n < 10) throw PreconditionError("lyapunov_qr: horizon must be at least 10");
  QrResult out;
  out.horizon = n;
  Eigen::MatrixXd q = orthonormalize(initial);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(k);
  const long long half = n / 2;
  const long long every = std::max<long long>(1, n / std::max(1, trace_points));
  BasePoint x = x0;
  for (long long j = 0; j < n; ++j) {
    const Operator op = a(x);
    ThinQr<double> f = thin_qr(op.block() * q);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double rii = f.r(i, i);
      if (!(rii >= kCollapse)) {
        throw UnderflowError("lyapunov_qr: frame collapsed at step " + std::to_string(j), j);
      }
      sums(i) += std::log(rii);
    }
    q = std::move(f.q);
    x = step(sys, x, 1);
    const long long done = j + 1;
    if (done == half) out.half_horizon = sums / static_cast<double>(half);
    if (done % every == 0 || done == n) {
      out.trace_steps.push_back(done);
      out.trace_values.push_back(sums / static_cast<double>(done));
    }
  }
  out.exponents = sums / static_cast<double>(n);
  out.cauchy_gap = (out.exponents - out.half_horizon).cwiseAbs();
  return out;
}

ProductSvd product_svd(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n,
                       const Eigen::MatrixXd& start) {
  const Eigen::Index k = start.cols();
  if (start.rows() != a.truncation()) throw ShapeError("product_svd: start frame must have M rows");
  if (n < 1) throw PreconditionError("product_svd: horizon must be positive");
  if (static_cast<double>(n) * static_cast<double>(k * k) > 4e7) {
    throw PreconditionError("product_svd: horizon too long for stored triangular factors");
  }
  // Forward sweep: A^n(x0) Q0 = Qn (R_n ... R_1).
  std::vector<Eigen::MatrixXd> factors;
  factors.reserve(static_cast<std::size_t>(n));
  const Eigen::MatrixXd q0 = orthonormalize(start);
  Eigen::MatrixXd q = q0;
  BasePoint x = x0;
  for (long long j = 0; j < n; ++j) {
    ThinQr<double> f = thin_qr(a(x).block() * q);
    q = std::move(f.q);
    factors.push_back(std::move(f.r));
    x = step(sys, x, 1);
  }
  // The restricted product is left * (factors, applied in order) * right^T.
  // Each sweep re-triangularizes the transpose; the product's triangular part
  // tends to a diagonal at rate sigma_{i+1}/sigma_i per sweep.
  Eigen::MatrixXd left = q;
  Eigen::MatrixXd right = q0;
  bool transposed = false;
  Eigen::VectorXd logs = Eigen::VectorXd::Zero(k);
  for (const auto& r : factors) logs += r.diagonal().array().log().matrix();
  auto same = [](double u, double v) {
    if (!std::isfinite(u) || !std::isfinite(v)) return !std::isfinite(u) && !std::isfinite(v);
    return std::abs(u - v) <= 1e-13 * (1.0 + std::abs(u));
  };
  const long long max_sweeps = std::clamp(2000000LL / n, 4LL, 2000LL);
  for (long long sweep = 0; sweep < max_sweeps; ++sweep) {
    // Transpose: apply R_1^T first when the current order is R_1, ..., R_n.
    std::reverse(factors.begin(), factors.end());
    for (auto& r : factors) r.transposeInPlace();
    std::swap(left, right);
    transposed = !transposed;
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(k, k);
    Eigen::VectorXd next = Eigen::VectorXd::Zero(k);
    for (auto& r : factors) {
      ThinQr<double> f = thin_qr(r * p);
      for (Eigen::Index i = 0; i < k; ++i) next(i) += f.r(i, i) > 0.0 ? std::log(f.r(i, i)) : kNegInf;
      p = std::move(f.q);
      r = std::move(f.r);
    }
    left = left * p;
    bool done = true;
    for (Eigen::Index i = 0; i < k; ++i) done = done && same(next(i), logs(i));
    logs = next;
    if (done && sweep > 0) break;
  }
  ProductSvd out;
  // In transposed state the stored decomposition is of the adjoint product.
  out.left = transposed ? right : left;
  out.right = transposed ? left : right;
  out.log_singular_values = logs;
  Eigen::VectorXd copy = logs;
  sort_descending(out.log_singular_values, out.right);
  sort_descending(copy, out.left);
  return out;
}

SingularExponents limit_operator_svd(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n) {
  if (n < 1) throw PreconditionError("limit_operator_svd: horizon must be positive");
  const Eigen::Index m = a.truncation();
  SingularExponents out;
  out.tail = a.tail();
  const auto nd = static_cast<double>(n);

  // Explicit product with per-step rescaling.
  Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(m, m);
  double log_scale = 0.0;
  bool finite = true;
  BasePoint x = x0;
  for (long long j = 0; j < n && finite; ++j) {
    prod = a(x).block() * prod;
    const double s = prod.norm();
    if (!(s > 0.0) || !std::isfinite(s)) {
      finite = false;
      break;
    }
    prod /= s;
    log_scale += std::log(s);
    x = step(sys, x, 1);
  }
  if (finite) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(prod);
    const Eigen::VectorXd sv = svd.singularValues();
    if (sv(m - 1) > 1e-8 * sv(0)) {
      for (Eigen::Index i = 0; i < m; ++i) out.head.push_back(to_exponent((std::log(sv(i)) + log_scale) / nd));
      return out;
    }
  }
  out.accumulated = true;
  const ProductSvd ps = product_svd(a, sys, x0, n, Eigen::MatrixXd::Identity(m, m));
  for (Eigen::Index i = 0; i < m; ++i) out.head.push_back(to_exponent(ps.log_singular_values(i) / nd));
  return out;
}

Exponent vector_exponent(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, const HVector& v, long long n) {
  if (std::abs(v.norm() - 1.0) > 1e-12) throw PreconditionError("vector_exponent: v must be a unit vector");
  if (n < 1) throw PreconditionError("vector_exponent: horizon must be positive");
  HVector w = v;
  double sum = 0.0;
  BasePoint x = x0;
  for (long long j = 0; j < n; ++j) {
    w = apply(a(x), w);
    const double nw = w.norm();
    if (!(nw > 0.0) || std::log(nw) < kMinusInfinityLogThreshold) return Exponent::negative_infinity();
    sum += std::log(nw);
    w.head /= nw;
    w.tail /= nw;
    x = step(sys, x, 1);
  }
  return Exponent::finite(sum / static_cast<double>(n));
}

OseledetsFrames oseledets_frames(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n,
                                 const std::vector<int>& dims, double gap_tol) {
  const Eigen::Index m = a.truncation();
  int total = 0;
  for (int d : dims) {
    if (d < 1) throw PreconditionError("oseledets_frames: group dimensions must be positive");
    total += d;
  }
  if (total > m) throw PreconditionError("oseledets_frames: sum of dims exceeds M");
  const ProductSvd ps = product_svd(a, sys, x0, n, Eigen::MatrixXd::Identity(m, m));
  OseledetsFrames out;
  out.x = x0;
  out.horizon = n;
  out.exponents = ps.log_singular_values / static_cast<double>(n);
  int offset = 0;
  for (std::size_t g = 0; g < dims.size(); ++g) {
    const int end = offset + dims[g];
    if (end < m) {
      const double gap = out.exponents(end - 1) - out.exponents(end);
      if (!(gap >= gap_tol)) {
        std::ostringstream os;
        os << "unresolved splitting: exponents " << out.exponents(end - 1) << " and " << out.exponents(end)
           << " at group boundary " << end << " differ by less than " << gap_tol;
        throw UnresolvedSplitting(os.str());
      }
    }
    out.u_frames.push_back(ps.right.middleCols(offset, dims[g]));
    out.v_flags.push_back(ps.right.rightCols(m - offset));
    offset = end;
  }
  return out;
}

double det_rate(const Cocycle& a, const BaseSystem& sys, const FrameField& frames, const BasePoint& x0, long long n,
                long long refresh) {
  if (n < 1) throw PreconditionError("det_rate: horizon must be positive");
  if (frames.rows() != a.truncation()) throw ShapeError("det_rate: frame rows must equal M");
  const bool constant = frames.is_constant();
  Eigen::MatrixXd q = frames.at(x0);
  double sum = 0.0;
  BasePoint x = x0;
  for (long long j = 0; j < n; ++j) {
    if (!constant && j % refresh == 0) q = frames.at(x);
    const Eigen::MatrixXd w = a(x).block() * q;
    ThinQr<double> f = thin_qr(w);
    for (Eigen::Index i = 0; i < f.r.cols(); ++i) {
      if (!(f.r(i, i) >= kCollapse)) throw RankLossError("det_rate: image frame lost rank at step " + std::to_string(j));
      sum += std::log(f.r(i, i));
    }
    if (!constant) q = std::move(f.q);
    x = step(sys, x, 1);
  }
  return sum / static_cast<double>(n);
}

EntropyReport cu_entropy(const Cocycle& a, const BaseSystem& sys, const SplittingSpec& split, const BasePoint& x0,
                         long long n) {
  if (split.D() < 1) throw PreconditionError("cu_entropy: E^cu must be non-trivial");
  EntropyReport r;
  r.horizon = n;
  r.birkhoff = det_rate(a, sys, split.center_unstable, x0, n);
  r.spectral = lyapunov_qr(a, sys, x0, n, split.D(), 2).exponents.sum();
  r.discrepancy = std::abs(r.birkhoff - r.spectral);
  return r;
}

FrameField fast_subspace_field(const Cocycle& a, const BaseSystem& sys, const FrameField& initial, int warmup) {
  if (warmup < 0) throw PreconditionError("fast_subspace_field: warmup must be non-negative");
  return FrameField::from_function(initial.rows(), initial.cols(), [a, sys, initial, warmup](const BasePoint& x) {
    BasePoint y = step(sys, x, -warmup);
    Eigen::MatrixXd q = initial.at(y);
    for (int j = 0; j < warmup; ++j) {
      q = orthonormalize(a(y).block() * q);
      y = step(sys, y, 1);
    }
    return q;
  });
}

FrameField slow_complement_field(const Cocycle& a, const BaseSystem& sys, const FrameField& within, int keep,
                                 int horizon) {
  if (keep < 0 || keep > within.cols()) throw PreconditionError("slow_complement_field: keep out of range");
  return FrameField::from_function(within.rows(), keep, [a, sys, within, keep, horizon](const BasePoint& x) {
    const ProductSvd ps = product_svd(a, sys, x, horizon, within.at(x));
    return Eigen::MatrixXd(ps.right.rightCols(keep));
  });
}

SplittingSpec finite_time_splitting(const Cocycle& a, const BaseSystem& sys, const SplittingSpec& reference,
                                    int horizon) {
  const FrameField cu = reference.center_unstable;
  const int d = reference.d;
  const FrameField unstable_start =
      cu.is_constant() ? FrameField::constant(cu.constant_value().leftCols(d))
                       : FrameField::from_function(cu.rows(), d, [cu, d](const BasePoint& x) {
                           return Eigen::MatrixXd(cu.at(x).leftCols(d));
                         });
  SplittingSpec s;
  s.d = d;
  s.c = reference.c;
  s.unstable = fast_subspace_field(a, sys, unstable_start, horizon);
  s.central = slow_complement_field(a, sys, cu, reference.c, horizon);
  s.center_unstable = cu;
  return s;
}

}  // namespace cocyclab
