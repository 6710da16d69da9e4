#pragma once

#include "cocyclab/cocycle.hpp"

#include <string>
#include <vector>

namespace cocyclab {

/// A Lyapunov exponent that may be -infinity. The marker is explicit so
/// callers cannot mistake it for a very negative finite rate.
struct Exponent {
  double value = 0.0;
  bool minus_infinity = false;

  static Exponent finite(double v) { return {v, false}; }
  static Exponent negative_infinity() { return {0.0, true}; }
  bool is_finite() const { return !minus_infinity; }
  /// value, or -inf as a double for arithmetic convenience
  double as_double() const;
  friend bool operator<(const Exponent& a, const Exponent& b);
};

/// Exponents per step below this are reported as -infinity.
inline constexpr double kMinusInfinityLogThreshold = -30.0;
/// Minimum absolute gap between exponents declared distinct.
inline constexpr double kDefaultGapTolerance = 1e-3;

struct SpectrumEntry {
  double lambda = 0.0;
  int multiplicity = 1;
};

/// Sorted head exponents with multiplicities plus the exponents carried by the tail.
struct LyapunovSpectrum {
  std::vector<SpectrumEntry> entries;  // strictly decreasing lambda
  std::vector<double> values;          // raw head exponents, non-increasing, with multiplicity
  Tail<> tail = Tail<>::zero();        // exponent of e_n (n > M) is log|tau(n)|
  Eigen::Index truncation = 0;
  int head_count = 0;

  std::string tail_rule() const;
  /// The p largest exponents of the whole operator counted with multiplicity.
  /// Throws InsufficientHorizon if p reaches past the computed head exponents.
  std::vector<Exponent> leading(int p) const;
};

/// Groups sorted exponents whose neighbours differ by less than gap_tol.
LyapunovSpectrum make_spectrum(const Eigen::VectorXd& head_exponents, double gap_tol, const Cocycle& a);

struct QrResult {
  long long horizon = 0;
  Eigen::VectorXd exponents;     // running averages at the horizon
  Eigen::VectorXd half_horizon;  // running averages at horizon / 2
  Eigen::VectorXd cauchy_gap;    // |exponents - half_horizon|
  std::vector<long long> trace_steps;
  std::vector<Eigen::VectorXd> trace_values;
};

/// Leading k exponents by pushing a k-frame along the orbit of x0 and
/// re-orthonormalizing after every step. The frame starts at the first k
/// coordinate axes unless `initial` is given.
QrResult lyapunov_qr(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n, int k,
                     int trace_points = 64);
QrResult lyapunov_qr(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n,
                     const Eigen::MatrixXd& initial, int trace_points = 64);

/// Singular value decomposition of A^n(x0) restricted to span(start), kept in
/// log form: one forward QR sweep stores the triangular factors, then
/// alternating sweeps over their transposes drive the triangular product to a
/// diagonal without ever forming A^n(x0).
struct ProductSvd {
  Eigen::VectorXd log_singular_values;  // descending; -inf for exact zeros
  Eigen::MatrixXd right;                // M x k, right singular vectors at x0
  Eigen::MatrixXd left;                 // M x k, left singular vectors at f^n(x0)
};
ProductSvd product_svd(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n,
                       const Eigen::MatrixXd& start);

struct SingularExponents {
  std::vector<Exponent> head;  // (1/n) log sigma_j(A^n(x0)), j = 1..M, descending
  Tail<> tail;                 // tail exponents log|tau(m)| for m > M; -inf for the zero tail
  bool accumulated = false;    // true when the log-accumulated route was used
};

/// Exponents of ((A^n)* A^n)^{1/2n}. Uses the explicitly rescaled product when
/// it resolves every singular value and falls back to product_svd otherwise.
SingularExponents limit_operator_svd(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n);

/// (1/n) log ||A^n(x0) v|| with per-step renormalization.
Exponent vector_exponent(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, const HVector& v, long long n);

struct OseledetsFrames {
  BasePoint x;
  long long horizon = 0;
  std::vector<Eigen::MatrixXd> u_frames;  // U_i(x): right singular groups
  std::vector<Eigen::MatrixXd> v_flags;   // V_i(x): complement of U_1 + ... + U_{i-1} in the head
  Eigen::VectorXd exponents;              // finite-time singular exponents of the head
};

/// Finite-time Oseledets data at x0 grouped by `dims`. Throws
/// UnresolvedSplitting when a group boundary has an exponent gap below gap_tol.
OseledetsFrames oseledets_frames(const Cocycle& a, const BaseSystem& sys, const BasePoint& x0, long long n,
                                 const std::vector<int>& dims, double gap_tol = kDefaultGapTolerance);

/// (1/n) sum_j log vol(A(f^j x0) Q(f^j x0)). Constant frame fields are evaluated
/// at every point; other fields are evaluated every `refresh` steps and pushed
/// forward in between.
double det_rate(const Cocycle& a, const BaseSystem& sys, const FrameField& frames, const BasePoint& x0,
                long long n, long long refresh = 1000);

struct EntropyReport {
  double birkhoff = 0.0;
  double spectral = 0.0;
  double discrepancy = 0.0;
  long long horizon = 0;
};

/// Center-unstable entropy by the Birkhoff determinant average and by the sum of the
/// D leading QR exponents.
EntropyReport cu_entropy(const Cocycle& a, const BaseSystem& sys, const SplittingSpec& split, const BasePoint& x0,
                         long long n);

/// Fastest-growing `initial.cols()`-dimensional subspace at x: the initial frame
/// at f^{-warmup}(x) pushed forward warmup steps.
FrameField fast_subspace_field(const Cocycle& a, const BaseSystem& sys, const FrameField& initial, int warmup);

/// Inside the subspace field `within`, the span of the `keep` slowest right
/// singular directions of A^horizon(x).
FrameField slow_complement_field(const Cocycle& a, const BaseSystem& sys, const FrameField& within, int keep,
                                 int horizon);

/// Finite-time E^u and E^c of `a` inside the reference E^cu, which must be
/// invariant under `a` (true for the rotation-bump and central-scaling
/// perturbations of the reference cocycle).
SplittingSpec finite_time_splitting(const Cocycle& a, const BaseSystem& sys, const SplittingSpec& reference,
                                    int horizon = 48);

}  // namespace cocyclab
