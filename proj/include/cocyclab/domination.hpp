#pragma once

#include "cocyclab/cocycle.hpp"
#include "cocyclab/spectrum.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cocyclab {

/// Where domination is tested: Lebesgue samples plus one orbit segment.
struct SamplingPlan {
  std::uint64_t seed = 1;
  std::size_t measure_samples = 1000;
  long long orbit_length = 10000;
  int threads = 1;
};

/// Invariance tolerance: sine of the angle between a pushed frame vector and the target bundle.
inline constexpr double kInvarianceTolerance = 1e-3;

/// A base point and a pair of unit vectors u in E1, v in E2 realizing
/// ||A^l(x) v|| / ||A^l(x) u|| = ratio.
struct Witness {
  BasePoint point;
  HVector u;
  HVector v;
  double ratio = 0.0;
};

struct SplittingCertificate {
  int ell = 1;
  double alpha = 0.0;  // largest observed ratio
  double theta = 0.0;  // smallest observed ||A(x) u||, u in E1 unit
  double gamma = 0.0;  // smallest principal angle between E1 and E2
  double invariance_drift = 0.0;
  int dim1 = 0;  // head dimensions; a bundle carrying the tail is infinite-dimensional
  int dim2 = 0;
  bool tail1 = false;
  bool tail2 = false;
  long long samples = 0;
  double alpha_measure = 0.0;  // alpha over the Lebesgue samples only
  double alpha_orbit = 0.0;    // alpha over the orbit segment only
  Witness worst_witness;
};

struct DominationResult {
  bool pass = false;
  SplittingCertificate certificate;
  std::vector<std::string> violations;
};

/// Unit directions in R^dim as columns: all of them for dim 1, half-circle
/// angles for dim 2, a Fibonacci sphere for dim 3, seeded Gaussian directions
/// otherwise.
Eigen::MatrixXd direction_grid(int dim, int count, std::uint64_t seed);

/// Exact extremal constants over the sampled points (singular values of
/// A^l restricted to each bundle), no thresholds applied.
SplittingCertificate tightest_constants(const Cocycle& a, const BaseSystem& sys, const Bundle& e1, const Bundle& e2,
                                        int ell, const SamplingPlan& plan);

/// E1 dominates E2 with constants (ell, alpha, theta) on every sampled point,
/// and both bundles are invariant.
DominationResult check_domination(const Cocycle& a, const BaseSystem& sys, const Bundle& e1, const Bundle& e2, int ell,
                                  double alpha, double theta, const SamplingPlan& plan);

/// Columns [begin, begin + count) of a frame field.
FrameField column_slice(const FrameField& f, Eigen::Index begin, Eigen::Index count);

struct FinestPartition {
  std::vector<int> blocks;           // block dimensions in frame order
  std::vector<double> split_alphas;  // alpha* of each accepted split, in discovery order
};

/// Finest ordered partition of the frame columns into mutually dominated
/// blocks, found by splitting each block at the first dominated index.
FinestPartition finest_search(const Cocycle& a, const BaseSystem& sys, const FrameField& frames, int ell,
                              double gap_tol, const SamplingPlan& plan);

enum class PhVerdict { partially_hyperbolic, non_uniformly_anosov, fail };

std::string to_string(PhVerdict v);

struct PHClassification {
  int d = 0;
  int c = 0;
  int ell = 1;
  double alpha = 0.0;  // E^u over E^c
  double beta = 0.0;   // E^c over E^s
  PhVerdict verdict = PhVerdict::fail;
  std::string reason;
};

struct PhEvidence {
  std::optional<DominationResult> unstable_central;
  std::optional<DominationResult> central_stable;
};

/// Partial hyperbolicity from certificates plus a spectrum whose head covers
/// E^cu. Dimensions come from the certificates; the spectrum must put
/// positive exponents on E^u, negative ones past E^cu, and every exponent in
/// [-zero_gap, zero_gap] inside E^c.
PHClassification classify_ph(const LyapunovSpectrum& spectrum, const PhEvidence& evidence, double zero_gap);

struct PersistenceRow {
  double delta = 0.0;
  bool pass = false;
  double alpha_worst = 0.0;
  double theta_worst = 0.0;
  int trials = 0;
};

struct PersistenceTable {
  std::vector<PersistenceRow> rows;
  std::optional<double> first_failure;  // smallest delta whose row failed
};

/// Re-certifies (ell, alpha, theta) domination after random perturbations
/// G_b of spectral norm delta acting inside each bundle's head.
PersistenceTable persistence_probe(const Cocycle& a, const BaseSystem& sys, const Bundle& e1, const Bundle& e2, int ell,
                                   double alpha, double theta, const std::vector<double>& magnitudes,
                                   std::uint64_t seed, int trials, const SamplingPlan& plan);

}  // namespace cocyclab
