#pragma once

#include "cocyclab/base.hpp"
#include "cocyclab/isotopy.hpp"
#include "cocyclab/operator.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cocyclab {

/// Field of orthonormal frames x -> Q(x) (M x k) inside the head coordinates.
class FrameField {
 public:
  using Fn = std::function<Eigen::MatrixXd(const BasePoint&)>;

  FrameField() = default;
  static FrameField constant(Eigen::MatrixXd q);
  static FrameField from_function(Eigen::Index rows, Eigen::Index cols, Fn fn);

  Eigen::MatrixXd at(const BasePoint& x) const;
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  bool is_constant() const { return !fn_; }
  const Eigen::MatrixXd& constant_value() const { return value_; }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  Eigen::MatrixXd value_;
  Fn fn_;
};

/// A sub-bundle of the Hilbert space: a head frame field, optionally plus the whole tail.
struct Bundle {
  FrameField head;
  bool includes_tail = false;
};

/// E^u + E^c + E^s, with E^s the orthogonal complement of E^cu including the tail.
struct SplittingSpec {
  int d = 0;
  int c = 0;
  FrameField unstable;
  FrameField central;
  /// Orthonormal frame of E^cu. Splittings built by from_frames put E^u in
  /// the first d columns; finite_time_splitting keeps its reference frame.
  FrameField center_unstable;

  int D() const { return d + c; }

  static SplittingSpec from_frames(FrameField unstable, FrameField central);
  /// Constant frames spanned by coordinate axes (0-based head indices).
  static SplittingSpec from_axes(Eigen::Index m, const std::vector<int>& unstable_axes,
                                 const std::vector<int>& central_axes);

  Bundle unstable_bundle() const { return {unstable, false}; }
  Bundle central_bundle() const { return {central, false}; }
  Bundle center_unstable_bundle() const { return {center_unstable, false}; }
  Bundle stable_bundle() const;
};

/// Periodic grid of operator blocks over the base torus, bilinearly interpolated.
struct TableGrid {
  std::vector<int> nodes;              // nodes per base coordinate (size 1 or 2)
  std::vector<Eigen::MatrixXd> blocks; // row-major node order: index = i0 + nodes[0] * i1
  Tail<> tail = Tail<>::zero();

  Eigen::Index truncation() const { return blocks.empty() ? 0 : blocks.front().rows(); }
};

namespace detail {
struct CocycleNode;
}

/// Continuous map x -> A(x) of truncated compact operators; immutable value type.
class Cocycle {
 public:
  Cocycle() = default;

  static Cocycle constant(Operator op);
  static Cocycle table(TableGrid grid);
  /// B(x) = A(x) (id on E^s + Phi(bump(x)) on E^cu).
  static Cocycle rotation_bump(Cocycle inner, PerturbationParams params, SplittingSpec split, BaseSystem sys);
  /// C(x) = A(x) S with S = exp(log_factors[j]) on the j-th E^cu frame direction, id elsewhere.
  static Cocycle central_scaling(Cocycle inner, Eigen::VectorXd log_factors, SplittingSpec split);
  /// A(x) + sum_b Q_b(f x) G_b Q_b(x)^T: block perturbation that keeps each frame field invariant.
  static Cocycle frame_block_perturbation(Cocycle inner, std::vector<FrameField> frames,
                                          std::vector<Eigen::MatrixXd> blocks, BaseSystem sys);

  Operator operator()(const BasePoint& x) const;

  Eigen::Index truncation() const;
  const Tail<>& tail() const;
  std::string variant() const;
  bool is_constant() const;
  bool valid() const { return static_cast<bool>(node_); }

 private:
  explicit Cocycle(std::shared_ptr<const detail::CocycleNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::CocycleNode> node_;
};

/// A^n(x) = A(f^{n-1} x) ... A(x); identity (with identity tail) for n = 0.
Operator cocycle_product(const Cocycle& a, const BaseSystem& sys, const BasePoint& x, int n);

/// Monte Carlo estimate of the integral of log+ ||A(x)|| over Lebesgue measure.
double integrability_estimate(const Cocycle& a, const BaseSystem& sys, std::uint64_t seed, std::size_t count);

/// Largest ||A(x) restricted to span Q(x)|| over the given points.
double restricted_norm_sup(const Cocycle& a, const FrameField& frames, const std::vector<BasePoint>& points);

}  // namespace cocyclab
