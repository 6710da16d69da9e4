#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cocyclab {

/// A point of the base torus (dimension 1 or 2), every coordinate in [0,1).
using BasePoint = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

enum class BaseKind { circle_rotation, torus_translation, cat_map };

/// Invertible base map of a flat torus preserving Lebesgue measure.
///
/// Points are stepped in 53-bit fixed point, so rotations and the cat map
/// are exact on the dyadic grid 2^-53 Z and step(step(x,k),-k) == x holds
/// up to the initial snap of x onto that grid.
struct BaseSystem {
  BaseKind kind = BaseKind::circle_rotation;
  std::vector<double> angles;  // one per coordinate for rotations, empty for cat_map
  std::string description;

  int dim() const { return kind == BaseKind::circle_rotation ? 1 : 2; }
};

/// (sqrt(5) - 1) / 2
inline constexpr double golden_angle = 0.6180339887498949;
/// sqrt(2) - 1
inline constexpr double silver_angle = 0.41421356237309515;

BaseSystem circle_rotation(double angle = golden_angle);
BaseSystem torus_translation(double angle1 = golden_angle, double angle2 = silver_angle);
BaseSystem cat_map();

BasePoint make_point(std::initializer_list<double> coords);
/// Reduces every coordinate into [0,1).
BasePoint wrap(BasePoint x);

/// f^k(x); k may be negative.
BasePoint step(const BaseSystem& sys, const BasePoint& x, std::int64_t k = 1);

/// Flat torus metric: Euclidean norm of the coordinate-wise wrap-around differences.
double distance(const BaseSystem& sys, const BasePoint& x, const BasePoint& y);

/// Largest possible distance, sqrt(dim) / 2.
double diameter(const BaseSystem& sys);

/// Deterministic Lebesgue samples.
std::vector<BasePoint> sample_measure(const BaseSystem& sys, std::uint64_t seed, std::size_t count);

struct ReturnStats {
  double mean_return = 0.0;  // mean gap between successive visits; NaN with fewer than two visits
  long long visit_count = 0;
  double visit_fraction = 0.0;
  std::optional<std::string> diagnostic;
};

/// Visits of the orbit x0, f(x0), ..., f^{horizon-1}(x0) to the open ball B(p, r).
ReturnStats return_time_stats(const BaseSystem& sys, const BasePoint& p, double r,
                              const BasePoint& x0, long long horizon);

/// Smallest k in [1, max_period] with f^k(p) == p (within 1e-12), if any.
std::optional<int> period_of(const BaseSystem& sys, const BasePoint& p, int max_period);

}  // namespace cocyclab
