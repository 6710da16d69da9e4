#include "cocyclab/base.hpp"

#include "cocyclab/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace cocyclab {
namespace {

constexpr int kFixedBits = 53;
constexpr std::uint64_t kMask = (std::uint64_t{1} << kFixedBits) - 1;
constexpr double kScale = 9007199254740992.0;  // 2^53

std::uint64_t to_fixed(double x) {
  double f = x - std::floor(x);
  return static_cast<std::uint64_t>(std::llround(f * kScale)) & kMask;
}

double from_fixed(std::uint64_t u) { return static_cast<double>(u & kMask) / kScale; }

// 2x2 integer matrices modulo 2^64 (and hence modulo 2^53).
struct Mat2 {
  std::uint64_t a, b, c, d;
};

Mat2 mul(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
          x.c * y.b + x.d * y.d};
}

Mat2 power(Mat2 m, std::uint64_t k) {
  Mat2 acc{1, 0, 0, 1};
  while (k != 0) {
    if (k & 1U) acc = mul(acc, m);
    m = mul(m, m);
    k >>= 1U;
  }
  return acc;
}

double wrap_diff(double d) {
  d = std::fabs(d - std::floor(d));
  return std::min(d, 1.0 - d);
}

}  // namespace

BaseSystem circle_rotation(double angle) {
  return {BaseKind::circle_rotation, {angle - std::floor(angle)}, "circle rotation"};
}

BaseSystem torus_translation(double angle1, double angle2) {
  return {BaseKind::torus_translation,
          {angle1 - std::floor(angle1), angle2 - std::floor(angle2)},
          "torus translation"};
}

BaseSystem cat_map() { return {BaseKind::cat_map, {}, "cat map [[2,1],[1,1]]"}; }

BasePoint make_point(std::initializer_list<double> coords) {
  if (coords.size() < 1 || coords.size() > 2) throw ShapeError("base points have 1 or 2 coordinates");
  BasePoint x(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) x(i++) = c;
  return wrap(x);
}

BasePoint wrap(BasePoint x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) -= std::floor(x(i));
    if (x(i) >= 1.0) x(i) = 0.0;
  }
  return x;
}

BasePoint step(const BaseSystem& sys, const BasePoint& x, std::int64_t k) {
  if (x.size() != sys.dim()) throw ShapeError("base point dimension does not match the system");
  if (k == 0) return x;
  BasePoint y(x.size());
  const auto kk = static_cast<std::uint64_t>(k);  // two's complement wraps correctly mod 2^64
  switch (sys.kind) {
    case BaseKind::circle_rotation:
    case BaseKind::torus_translation:
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        std::uint64_t u = to_fixed(x(i)) + kk * to_fixed(sys.angles[static_cast<std::size_t>(i)]);
        y(i) = from_fixed(u);
      }
      break;
    case BaseKind::cat_map: {
      const Mat2 forward{2, 1, 1, 1};
      const Mat2 backward{1, ~std::uint64_t{0}, ~std::uint64_t{0}, 2};
      const Mat2 m = k > 0 ? power(forward, kk) : power(backward, static_cast<std::uint64_t>(-(k + 1)) + 1);
      const std::uint64_t u = to_fixed(x(0));
      const std::uint64_t v = to_fixed(x(1));
      y(0) = from_fixed(m.a * u + m.b * v);
      y(1) = from_fixed(m.c * u + m.d * v);
      break;
    }
  }
  return y;
}

double distance(const BaseSystem& sys, const BasePoint& x, const BasePoint& y) {
  if (x.size() != sys.dim() || y.size() != sys.dim()) {
    throw ShapeError("base point dimension does not match the system");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = wrap_diff(std::fabs(x(i) - y(i)));  // symmetric to the last bit
    s += d * d;
  }
  return std::sqrt(s);
}

double diameter(const BaseSystem& sys) { return 0.5 * std::sqrt(static_cast<double>(sys.dim())); }

std::vector<BasePoint> sample_measure(const BaseSystem& sys, std::uint64_t seed, std::size_t count) {
  if (count == 0) throw PreconditionError("sample_measure: empty sample requested");
  std::mt19937_64 rng(seed);
  std::vector<BasePoint> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    BasePoint x(sys.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = from_fixed(rng() >> 11U);
    out.push_back(x);
  }
  return out;
}

ReturnStats return_time_stats(const BaseSystem& sys, const BasePoint& p, double r,
                              const BasePoint& x0, long long horizon) {
  if (!(r > 0.0)) throw PreconditionError("return_time_stats: radius must be positive");
  if (horizon < 1) throw PreconditionError("return_time_stats: horizon must be at least 1");
  ReturnStats stats;
  long long first = -1;
  long long last = -1;
  BasePoint x = x0;
  for (long long t = 0; t < horizon; ++t) {
    if (distance(sys, x, p) < r) {
      if (first < 0) first = t;
      last = t;
      ++stats.visit_count;
    }
    x = step(sys, x, 1);
  }
  stats.visit_fraction = static_cast<double>(stats.visit_count) / static_cast<double>(horizon);
  if (stats.visit_count >= 2) {
    stats.mean_return = static_cast<double>(last - first) / static_cast<double>(stats.visit_count - 1);
  } else {
    stats.mean_return = std::numeric_limits<double>::quiet_NaN();
    stats.diagnostic = stats.visit_count == 0 ? "no return: orbit never entered the ball"
                                              : "single visit: no return observed";
  }
  return stats;
}

std::optional<int> period_of(const BaseSystem& sys, const BasePoint& p, int max_period) {
  BasePoint x = p;
  for (int k = 1; k <= max_period; ++k) {
    x = step(sys, x, 1);
    if (distance(sys, x, p) < 1e-12) return k;
  }
  return std::nullopt;
}

}  // namespace cocyclab
