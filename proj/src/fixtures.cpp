#include "cocyclab/fixtures.hpp"

#include <cmath>
#include <random>

namespace cocyclab {

Operator doubling_harmonic_operator(Eigen::Index m) {
  if (m < 2) throw PreconditionError("doubling_harmonic_operator: need m >= 2");
  Eigen::VectorXd diag(m);
  diag(0) = 2.0;
  diag(1) = 1.0;
  for (Eigen::Index n = 3; n <= m; ++n) diag(n - 1) = 1.0 / static_cast<double>(n);
  return {Eigen::MatrixXd(diag.asDiagonal()), Tail<>::harmonic()};
}

Cocycle doubling_harmonic_cocycle(Eigen::Index m) { return Cocycle::constant(doubling_harmonic_operator(m)); }

SplittingSpec doubling_harmonic_splitting(Eigen::Index m) { return SplittingSpec::from_axes(m, {0}, {1}); }

Eigen::VectorXd doubling_harmonic_exponents(Eigen::Index k) {
  Eigen::VectorXd e(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    e(i) = i == 0 ? std::log(2.0) : i == 1 ? 0.0 : -std::log(static_cast<double>(i + 1));
  }
  return e;
}

Cocycle rebalanced_central_scaling(const Cocycle& a, const SplittingSpec& split, double epsilon) {
  if (split.d != 1 || split.c != 1) throw PreconditionError("rebalanced_central_scaling: needs d = c = 1");
  Eigen::VectorXd s(2);
  s << -epsilon, epsilon;
  return Cocycle::central_scaling(a, s, split);
}

double rebalanced_distance(double epsilon) {
  return std::max(2.0 * (1.0 - std::exp(-epsilon)), std::expm1(epsilon));
}

Cocycle random_table_cocycle(std::uint64_t seed, const RandomTableOptions& options) {
  const Eigen::Index m = options.truncation;
  if (m < 1 || options.cells < 1) throw PreconditionError("random_table_cocycle: need m >= 1 and cells >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  TableGrid grid;
  grid.nodes = {options.cells};
  grid.tail = options.tail;
  for (int c = 0; c < options.cells; ++c) {
    Eigen::MatrixXd b(m, m);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = options.noise * normal(rng);
    for (Eigen::Index j = 0; j < m; ++j) b(j, j) += std::exp(-options.spread * static_cast<double>(j));
    grid.blocks.push_back(std::move(b));
  }
  return Cocycle::table(std::move(grid));
}

}  // namespace cocyclab
