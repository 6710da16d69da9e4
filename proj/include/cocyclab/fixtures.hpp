#pragma once

#include "cocyclab/cocycle.hpp"

#include <cstdint>

namespace cocyclab {

/// diag(2, 1, 1/3, ..., 1/m) with the harmonic tail 1/n beyond m.
Operator doubling_harmonic_operator(Eigen::Index m = 32);
Cocycle doubling_harmonic_cocycle(Eigen::Index m = 32);
/// E^u = span(e_1), E^c = span(e_2), E^s = the rest including the tail.
SplittingSpec doubling_harmonic_splitting(Eigen::Index m = 32);
/// log 2, 0, -log 3, ..., -log k
Eigen::VectorXd doubling_harmonic_exponents(Eigen::Index k);

/// Scales the E^u column by e^-epsilon and the E^c column by e^epsilon,
/// which keeps the center-unstable entropy and moves the central exponent to epsilon.
Cocycle rebalanced_central_scaling(const Cocycle& a, const SplittingSpec& split, double epsilon);
/// Exact ||C - A|| of the rebalanced doubling-harmonic operator: max(2(1 - e^-epsilon), e^epsilon - 1).
double rebalanced_distance(double epsilon);

struct RandomTableOptions {
  Eigen::Index truncation = 6;
  int cells = 16;          // grid nodes on the circle
  double spread = 0.5;     // diagonal j carries exp(-spread * j)
  double noise = 0.3;      // scale of the Gaussian entries added to the diagonal
  Tail<> tail = Tail<>::zero();
};

/// Seeded 1-dimensional table cocycle: a decreasing diagonal plus Gaussian
/// noise at every grid node.
Cocycle random_table_cocycle(std::uint64_t seed, const RandomTableOptions& options = {});

}  // namespace cocyclab
