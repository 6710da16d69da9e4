#pragma once

#include "cocyclab/base.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace testing {

/// Seeded generator for property tests; every case can be replayed from its seed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>()(rng_); }

  Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal();
    return m;
  }

  Eigen::VectorXd unit(Eigen::Index n) {
    Eigen::VectorXd v = gaussian(n, 1);
    return v / v.norm();
  }

  cocyclab::BasePoint point(const cocyclab::BaseSystem& sys) {
    return sys.dim() == 1 ? cocyclab::make_point({uniform()}) : cocyclab::make_point({uniform(), uniform()});
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testing
