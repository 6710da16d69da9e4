#pragma once

#include "cocyclab/errors.hpp"
#include "cocyclab/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace cocyclab {

/// Diagonal tail tau(n) = scale * n^(-power) * ratio^n acting on e_n for n > M.
///
/// The family is closed under pointwise products, which is what cocycle
/// products need. `scale == 0` is the zero tail. With power >= 0 and
/// 0 < ratio <= 1 the modulus is non-increasing in n, so the supremum over
/// n > M is attained at n = M + 1.
template <typename Scalar = double>
struct Tail {
  Scalar scale{0};
  Scalar power{0};
  Scalar ratio{1};

  static Tail zero() { return {Scalar(0), Scalar(0), Scalar(1)}; }
  static Tail identity() { return {Scalar(1), Scalar(0), Scalar(1)}; }
  /// tau(n) = 1/n
  static Tail harmonic() { return {Scalar(1), Scalar(1), Scalar(1)}; }
  /// tau(n) = q^n
  static Tail geometric(Scalar q) { return {Scalar(1), Scalar(0), q}; }

  bool is_zero() const { return scale == Scalar(0); }
  /// tau(n) -> 0
  bool is_compact() const { return is_zero() || power > Scalar(0) || ratio < Scalar(1); }

  /// log |tau(n)|; -infinity for the zero tail.
  Scalar log_abs(long long n) const {
    if (is_zero()) return -std::numeric_limits<Scalar>::infinity();
    const auto nn = static_cast<Scalar>(n);
    return std::log(std::abs(scale)) - power * std::log(nn) + nn * std::log(ratio);
  }

  Scalar operator()(long long n) const {
    if (is_zero()) return Scalar(0);
    const Scalar mag = std::exp(log_abs(n));
    return scale < Scalar(0) ? -mag : mag;
  }

  Scalar sup_beyond(long long m) const { return std::abs((*this)(m + 1)); }

  /// inf_{n > M} |tau(n)|: zero for any compact tail.
  Scalar inf_beyond(long long) const { return is_compact() ? Scalar(0) : std::abs(scale); }

  Tail pow(int n) const {
    if (n == 0) return identity();
    return {static_cast<Scalar>(std::pow(scale, n)), power * Scalar(n), static_cast<Scalar>(std::pow(ratio, n))};
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    if (is_zero()) return "zero";
    if (scale == Scalar(1) && power == Scalar(0) && ratio == Scalar(1)) return "identity";
    if (scale == Scalar(1) && power == Scalar(1) && ratio == Scalar(1)) return "harmonic";
    if (scale == Scalar(1) && power == Scalar(0)) {
      os << "geometric:" << ratio;
      return os.str();
    }
    os << "power:" << scale << ':' << power << ':' << ratio;
    return os.str();
  }

  friend Tail operator*(const Tail& a, const Tail& b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return {a.scale * b.scale, a.power + b.power, a.ratio * b.ratio};
  }
  friend bool operator==(const Tail&, const Tail&) = default;
};

/// Element of the Hilbert space with finitely many non-zero tail coordinates:
/// `head` holds e_1..e_M, `tail(i)` the coefficient of e_{M+1+i}.
template <typename Scalar = double>
struct HilbertVector {
  Vector<Scalar> head;
  Vector<Scalar> tail;

  Scalar norm() const { return std::sqrt(head.squaredNorm() + tail.squaredNorm()); }
  /// Unit vector e_n (1-based) in a space truncated at M.
  static HilbertVector basis(Eigen::Index m, Eigen::Index n) {
    HilbertVector v{Vector<Scalar>::Zero(m), Vector<Scalar>()};
    if (n <= m) {
      v.head(n - 1) = Scalar(1);
    } else {
      v.tail = Vector<Scalar>::Zero(n - m);
      v.tail(n - m - 1) = Scalar(1);
    }
    return v;
  }
};

/// Compact operator modelled as a dense M x M block on span(e_1..e_M) and a
/// diagonal tail on the remaining coordinates; the two parts do not couple.
template <typename Scalar = double>
class TruncatedOperator {
 public:
  TruncatedOperator() = default;
  TruncatedOperator(Matrix<Scalar> block, Tail<Scalar> tail) : block_(std::move(block)), tail_(tail) {
    if (block_.rows() != block_.cols()) throw ShapeError("operator block must be square");
  }

  static TruncatedOperator identity(Eigen::Index m) {
    return {Matrix<Scalar>::Identity(m, m), Tail<Scalar>::identity()};
  }

  Eigen::Index truncation() const { return block_.rows(); }
  const Matrix<Scalar>& block() const { return block_; }
  Matrix<Scalar>& block() { return block_; }
  const Tail<Scalar>& tail() const { return tail_; }

 private:
  Matrix<Scalar> block_;
  Tail<Scalar> tail_ = Tail<Scalar>::zero();
};

using Operator = TruncatedOperator<double>;
using HVector = HilbertVector<double>;

template <typename Scalar>
HilbertVector<Scalar> apply(const TruncatedOperator<Scalar>& op, const HilbertVector<Scalar>& v) {
  if (v.head.size() != op.truncation()) throw ShapeError("vector head length must equal the truncation M");
  HilbertVector<Scalar> out{op.block() * v.head, v.tail};
  const auto m = static_cast<long long>(op.truncation());
  for (Eigen::Index i = 0; i < out.tail.size(); ++i) out.tail(i) *= op.tail()(m + 1 + i);
  return out;
}

/// a o b (b acts first).
template <typename Scalar>
TruncatedOperator<Scalar> compose(const TruncatedOperator<Scalar>& a, const TruncatedOperator<Scalar>& b) {
  if (a.truncation() != b.truncation()) throw ShapeError("cannot compose operators with different truncations");
  return {a.block() * b.block(), a.tail() * b.tail()};
}

template <typename Scalar>
TruncatedOperator<Scalar> adjoint(const TruncatedOperator<Scalar>& a) {
  return {a.block().transpose(), a.tail()};
}

/// max(largest singular value of the block, sup_{n>M} |tau(n)|).
template <typename Scalar>
Scalar operator_norm(const TruncatedOperator<Scalar>& a) {
  const Matrix<Scalar>& b = a.block();
  Scalar head(0);
  if (b.size() > 0) {
    if (b.isDiagonal(Scalar(0))) {
      head = b.diagonal().cwiseAbs().maxCoeff();
    } else {
      head = spectral_norm(b);
    }
  }
  return std::max(head, a.tail().sup_beyond(a.truncation()));
}

/// Sup-norm distance ||a - b|| of two operators sharing a tail.
template <typename Scalar>
Scalar operator_distance(const TruncatedOperator<Scalar>& a, const TruncatedOperator<Scalar>& b) {
  if (a.truncation() != b.truncation()) throw ShapeError("operator truncations differ");
  const auto m = static_cast<long long>(a.truncation());
  Scalar tail_gap(0);
  if (!(a.tail() == b.tail())) {
    // Both tails are monotone; sample a window past the cut.
    for (long long n = m + 1; n <= m + 64; ++n) tail_gap = std::max(tail_gap, std::abs(a.tail()(n) - b.tail()(n)));
  }
  return std::max(spectral_norm(Matrix<Scalar>(a.block() - b.block())), tail_gap);
}

}  // namespace cocyclab
