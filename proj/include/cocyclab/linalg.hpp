#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cocyclab {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Thin QR of a tall matrix with a non-negative R diagonal.
template <typename Scalar>
struct ThinQr {
  Matrix<Scalar> q;
  Matrix<Scalar> r;
};

template <typename Derived>
ThinQr<typename Derived::Scalar> thin_qr(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = a.rows();
  const Eigen::Index k = a.cols();
  Eigen::HouseholderQR<Matrix<Scalar>> qr(a.derived());
  ThinQr<Scalar> out;
  out.q = qr.householderQ() * Matrix<Scalar>::Identity(m, k);
  out.r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (out.r(i, i) < Scalar(0)) {
      out.r.row(i) *= Scalar(-1);
      out.q.col(i) *= Scalar(-1);
    }
  }
  return out;
}

template <typename Derived>
Matrix<typename Derived::Scalar> orthonormalize(const Eigen::MatrixBase<Derived>& a) {
  return thin_qr(a).q;
}

template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return Scalar(0);
  Eigen::JacobiSVD<Matrix<Scalar>> svd(a.derived());
  return svd.singularValues()(0);
}

template <typename Derived>
typename Derived::Scalar min_singular_value(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.cols() == 0) return Scalar(0);
  if (a.rows() < a.cols()) return Scalar(0);
  Eigen::JacobiSVD<Matrix<Scalar>> svd(a.derived());
  return svd.singularValues()(svd.singularValues().size() - 1);
}

/// Largest deviation of Q^T Q from the identity.
template <typename Derived>
typename Derived::Scalar orthonormality_defect(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  if (q.cols() == 0) return Scalar(0);
  return (q.transpose() * q - Matrix<Scalar>::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

/// Principal angles between span(q1) and span(q2), ascending.
/// Both inputs must have orthonormal columns. Small angles come from the
/// sine formula, large ones from the cosine formula.
template <typename D1, typename D2>
Vector<typename D1::Scalar> principal_angles(const Eigen::MatrixBase<D1>& q1,
                                             const Eigen::MatrixBase<D2>& q2) {
  using Scalar = typename D1::Scalar;
  const bool swap = q2.cols() > q1.cols();
  const Matrix<Scalar> a = swap ? Matrix<Scalar>(q2) : Matrix<Scalar>(q1);
  const Matrix<Scalar> b = swap ? Matrix<Scalar>(q1) : Matrix<Scalar>(q2);
  const Eigen::Index k = b.cols();
  Vector<Scalar> angles(k);
  if (k == 0) return angles;
  const Matrix<Scalar> cross = a.transpose() * b;
  Eigen::JacobiSVD<Matrix<Scalar>> cos_svd(cross);
  Vector<Scalar> cosines = cos_svd.singularValues();  // descending
  Eigen::JacobiSVD<Matrix<Scalar>> sin_svd(b - a * cross);
  Vector<Scalar> sines = sin_svd.singularValues();  // descending -> reverse for ascending angles
  for (Eigen::Index i = 0; i < k; ++i) {
    const Scalar c = std::clamp(i < cosines.size() ? cosines(i) : Scalar(0), Scalar(0), Scalar(1));
    const Scalar s = std::clamp(sines(k - 1 - i), Scalar(0), Scalar(1));
    angles(i) = c * c >= Scalar(0.5) ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.data(), angles.data() + k);
  return angles;
}

/// log of the k-volume spanned by the columns: (1/2) log det(W^T W).
template <typename Derived>
typename Derived::Scalar log_volume(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  Eigen::HouseholderQR<Matrix<Scalar>> qr(w.derived());
  Scalar s(0);
  for (Eigen::Index i = 0; i < w.cols(); ++i) s += std::log(std::abs(qr.matrixQR()(i, i)));
  return s;
}

/// Rotation by `angle` in the (i, j) coordinate plane of R^dim, identity elsewhere.
/// Sends e_i towards e_j.
template <typename Scalar = double>
Matrix<Scalar> plane_rotation(Eigen::Index dim, Eigen::Index i, Eigen::Index j, Scalar angle) {
  Matrix<Scalar> r = Matrix<Scalar>::Identity(dim, dim);
  const Scalar c = std::cos(angle);
  const Scalar s = std::sin(angle);
  r(i, i) = c;
  r(j, j) = c;
  r(j, i) = s;
  r(i, j) = -s;
  return r;
}

/// Orthonormal basis of the orthogonal complement of span(q) in R^rows.
template <typename Derived>
Matrix<typename Derived::Scalar> orthogonal_complement(const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = q.rows();
  const Eigen::Index k = q.cols();
  if (k == 0) return Matrix<Scalar>::Identity(m, m);
  Eigen::HouseholderQR<Matrix<Scalar>> qr(q.derived());
  Matrix<Scalar> full = qr.householderQ() * Matrix<Scalar>::Identity(m, m);
  return full.rightCols(m - k);
}

/// Columns of the identity selected by index, as an orthonormal frame.
template <typename Scalar = double>
Matrix<Scalar> axis_frame(Eigen::Index rows, std::initializer_list<Eigen::Index> axes) {
  Matrix<Scalar> q = Matrix<Scalar>::Zero(rows, static_cast<Eigen::Index>(axes.size()));
  Eigen::Index c = 0;
  for (Eigen::Index a : axes) q(a, c++) = Scalar(1);
  return q;
}

}  // namespace cocyclab
