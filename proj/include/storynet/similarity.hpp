#pragma once

#include <Eigen/Dense>
#include <algorithm>

#include "storynet/error.hpp"

namespace storynet {

enum class ZeroVectorPolicy {
  Throw,
  // A zero vector has cosine 1 with another zero vector and 0 with anything
  // else. Used after PCA, where a point can land exactly on the mean.
  Neutral,
};

namespace detail {

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> unit_rows(
    const Eigen::MatrixBase<Derived>& m, ZeroVectorPolicy policy, Eigen::Array<bool, Eigen::Dynamic, 1>& zero) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = m;
  zero.resize(m.rows());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const Scalar n = out.row(r).norm();
    zero[r] = n == Scalar(0);
    if (zero[r]) {
      if (policy == ZeroVectorPolicy::Throw) throw Error(ErrorCode::ZeroVector, "cluster member is a zero vector");
    } else {
      out.row(r) /= n;
    }
  }
  return out;
}

}  // namespace detail

// Pairwise cosines between the rows of `a` and the rows of `b`, clamped to [-1, 1].
template <typename DA, typename DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> cosine_matrix(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
    ZeroVectorPolicy policy = ZeroVectorPolicy::Throw) {
  using Scalar = typename DA::Scalar;
  if (a.cols() != b.cols()) throw Error(ErrorCode::LengthMismatch, "clusters differ in dimension");
  Eigen::Array<bool, Eigen::Dynamic, 1> za, zb;
  auto ua = detail::unit_rows(a, policy, za);
  auto ub = detail::unit_rows(b, policy, zb);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> c =
      (ua * ub.transpose()).cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (za[i] || zb[j]) c(i, j) = (za[i] && zb[j]) ? Scalar(1) : Scalar(0);
    }
  }
  return c;
}

// Mean best-match cosine from l to m plus the same from m to l. Rows are
// embeddings. The result lies in [-2, 2] and is symmetric in its arguments.
template <typename DL, typename DM>
typename DL::Scalar cluster_pair_similarity(const Eigen::MatrixBase<DL>& el,
                                            const Eigen::MatrixBase<DM>& em,
                                            ZeroVectorPolicy policy = ZeroVectorPolicy::Throw) {
  if (el.rows() == 0 || em.rows() == 0) throw Error(ErrorCode::EmptyCluster, "similarity of an empty cluster");
  auto c = cosine_matrix(el, em, policy);
  const auto s1 = c.rowwise().maxCoeff().mean();
  const auto s2 = c.colwise().maxCoeff().mean();
  return s1 + s2;
}

}  // namespace storynet
