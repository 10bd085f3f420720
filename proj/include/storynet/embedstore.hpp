#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "storynet/error.hpp"

namespace storynet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Cosine similarity clamped to [-1, 1].
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar cosine(const Eigen::MatrixBase<DerivedU>& u,
                                 const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  if (u.size() != v.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  const Scalar c = u.dot(v) / (nu * nv);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

class EmbeddingTable {
public:
  explicit EmbeddingTable(int dim = 768) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const std::string& model() const { return model_; }
  void set_model(std::string model) { model_ = std::move(model); }

  // Rejects wrong-length and all-zero vectors. Re-inserting a key overwrites it.
  void insert(const std::string& phrase, Vector v);

  bool contains(const std::string& phrase) const { return vectors_.count(phrase) != 0; }
  // Throws MissingEmbedding; the table never encodes on the fly.
  const Vector& at(const std::string& phrase) const;

  const std::map<std::string, Vector>& vectors() const { return vectors_; }

  // Tab-separated records: phrase <TAB> dim <TAB> comma-separated floats.
  // Lines starting with '#' are headers; "# model: <id>" records the encoder.
  static EmbeddingTable read(std::istream& in);
  static EmbeddingTable read(const std::string& path);
  void write(std::ostream& out) const;

private:
  int dim_;
  std::string model_;
  std::map<std::string, Vector> vectors_;
};

// Rows are points.
using PointSet = Matrix;

struct ProjectedSet {
  int components = 0;
  Matrix vectors;  // one row per source point
  std::vector<std::string> phrases;
};

struct PcaBasis {
  Vector mean;
  Matrix components;  // columns, descending eigenvalue
  Vector eigenvalues;
};

// Covariance normalised by (n - 1), or by 1 for a single sample. Ties in the
// eigenvalues are ordered by the axis of each component's largest loading, and
// that loading is made positive.
PcaBasis fit_pca(const std::vector<PointSet>& sets, int k);

std::vector<ProjectedSet> pca_project(const std::vector<PointSet>& sets, int k,
                                      const std::vector<std::vector<std::string>>& phrases = {});

}  // namespace storynet
