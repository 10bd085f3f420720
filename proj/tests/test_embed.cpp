#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "storynet/embedstore.hpp"
#include "storynet/error.hpp"
#include "test_support.hpp"

using namespace storynet;
using testutil::code_of;

namespace {

// Fixed draw; eigenvalues of its (n - 1) covariance from numpy.linalg.eigvalsh.
const double kX[10][6] = {
    {-1.375, 1.037, 0.003, -1.915, -1.216, -0.116}, {-0.809, -1.071, -0.863, -1.315, -0.936, 2.202},
    {0.166, -0.361, -0.918, -1.481, -2.885, -0.311}, {-0.534, 2.190, 0.033, -0.981, -0.871, 1.924},
    {-0.617, -0.118, -0.319, 0.503, -0.313, 0.748},  {-1.078, 0.928, 0.314, 0.202, -1.312, -0.473},
    {-0.284, -1.190, 0.327, 0.646, -0.170, 0.885},   {-1.212, 1.174, 0.391, -1.242, -1.904, -1.404},
    {0.048, 2.056, 1.154, 0.331, 1.558, -0.264},     {-0.043, -0.260, 0.218, 0.019, 0.140, 0.496},
};
const double kEigen[6] = {2.29260034, 1.94752002, 0.98925922, 0.24734677, 0.22852577, 0.03946269};
const double kTop4Sum = 5.476726344178978;

Matrix fixture_matrix() {
  Matrix m(10, 6);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 6; ++j) m(i, j) = kX[i][j];
  }
  return m;
}

double column_variance_sum(const Matrix& p) {
  Matrix c = p.rowwise() - p.colwise().mean();
  return c.squaredNorm() / static_cast<double>(p.rows() - 1);
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("cosine examples") {
  CHECK(cosine(vec({1, 0}), vec({1, 0})) == 1.0);
  CHECK(cosine(vec({1, 0}), vec({-1, 0})) == -1.0);
  CHECK(cosine(vec({1, 1}), vec({1, 0})) == doctest::Approx(0.7071067811865475).epsilon(1e-15));
  CHECK(code_of([] { cosine(vec({0, 0}), vec({1, 0})); }) == ErrorCode::ZeroVector);
  CHECK(code_of([] { cosine(vec({1, 0, 0}), vec({1, 0})); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("cosine is symmetric, scale invariant and clamped") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int trial = 0; trial < 200; ++trial) {
    Vector u(8), v(8);
    for (int i = 0; i < 8; ++i) {
      u[i] = normal(rng);
      v[i] = normal(rng);
    }
    double c = cosine(u, v);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK(std::abs(c - cosine(v, u)) < 1e-12);
    Vector su = scale(rng) * u;
    Vector sv = scale(rng) * v;
    CHECK(std::abs(c - cosine(su, sv)) < 1e-12);
  }
  Vector big = Vector::Constant(5, 1e150);
  CHECK(cosine(big, big) <= 1.0);
}

TEST_CASE("embedding table rejects bad vectors and unknown phrases") {
  EmbeddingTable t(3);
  t.insert("wizard", vec({1, 2, 3}));
  CHECK(t.contains("wizard"));
  CHECK(code_of([&] { t.insert("short", vec({1, 2})); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([&] { t.insert("zero", vec({0, 0, 0})); }) == ErrorCode::ZeroVector);
  CHECK(code_of([&] { t.at("hobbit"); }) == ErrorCode::MissingEmbedding);
}

TEST_CASE("embedding files round-trip and record the model") {
  EmbeddingTable t(3);
  t.set_model("test-encoder-v2");
  t.insert("a good leader", vec({0.1, -2.5e-7, 3}));
  t.insert("humble", vec({1.0 / 3.0, 2, -1}));
  std::stringstream buf;
  t.write(buf);
  auto back = EmbeddingTable::read(buf);
  CHECK(back.dim() == 3);
  CHECK(back.model() == "test-encoder-v2");
  REQUIRE(back.size() == 2);
  CHECK(back.at("humble") == t.at("humble"));
  CHECK(back.at("a good leader") == t.at("a good leader"));
}

TEST_CASE("embedding files with mixed dims or bad numbers are malformed") {
  std::istringstream mixed("a\t2\t1,2\nb\t3\t1,2,3\n");
  CHECK(code_of([&] { EmbeddingTable::read(mixed); }) == ErrorCode::MalformedRecord);
  std::istringstream count("a\t3\t1,2\n");
  CHECK(code_of([&] { EmbeddingTable::read(count); }) == ErrorCode::MalformedRecord);
  std::istringstream nan("a\t2\t1,x\n");
  CHECK(code_of([&] { EmbeddingTable::read(nan); }) == ErrorCode::MalformedRecord);
  std::istringstream dup("a\t2\t1,2\na\t2\t1,3\n");
  CHECK(code_of([&] { EmbeddingTable::read(dup); }) == ErrorCode::MalformedRecord);
  CHECK(code_of([] { EmbeddingTable::read(std::string("/nonexistent.tsv")); }) == ErrorCode::MissingInput);
}

TEST_CASE("PCA on the fixed 10x6 matrix matches the eigen-solver oracle") {
  auto basis = fit_pca({fixture_matrix()}, 4);
  REQUIRE(basis.eigenvalues.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(basis.eigenvalues[i] == doctest::Approx(kEigen[i]).epsilon(1e-8));
  auto projected = pca_project({fixture_matrix()}, 4);
  REQUIRE(projected.size() == 1);
  CHECK(projected[0].components == 4);
  CHECK(projected[0].vectors.cols() == 4);
  CHECK(std::abs(column_variance_sum(projected[0].vectors) - kTop4Sum) < 1e-9);
  CHECK((basis.components.transpose() * basis.components - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("PCA splits sets back out and is deterministic") {
  Matrix all = fixture_matrix();
  Matrix a = all.topRows(3);
  Matrix b = all.bottomRows(7);
  auto joint = pca_project({a, b}, 4, {{"x", "y", "z"}, {"1", "2", "3", "4", "5", "6", "7"}});
  auto whole = pca_project({all}, 4);
  REQUIRE(joint.size() == 2);
  CHECK(joint[0].phrases == std::vector<std::string>{"x", "y", "z"});
  CHECK(joint[0].vectors == whole[0].vectors.topRows(3));
  CHECK(joint[1].vectors == whole[0].vectors.bottomRows(7));
  CHECK(pca_project({a, b}, 4)[1].vectors == joint[1].vectors);
}

TEST_CASE("points in a k-dim affine subspace reconstruct exactly") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  Matrix coords(12, 2), frame(2, 7);
  for (Eigen::Index i = 0; i < coords.size(); ++i) coords.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < frame.size(); ++i) frame.data()[i] = normal(rng);
  Vector offset(7);
  for (int i = 0; i < 7; ++i) offset[i] = normal(rng);
  Matrix pts = (coords * frame).rowwise() + offset.transpose();
  auto basis = fit_pca({pts}, 2);
  Matrix centred = pts.rowwise() - basis.mean.transpose();
  Matrix rebuilt = centred * basis.components * basis.components.transpose();
  CHECK((rebuilt - centred).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("PCA degenerate and error cases") {
  Matrix same(3, 4);
  same << 1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3, 4;
  auto p = pca_project({same}, 1);
  CHECK(p[0].vectors.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(code_of([&] { fit_pca({same}, 4); }) == ErrorCode::InsufficientSamples);
  CHECK(code_of([&] { fit_pca({Matrix(2, 1)}, 2); }) == ErrorCode::InsufficientSamples);
}

TEST_CASE("component signs make the largest loading positive") {
  auto basis = fit_pca({fixture_matrix()}, 4);
  for (int c = 0; c < 4; ++c) {
    Eigen::Index arg;
    basis.components.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(basis.components(arg, c) > 0);
  }
}
