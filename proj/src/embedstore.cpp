#include "storynet/embedstore.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "storynet/text.hpp"

namespace storynet {

namespace {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

Eigen::Index argmax_abs(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  return best;
}

// Extends `basis` (orthonormal columns) by the first standard axis that is not
// already spanned.
Vector complete_basis(const Matrix& basis, Eigen::Index used, Eigen::Index dim) {
  for (Eigen::Index axis = 0; axis < dim; ++axis) {
    Vector e = Vector::Unit(dim, axis);
    for (Eigen::Index c = 0; c < used; ++c) e -= basis.col(c).dot(e) * basis.col(c);
    if (e.norm() > 0.5) return e.normalized();
  }
  return Vector::Zero(dim);
}

}  // namespace

void EmbeddingTable::insert(const std::string& phrase, Vector v) {
  if (v.size() != dim_) {
    throw Error(ErrorCode::LengthMismatch, "embedding for '" + phrase + "' has length " +
                                               std::to_string(v.size()) + ", table dim " +
                                               std::to_string(dim_));
  }
  if (v.isZero(0.0)) throw Error(ErrorCode::ZeroVector, "embedding for '" + phrase + "'");
  vectors_[phrase] = std::move(v);
}

const Vector& EmbeddingTable::at(const std::string& phrase) const {
  auto it = vectors_.find(phrase);
  if (it == vectors_.end()) throw Error(ErrorCode::MissingEmbedding, "'" + phrase + "'");
  return it->second;
}

EmbeddingTable EmbeddingTable::read(std::istream& in) {
  EmbeddingTable table;
  std::string model;
  bool have_dim = false;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::MalformedRecord, "embedding line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      auto body = trim(line.substr(1));
      if (body.rfind("model:", 0) == 0) model = trim(body.substr(6));
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() != 3) fail("expected 3 tab-separated fields");
    int dim = 0;
    auto dim_text = trim(fields[1]);
    auto [p, ec] = std::from_chars(dim_text.data(), dim_text.data() + dim_text.size(), dim);
    if (ec != std::errc() || p != dim_text.data() + dim_text.size() || dim <= 0) fail("bad dim");
    if (!have_dim) {
      table = EmbeddingTable(dim);
      have_dim = true;
    } else if (dim != table.dim()) {
      fail("mixed dimensions " + std::to_string(dim) + " and " + std::to_string(table.dim()));
    }
    auto values = split(fields[2], ',');
    if (static_cast<int>(values.size()) != dim) fail("expected " + std::to_string(dim) + " values");
    Vector v(dim);
    for (int i = 0; i < dim; ++i) {
      auto text = trim(values[i]);
      auto [q, ec2] = std::from_chars(text.data(), text.data() + text.size(), v[i]);
      if (ec2 != std::errc() || q != text.data() + text.size()) fail("bad float '" + text + "'");
    }
    if (table.contains(fields[0])) fail("duplicate phrase '" + fields[0] + "'");
    try {
      table.insert(fields[0], std::move(v));
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  table.set_model(model);
  return table;
}

EmbeddingTable EmbeddingTable::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, path);
  return read(in);
}

void EmbeddingTable::write(std::ostream& out) const {
  if (!model_.empty()) out << "# model: " << model_ << '\n';
  for (const auto& [phrase, v] : vectors_) {
    out << phrase << '\t' << dim_ << '\t';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) out << ',';
      out << format_double(v[i]);
    }
    out << '\n';
  }
}

PcaBasis fit_pca(const std::vector<PointSet>& sets, int k) {
  if (k <= 0) throw Error(ErrorCode::InsufficientSamples, "k must be positive");
  Eigen::Index n = 0;
  Eigen::Index dim = -1;
  for (const auto& s : sets) {
    if (s.rows() == 0) continue;
    if (dim >= 0 && s.cols() != dim) throw Error(ErrorCode::LengthMismatch, "sets differ in dimension");
    dim = s.cols();
    n += s.rows();
  }
  if (n < k) {
    throw Error(ErrorCode::InsufficientSamples,
                std::to_string(n) + " vectors for " + std::to_string(k) + " components");
  }
  if (dim < k) {
    throw Error(ErrorCode::InsufficientSamples,
                "dimension " + std::to_string(dim) + " below " + std::to_string(k) + " components");
  }

  Matrix data(n, dim);
  Eigen::Index row = 0;
  for (const auto& s : sets) {
    data.middleRows(row, s.rows()) = s;
    row += s.rows();
  }
  PcaBasis basis;
  basis.mean = data.colwise().mean().transpose();
  Matrix centered = data.rowwise() - basis.mean.transpose();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;

  Matrix vecs(dim, k);
  Vector vals(k);
  if (n < dim) {
    // Gram route: eigenvectors of X^T X recovered from those of X X^T.
    Eigen::SelfAdjointEigenSolver<Matrix> es(centered * centered.transpose());
    const Vector& mu = es.eigenvalues();
    const double floor = 1e-12 * std::max(1.0, mu.cwiseAbs().maxCoeff());
    for (int c = 0; c < k; ++c) {
      Eigen::Index src = n - 1 - c;
      if (mu[src] > floor) {
        vecs.col(c) = (centered.transpose() * es.eigenvectors().col(src)) / std::sqrt(mu[src]);
        vecs.col(c).normalize();
        vals[c] = mu[src] / denom;
      } else {
        vecs.col(c) = complete_basis(vecs, c, dim);
        vals[c] = 0.0;
      }
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(centered.transpose() * centered / denom);
    for (int c = 0; c < k; ++c) {
      vecs.col(c) = es.eigenvectors().col(dim - 1 - c);
      vals[c] = std::max(0.0, es.eigenvalues()[dim - 1 - c]);
    }
  }

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Eigen::Index> lead(k);
  for (int c = 0; c < k; ++c) {
    lead[c] = argmax_abs(vecs.col(c));
    if (vecs(lead[c], c) < 0) vecs.col(c) = -vecs.col(c);
  }
  const double tie = 1e-12 * std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(vals[a] - vals[b]) > tie) return vals[a] > vals[b];
    return lead[a] < lead[b];
  });
  basis.components.resize(dim, k);
  basis.eigenvalues.resize(k);
  for (int c = 0; c < k; ++c) {
    basis.components.col(c) = vecs.col(order[c]);
    basis.eigenvalues[c] = vals[order[c]];
  }
  return basis;
}

std::vector<ProjectedSet> pca_project(const std::vector<PointSet>& sets, int k,
                                      const std::vector<std::vector<std::string>>& phrases) {
  auto basis = fit_pca(sets, k);
  std::vector<ProjectedSet> out;
  out.reserve(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    ProjectedSet p;
    p.components = k;
    if (sets[i].rows() > 0) {
      p.vectors = (sets[i].rowwise() - basis.mean.transpose()) * basis.components;
    } else {
      p.vectors.resize(0, k);
    }
    if (i < phrases.size()) p.phrases = phrases[i];
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace storynet
