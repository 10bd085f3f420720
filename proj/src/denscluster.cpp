#include "storynet/denscluster.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "storynet/similarity.hpp"

namespace storynet {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;

  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  // The smaller index stays the root so components are keyed by first member.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

Matrix PhraseCluster::member_matrix() const {
  if (members.empty()) return Matrix(0, 0);
  Matrix m(members.size(), members.front().vector.size());
  for (std::size_t i = 0; i < members.size(); ++i) m.row(i) = members[i].vector.transpose();
  return m;
}

std::vector<PhraseCluster> cluster(const std::vector<EmbeddedPhrase>& points,
                                   const ClusterParams& params, const WordSet& stopwords) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "no points to cluster");
  if (params.min_cluster_size < 2) throw Error(ErrorCode::ConfigConflict, "min_cluster_size must be >= 2");
  if (!(params.distance_threshold > 0)) throw Error(ErrorCode::ConfigConflict, "distance threshold must be > 0");

  const std::size_t n = points.size();
  const auto dim = points.front().vector.size();
  for (const auto& p : points) {
    if (p.vector.size() != dim) throw Error(ErrorCode::LengthMismatch, "points differ in dimension");
  }

  Matrix dist = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = (points[i].vector - points[j].vector).norm();
    }
  }

  const auto k = static_cast<std::size_t>(params.min_cluster_size);
  std::vector<double> core(n, std::numeric_limits<double>::infinity());
  if (n >= k) {
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) row[j] = dist(i, j);
      std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
      core[i] = row[k - 1];
    }
  }

  const double eps = params.distance_threshold;
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i] > eps) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (core[j] > eps) continue;
      if (std::max({core[i], core[j], dist(i, j)}) <= eps) sets.unite(i, j);
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i] <= eps) components[sets.find(i)].push_back(i);
  }

  std::vector<PhraseCluster> out;
  std::vector<bool> assigned(n, false);
  for (const auto& [root, idx] : components) {
    if (idx.size() < k) continue;
    PhraseCluster c;
    c.id = static_cast<int>(out.size());
    for (auto i : idx) {
      c.members.push_back(points[i]);
      assigned[i] = true;
    }
    c.label = label_cluster(c, stopwords);
    out.push_back(std::move(c));
  }
  PhraseCluster noise;
  for (std::size_t i = 0; i < n; ++i) {
    if (!assigned[i]) noise.members.push_back(points[i]);
  }
  if (!noise.members.empty()) out.push_back(std::move(noise));
  return out;
}

std::string label_cluster(const PhraseCluster& c, const WordSet& stopwords) {
  if (c.is_noise()) throw Error(ErrorCode::NoiseClusterUnlabeled, "the noise cluster has no label");
  std::map<std::string, int> freq;
  for (const auto& m : c.members) {
    for (auto& tok : tokenize(m.phrase)) {
      if (!stopwords.count(tok)) ++freq[tok];
    }
  }
  if (freq.empty()) {
    // Only stopwords: fall back to the first member so the label is never empty.
    return c.members.empty() ? std::string("cluster") : to_lower(trim(c.members.front().phrase));
  }
  std::vector<std::pair<std::string, int>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() == 1) return ranked[0].first;
  return ranked[0].first + "," + ranked[1].first;
}

std::vector<PhraseCluster> merge_similar(const std::vector<PhraseCluster>& clusters,
                                         double merge_threshold, const WordSet& stopwords) {
  std::vector<std::size_t> real;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (!clusters[i].is_noise() && !clusters[i].members.empty()) real.push_back(i);
  }
  std::vector<Matrix> mats;
  mats.reserve(real.size());
  for (auto i : real) mats.push_back(clusters[i].member_matrix());

  DisjointSets sets(real.size());
  for (std::size_t a = 0; a < real.size(); ++a) {
    for (std::size_t b = a + 1; b < real.size(); ++b) {
      if (cluster_pair_similarity(mats[a], mats[b]) >= merge_threshold) sets.unite(a, b);
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t a = 0; a < real.size(); ++a) groups[sets.find(a)].push_back(a);

  std::vector<PhraseCluster> out;
  for (const auto& [root, members] : groups) {
    PhraseCluster merged;
    merged.id = static_cast<int>(out.size());
    for (auto a : members) {
      const auto& src = clusters[real[a]].members;
      merged.members.insert(merged.members.end(), src.begin(), src.end());
    }
    merged.label = label_cluster(merged, stopwords);
    out.push_back(std::move(merged));
  }
  for (const auto& c : clusters) {
    if (c.is_noise()) out.push_back(c);
  }
  return out;
}

}  // namespace storynet
