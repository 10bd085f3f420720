#pragma once

#include <string>
#include <vector>

#include "storynet/embedstore.hpp"
#include "storynet/text.hpp"

namespace storynet {

struct EmbeddedPhrase {
  std::string phrase;
  Vector vector;
};

inline constexpr int kNoiseClusterId = -1;

struct PhraseCluster {
  int id = kNoiseClusterId;
  std::vector<EmbeddedPhrase> members;
  std::string label;

  bool is_noise() const { return id == kNoiseClusterId; }
  Matrix member_matrix() const;
};

struct ClusterParams {
  int min_cluster_size = 3;
  double distance_threshold = 2.0;
};

/// Density clustering over Euclidean distance.
///
/// The core distance of a point is the distance to its `min_cluster_size`-th
/// nearest point, counting the point itself. Points whose core distance exceeds
/// the threshold are noise. The rest are linked when their mutual reachability
/// distance max(core(a), core(b), d(a, b)) is within the threshold, and each
/// connected component becomes a cluster unless it is smaller than
/// `min_cluster_size`, in which case its points are noise.
///
/// Clusters are numbered by their first member in input order; the noise
/// cluster, when nonempty, comes last.
std::vector<PhraseCluster> cluster(const std::vector<EmbeddedPhrase>& points,
                                   const ClusterParams& params,
                                   const WordSet& stopwords = default_stopwords());

// Two most frequent non-stopword tokens joined by ',', ties lexicographic.
std::string label_cluster(const PhraseCluster& c, const WordSet& stopwords = default_stopwords());

// Unions every pair of non-noise clusters whose pair similarity reaches the
// threshold (transitively), then renumbers and relabels.
std::vector<PhraseCluster> merge_similar(const std::vector<PhraseCluster>& clusters,
                                         double merge_threshold,
                                         const WordSet& stopwords = default_stopwords());

}  // namespace storynet
