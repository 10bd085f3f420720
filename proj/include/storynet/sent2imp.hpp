#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "storynet/actants.hpp"
#include "storynet/denscluster.hpp"
#include "storynet/embedstore.hpp"
#include "storynet/ingest.hpp"
#include "storynet/similarity.hpp"

namespace storynet {

struct ImpressionMixture {
  CharacterId character;
  std::vector<PhraseCluster> clusters;  // retained, noise excluded
  PhraseCluster noise;                  // id -1
};

struct Heatmap {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  Matrix values;
};

// Copular complements grouped by the character named in the subject.
std::map<CharacterId, std::vector<std::string>> select_svcop(const ReviewCorpus& corpus, const MentionMap& map);

// Review-level term statistics. Stopwords are excluded from every count.
class TermStatistics {
public:
  TermStatistics(const ReviewCorpus& corpus, const WordSet& stopwords = default_stopwords());

  // (corpus frequency / corpus tokens) * ln(documents / (1 + document frequency))
  double tf_idf(const std::string& word) const;

  std::size_t documents() const { return documents_; }
  std::size_t tokens() const { return tokens_; }

private:
  std::map<std::string, std::size_t> term_freq_;
  std::map<std::string, std::size_t> doc_freq_;
  std::size_t documents_ = 0;
  std::size_t tokens_ = 0;
};

// TF-IDF of each non-stopword in the cluster times its in-cluster frequency.
std::map<std::string, double> word_scores(const PhraseCluster& c, const TermStatistics& stats,
                                          const WordSet& stopwords = default_stopwords());
std::map<std::string, double> word_scores(const PhraseCluster& c, const ReviewCorpus& corpus,
                                          const WordSet& stopwords = default_stopwords());

// Fisher-Pearson skewness m3 / m2^1.5 from biased central moments.
double skewness(std::span<const double> samples);

struct FilterThresholds {
  double skew = 1.0;
  // Unset: 75th percentile of all word scores in the clusters being filtered.
  std::optional<double> mean;
  // Unset: median of the per-cluster score variances of the clusters being filtered.
  std::optional<double> variance;
};

// Linear-interpolated percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

// Keeps a cluster iff its score skewness exceeds the threshold, or its score
// mean is above and its (biased) variance below theirs. Clusters too small or
// too uniform for a skewness are judged on mean and variance alone.
ImpressionMixture filter_clusters(const CharacterId& character, const std::vector<PhraseCluster>& clusters,
                                  const TermStatistics& stats, const FilterThresholds& thresholds = {},
                                  const WordSet& stopwords = default_stopwords());
ImpressionMixture filter_clusters(const CharacterId& character, const std::vector<PhraseCluster>& clusters,
                                  const ReviewCorpus& corpus, const FilterThresholds& thresholds = {},
                                  const WordSet& stopwords = default_stopwords());

// Per-cluster score variances, for a corpus-wide variance threshold.
std::vector<double> score_variances(const std::vector<PhraseCluster>& clusters, const TermStatistics& stats,
                                    const WordSet& stopwords = default_stopwords());

/// Cluster-by-cluster similarity of two mixtures. Member phrases are looked up
/// in the table, projected jointly onto `k` principal components, and each cell
/// holds the pair similarity of the projected clusters. A mixture compared with
/// itself is reordered by an average-linkage dendrogram over (2 - S).
Heatmap mixture_heatmap(const ImpressionMixture& a, const ImpressionMixture& b, const EmbeddingTable& table,
                        int k = 4);

// Leaf order of average-linkage agglomeration over distances (2 - S).
std::vector<std::size_t> dendrogram_order(const Matrix& similarity, const std::vector<std::string>& labels);

// Entropy of the smoothed histogram of the strictly-lower-triangle values.
double character_entropy(const Heatmap& h, int bins = 50, int kernel_width = 3);
double histogram_entropy(std::span<const double> values, int bins = 50, int kernel_width = 3);

void write_mixture(const ImpressionMixture& m, std::ostream& out);
// Reads records written by write_mixture. Vectors are filled from `table` when given.
std::map<CharacterId, ImpressionMixture> read_mixtures(std::istream& in, const EmbeddingTable* table = nullptr);
void write_heatmap(const Heatmap& h, std::ostream& out);
// Binary PPM, blue (-2) through white (0) to red (+2), `cell` pixels per entry.
void write_heatmap_ppm(const Heatmap& h, std::ostream& out, int cell = 16);

}  // namespace storynet
