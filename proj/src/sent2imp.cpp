#include "storynet/sent2imp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <istream>
#include <ostream>

#include "storynet/error.hpp"

namespace storynet {

using nlohmann::json;

namespace {

struct Moments {
  double mean = 0;
  double m2 = 0;
};

Moments moments(std::span<const double> x) {
  Moments m;
  if (x.empty()) return m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  for (double v : x) m.m2 += (v - m.mean) * (v - m.mean);
  m.m2 /= static_cast<double>(x.size());
  return m;
}

std::vector<double> score_values(const PhraseCluster& c, const TermStatistics& stats, const WordSet& stopwords) {
  std::vector<double> out;
  for (const auto& [w, s] : word_scores(c, stats, stopwords)) out.push_back(s);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

Matrix embed_cluster(const PhraseCluster& c, const EmbeddingTable& table) {
  Matrix m(static_cast<Eigen::Index>(c.members.size()), table.dim());
  for (std::size_t i = 0; i < c.members.size(); ++i) m.row(i) = table.at(c.members[i].phrase).transpose();
  return m;
}

// Rows numerically on the PCA mean become exact zeros so the neutral policy applies.
void flush_tiny_rows(Matrix& m, double scale) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (m.row(r).norm() <= 1e-10 * scale) m.row(r).setZero();
  }
}

}  // namespace

std::map<CharacterId, std::vector<std::string>> select_svcop(const ReviewCorpus& corpus, const MentionMap& map) {
  std::map<CharacterId, std::vector<std::string>> out;
  for (const auto& [id, tuples] : corpus.reviews) {
    for (const auto& t : tuples) {
      if (t.kind != TupleKind::SVCOP) continue;
      auto c = map.resolve(t.subject_head);
      if (!c) continue;
      auto phrase = trim(t.object_text);
      if (!phrase.empty()) out[*c].push_back(phrase);
    }
  }
  return out;
}

TermStatistics::TermStatistics(const ReviewCorpus& corpus, const WordSet& stopwords) {
  for (const auto& [id, text] : corpus.raw_texts) {
    ++documents_;
    std::set<std::string> seen;
    for (auto& tok : tokenize(text)) {
      if (stopwords.count(tok)) continue;
      ++tokens_;
      ++term_freq_[tok];
      if (seen.insert(tok).second) ++doc_freq_[tok];
    }
  }
}

double TermStatistics::tf_idf(const std::string& word) const {
  auto tf_it = term_freq_.find(word);
  if (tf_it == term_freq_.end() || tokens_ == 0) return 0.0;
  auto df_it = doc_freq_.find(word);
  double df = df_it == doc_freq_.end() ? 0.0 : static_cast<double>(df_it->second);
  double tf = static_cast<double>(tf_it->second) / static_cast<double>(tokens_);
  return tf * std::log(static_cast<double>(documents_) / (1.0 + df));
}

std::map<std::string, double> word_scores(const PhraseCluster& c, const TermStatistics& stats,
                                          const WordSet& stopwords) {
  if (c.members.empty()) throw Error(ErrorCode::EmptyCluster, "word scores of an empty cluster");
  std::map<std::string, int> freq;
  for (const auto& m : c.members) {
    for (auto& tok : tokenize(m.phrase)) {
      if (!stopwords.count(tok)) ++freq[tok];
    }
  }
  std::map<std::string, double> out;
  for (const auto& [w, f] : freq) out[w] = stats.tf_idf(w) * f;
  return out;
}

std::map<std::string, double> word_scores(const PhraseCluster& c, const ReviewCorpus& corpus,
                                          const WordSet& stopwords) {
  return word_scores(c, TermStatistics(corpus, stopwords), stopwords);
}

double skewness(std::span<const double> samples) {
  if (samples.size() < 3) throw Error(ErrorCode::InsufficientSamples, "skewness needs at least 3 samples");
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) throw Error(ErrorCode::DegenerateVariance, "all samples equal");
  auto m = moments(samples);
  double m3 = 0;
  for (double v : samples) m3 += std::pow(v - m.mean, 3);
  m3 /= static_cast<double>(samples.size());
  return m3 / std::pow(m.m2, 1.5);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "percentile of no values");
  std::sort(values.begin(), values.end());
  double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> score_variances(const std::vector<PhraseCluster>& clusters, const TermStatistics& stats,
                                    const WordSet& stopwords) {
  std::vector<double> out;
  for (const auto& c : clusters) {
    if (c.is_noise() || c.members.empty()) continue;
    auto vals = score_values(c, stats, stopwords);
    if (!vals.empty()) out.push_back(moments(vals).m2);
  }
  return out;
}

ImpressionMixture filter_clusters(const CharacterId& character, const std::vector<PhraseCluster>& clusters,
                                  const TermStatistics& stats, const FilterThresholds& thresholds,
                                  const WordSet& stopwords) {
  ImpressionMixture mix;
  mix.character = character;
  std::vector<std::pair<const PhraseCluster*, std::vector<double>>> scored;
  std::vector<double> all_scores;
  for (const auto& c : clusters) {
    if (c.is_noise()) {
      mix.noise.members.insert(mix.noise.members.end(), c.members.begin(), c.members.end());
      continue;
    }
    if (c.members.empty()) continue;
    auto vals = score_values(c, stats, stopwords);
    all_scores.insert(all_scores.end(), vals.begin(), vals.end());
    scored.emplace_back(&c, std::move(vals));
  }
  if (scored.empty()) return mix;

  double tau_mean = thresholds.mean ? *thresholds.mean
                                    : (all_scores.empty() ? 0.0 : percentile(all_scores, 75.0));
  double tau_var = 0.0;
  if (thresholds.variance) {
    tau_var = *thresholds.variance;
  } else {
    std::vector<double> vars;
    for (const auto& [c, vals] : scored) {
      if (!vals.empty()) vars.push_back(moments(vals).m2);
    }
    tau_var = vars.empty() ? 0.0 : percentile(vars, 50.0);
  }

  for (const auto& [c, vals] : scored) {
    if (vals.empty()) continue;
    bool keep = false;
    auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    if (vals.size() >= 3 && *lo != *hi) keep = skewness(vals) > thresholds.skew;
    if (!keep) {
      auto m = moments(vals);
      keep = m.mean > tau_mean && m.m2 < tau_var;
    }
    if (keep) {
      mix.clusters.push_back(*c);
      mix.clusters.back().id = static_cast<int>(mix.clusters.size()) - 1;
    }
  }
  return mix;
}

ImpressionMixture filter_clusters(const CharacterId& character, const std::vector<PhraseCluster>& clusters,
                                  const ReviewCorpus& corpus, const FilterThresholds& thresholds,
                                  const WordSet& stopwords) {
  return filter_clusters(character, clusters, TermStatistics(corpus, stopwords), thresholds, stopwords);
}

std::vector<std::size_t> dendrogram_order(const Matrix& similarity, const std::vector<std::string>& labels) {
  const auto n = static_cast<std::size_t>(similarity.rows());
  struct Node {
    std::vector<std::size_t> leaves;
    std::string key;
  };
  std::vector<Node> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({{i}, i < labels.size() ? labels[i] : std::string()});

  auto distance = [&](const Node& a, const Node& b) {
    double d = 0;
    for (auto i : a.leaves) {
      for (auto j : b.leaves) d += 2.0 - 0.5 * (similarity(i, j) + similarity(j, i));
    }
    return d / static_cast<double>(a.leaves.size() * b.leaves.size());
  };

  while (active.size() > 1) {
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::string, std::string> best_key;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        double d = distance(active[a], active[b]);
        std::pair<std::string, std::string> key = std::minmax(active[a].key, active[b].key);
        if (d < best || (d == best && key < best_key)) {
          best = d;
          best_a = a;
          best_b = b;
          best_key = key;
        }
      }
    }
    Node& x = active[best_a];
    Node& y = active[best_b];
    bool x_first = x.key <= y.key;
    Node merged;
    const Node& first = x_first ? x : y;
    const Node& second = x_first ? y : x;
    merged.leaves = first.leaves;
    merged.leaves.insert(merged.leaves.end(), second.leaves.begin(), second.leaves.end());
    merged.key = first.key;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    active[best_a] = std::move(merged);
  }
  return active.empty() ? std::vector<std::size_t>{} : active.front().leaves;
}

Heatmap mixture_heatmap(const ImpressionMixture& a, const ImpressionMixture& b, const EmbeddingTable& table,
                        int k) {
  if (a.clusters.empty() || b.clusters.empty()) {
    throw Error(ErrorCode::EmptyCluster, "heatmap needs at least one cluster per mixture");
  }
  std::vector<PointSet> sets;
  for (const auto* mix : {&a, &b}) {
    for (const auto& c : mix->clusters) {
      if (c.members.empty()) throw Error(ErrorCode::EmptyCluster, "cluster '" + c.label + "' has no members");
      sets.push_back(embed_cluster(c, table));
    }
  }
  auto projected = pca_project(sets, k);
  double scale = 0;
  for (const auto& p : projected) scale = std::max(scale, p.vectors.rowwise().norm().maxCoeff());
  for (auto& p : projected) flush_tiny_rows(p.vectors, scale);

  const auto rows = a.clusters.size();
  const auto cols = b.clusters.size();
  Heatmap h;
  h.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t l = 0; l < rows; ++l) {
    for (std::size_t m = 0; m < cols; ++m) {
      h.values(l, m) = cluster_pair_similarity(projected[l].vectors, projected[rows + m].vectors,
                                               ZeroVectorPolicy::Neutral);
    }
  }
  for (const auto& c : a.clusters) h.rows.push_back(c.label);
  for (const auto& c : b.clusters) h.cols.push_back(c.label);

  if (&a == &b || (a.character == b.character && rows == cols)) {
    auto order = dendrogram_order(h.values, h.rows);
    Heatmap sorted;
    sorted.values.resize(h.values.rows(), h.values.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted.rows.push_back(h.rows[order[i]]);
      sorted.cols.push_back(h.cols[order[i]]);
      for (std::size_t j = 0; j < order.size(); ++j) sorted.values(i, j) = h.values(order[i], order[j]);
    }
    return sorted;
  }
  return h;
}

double histogram_entropy(std::span<const double> values, int bins, int kernel_width) {
  if (bins < 1 || kernel_width < 1) throw Error(ErrorCode::ConfigConflict, "bins and kernel width must be >= 1");
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "entropy of no values");
  std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
  for (double v : values) {
    auto idx = static_cast<long>(std::floor((v + 2.0) / 4.0 * bins));
    hist[static_cast<std::size_t>(std::clamp(idx, 0L, static_cast<long>(bins) - 1))] += 1.0;
  }
  const int left = (kernel_width - 1) / 2;
  const int right = kernel_width / 2;
  std::vector<double> smooth(hist.size(), 0.0);
  for (int i = 0; i < bins; ++i) {
    int lo = std::max(0, i - left);
    int hi = std::min(bins - 1, i + right);
    double s = 0;
    for (int j = lo; j <= hi; ++j) s += hist[static_cast<std::size_t>(j)];
    smooth[static_cast<std::size_t>(i)] = s / (hi - lo + 1);
  }
  double total = std::accumulate(smooth.begin(), smooth.end(), 0.0);
  double h = 0;
  for (double s : smooth) {
    if (s <= 0) continue;
    double p = s / total;
    h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

double character_entropy(const Heatmap& h, int bins, int kernel_width) {
  const auto& s = h.values;
  if (s.rows() != s.cols()) throw Error(ErrorCode::AsymmetricInput, "heatmap is not square");
  if (s.rows() < 4) {
    throw Error(ErrorCode::TooFewClusters, std::to_string(s.rows()) + " impression clusters, need 4");
  }
  if ((s - s.transpose()).cwiseAbs().maxCoeff() >= 1e-9) {
    throw Error(ErrorCode::AsymmetricInput, "heatmap is not symmetric");
  }
  std::vector<double> below;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) below.push_back(s(i, j));
  }
  return histogram_entropy(below, bins, kernel_width);
}

void write_mixture(const ImpressionMixture& m, std::ostream& out) {
  auto record = [&](const PhraseCluster& c) {
    json members = json::array();
    for (const auto& p : c.members) members.push_back(p.phrase);
    out << json{{"character", m.character}, {"cluster", c.id}, {"label", c.label}, {"members", members}}.dump()
        << '\n';
  };
  for (const auto& c : m.clusters) record(c);
  if (!m.noise.members.empty()) record(m.noise);
}

std::map<CharacterId, ImpressionMixture> read_mixtures(std::istream& in, const EmbeddingTable* table) {
  std::map<CharacterId, ImpressionMixture> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
      PhraseCluster c;
      c.id = j.at("cluster").get<int>();
      c.label = j.at("label").get<std::string>();
      for (const auto& p : j.at("members")) {
        auto phrase = p.get<std::string>();
        c.members.push_back({phrase, table ? table->at(phrase) : Vector()});
      }
      auto character = j.at("character").get<std::string>();
      auto& m = out[character];
      m.character = character;
      if (c.is_noise()) {
        m.noise = std::move(c);
      } else {
        m.clusters.push_back(std::move(c));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_heatmap(const Heatmap& h, std::ostream& out) {
  for (const auto& c : h.cols) out << '\t' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < h.values.rows(); ++i) {
    out << h.rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < h.values.cols(); ++j) out << '\t' << format_double(h.values(i, j));
    out << '\n';
  }
}

void write_heatmap_ppm(const Heatmap& h, std::ostream& out, int cell) {
  const auto rows = h.values.rows();
  const auto cols = h.values.cols();
  out << "P6\n" << cols * cell << ' ' << rows * cell << "\n255\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    std::string line;
    for (Eigen::Index j = 0; j < cols; ++j) {
      double t = std::clamp(h.values(i, j) / 2.0, -1.0, 1.0);
      auto fade = static_cast<unsigned char>(std::lround(255.0 * (1.0 - std::abs(t))));
      unsigned char r = t >= 0 ? 255 : fade;
      unsigned char b = t <= 0 ? 255 : fade;
      for (int x = 0; x < cell; ++x) {
        line.push_back(static_cast<char>(r));
        line.push_back(static_cast<char>(fade));
        line.push_back(static_cast<char>(b));
      }
    }
    for (int y = 0; y < cell; ++y) out << line;
  }
}

}  // namespace storynet
