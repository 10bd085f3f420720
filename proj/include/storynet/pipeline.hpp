#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "storynet/actants.hpp"
#include "storynet/rev2seq.hpp"
#include "storynet/sent2imp.hpp"

namespace storynet {

// Every tunable of the pipeline. Stored in a config file as sections
// (paths, actants, storygraph, rev2seq, sent2imp, synth) of named keys.
struct PipelineConfig {
  struct Paths {
    std::string out_dir = "out";
    std::string tuples;
    std::string reviews;
    std::string stop_entities;
    std::string embeddings;
    std::string characters;
    std::string exclude_clusters;
    std::string stopwords;
    std::string labels;
    std::string dot;        // extra copy of the main DOT export
    std::string graph_out;  // extra copy of the expanded-graph export
    std::string plot;       // heatmap image
  } paths;

  struct Actants {
    int min_cluster_size = 3;
    double eps = 2.0;
    double merge_threshold = 1.6;
    double emg_threshold = 0.85;
  } actants;

  struct Storygraph {
    int top_k = 20;
    int min_edge_support = 5;
    int min_degree = 3;
  } storygraph;

  struct Rev2seq {
    std::string pairs = "adjacent";
    bool per_review_dedup = false;
    double start_const = 1.0;
    double term_const = 1e-3;
  } rev2seq;

  struct Sent2imp {
    int min_cluster_size = 3;
    double eps = 2.0;
    double skew_threshold = 1.0;
    std::optional<double> mean_threshold;
    std::optional<double> variance_threshold;
    int pca_components = 4;
    int bins = 50;
    int kernel_width = 3;
    std::string character;
    std::string a;
    std::string b;
  } sent2imp;

  struct Synth {
    int events = 12;
    int reviews = 300;
    double drop = 0.3;
    double swap = 0.05;
    double edge_p = 0.3;
    std::uint64_t seed = 1;
  } synth;

  nlohmann::ordered_json to_json() const;
  // Applies the keys present in `j` on top of the current values. Unknown
  // sections or keys and out-of-range values throw ConfigConflict.
  void merge(const nlohmann::json& j);
  void validate() const;

  static PipelineConfig load(const std::string& path);
};

IarcParams iarc_params(const PipelineConfig& cfg);
SequencingParams sequencing_params(const PipelineConfig& cfg);

// Stage outputs, relative to the output directory.
namespace artifact {
inline constexpr const char* kTuplesAll = "tuples.all.jsonl";
inline constexpr const char* kTuplesFiltered = "tuples.filtered.jsonl";
inline constexpr const char* kReviews = "reviews.jsonl";
inline constexpr const char* kMentions = "mentions.tsv";
inline constexpr const char* kClusters = "relation_clusters.jsonl";
inline constexpr const char* kEvents = "events.jsonl";
inline constexpr const char* kSequences = "sequences.jsonl";
inline constexpr const char* kStoryDot = "story.dot";
inline constexpr const char* kStoryGraph = "story.graph.jsonl";
inline constexpr const char* kCandidateGraph = "candidates.graph.jsonl";
inline constexpr const char* kSequenceGraph = "sequence.json";
inline constexpr const char* kSequenceDot = "sequence.dot";
inline constexpr const char* kScore = "score.json";
inline constexpr const char* kImpressions = "impressions.jsonl";
inline constexpr const char* kComplexity = "complexity.tsv";
}  // namespace artifact

// Stages. Each reads its inputs from the configured paths or from earlier
// stage outputs in out_dir, and throws MissingInput naming an absent file.
void run_ingest(const PipelineConfig& cfg);
void run_actants(const PipelineConfig& cfg);
void run_storygraph(const PipelineConfig& cfg);
void run_rev2seq_build(const PipelineConfig& cfg);
void run_rev2seq_export(const PipelineConfig& cfg);
ScoreReport run_rev2seq_score(const PipelineConfig& cfg);
void run_sent2imp_profile(const PipelineConfig& cfg, std::ostream* echo = nullptr);
Heatmap run_sent2imp_heatmap(const PipelineConfig& cfg);
void run_sent2imp_complexity(const PipelineConfig& cfg, std::ostream* echo = nullptr);
void run_synth(const PipelineConfig& cfg);
void run_all(const PipelineConfig& cfg);

// Impression mixtures for every character with SVCOP evidence.
std::map<CharacterId, ImpressionMixture> impression_mixtures(const ReviewCorpus& corpus, const MentionMap& map,
                                                             const EmbeddingTable& table, const PipelineConfig& cfg,
                                                             const WordSet& stopwords);

void write_score_report(const ScoreReport& r, std::ostream& out);

}  // namespace storynet
