#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "storynet/rev2seq.hpp"

namespace storynet {

struct GroundTruth {
  int events = 0;
  std::vector<std::pair<int, int>> edges;  // u precedes v
  std::vector<std::string> characters;
  std::uint64_t seed = 0;

  // precedes[u][v]: u reaches v in the DAG.
  std::vector<std::vector<bool>> precedence() const;
  std::vector<std::pair<int, int>> reduced_edges() const;
};

// Random DAG: events are shuffled into a hidden order and each forward pair is
// linked with probability `edge_p`. Event ids do not reveal the order.
GroundTruth random_ground_truth(int events, double edge_p, std::uint64_t seed);

// A uniformly sampled linear extension of the DAG (exact for up to 20 events,
// randomised Kahn beyond that).
std::vector<int> sample_linear_extension(const GroundTruth& gt, std::uint64_t seed);

// Each review: a linear extension, each event dropped with probability drop_p,
// then each adjacent pair swapped with probability swap_p, left to right.
ReviewSequences generate_reviews(const GroundTruth& gt, int n, double drop_p, double swap_p, std::uint64_t seed);

struct EdgeAccuracy {
  double precision = 1.0;
  double recall = 1.0;
  // Recovered edges whose head does not precede their tail in the ground truth.
  double order_accuracy = 1.0;
  // Recovered edges whose tail strictly precedes their head in the ground truth.
  double strict_order_accuracy = 1.0;
};

// Edges touching START or TERMINATE are ignored. Precision and recall are
// measured against the ground truth's transitive reduction.
EdgeAccuracy edge_accuracy(const SequenceGraph& recovered, const GroundTruth& gt);

struct SynthCorpusOptions {
  int dim = 768;
  int traits_per_character = 5;
  double impression_rate = 2.0;  // SVCOP tuples per review
  double narrator_rate = 0.3;    // probability a review mentions the narrator candidate
  double hypothetical_rate = 0.05;
};

// Writes tuples.jsonl, reviews.jsonl, characters.tsv, embeddings.tsv and
// ground_truth.json into `dir`, consumable by the ingest stage.
void write_synthetic_corpus(const GroundTruth& gt, const ReviewSequences& reviews, const std::string& dir,
                            std::uint64_t seed, const SynthCorpusOptions& options = {});

}  // namespace storynet
