#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "storynet/actants.hpp"
#include "storynet/embedstore.hpp"

namespace storynet {

using ReviewSequences = std::map<std::string, std::vector<int>>;

/// Event precedence counts augmented with START (row/column 0) and TERMINATE
/// (last row/column). Row r in 1..n holds event `events[r - 1]`.
struct PrecedenceMatrix {
  Matrix weights;
  // Distinct reviews supporting each ordered pair. START -> e counts reviews that
  // open with e, e -> TERMINATE those that close with it. Never normalised.
  Matrix reviews;
  std::vector<int> events;

  Eigen::Index size() const { return weights.rows(); }
  Eigen::Index start() const { return 0; }
  Eigen::Index terminate() const { return weights.rows() - 1; }
  std::optional<Eigen::Index> row_of(int event_id) const;
};

enum class PairMode { Adjacent, All };

struct PrecedenceOptions {
  PairMode pairs = PairMode::Adjacent;
  // Count each ordered pair at most once per review.
  bool per_review_dedup = false;
};

PrecedenceMatrix build_precedence_matrix(const ReviewSequences& sequences, const std::vector<int>& vocabulary,
                                         const PrecedenceOptions& options = {});

// Zeroes self-loops, drops isolated events, fills the START row and
// TERMINATE column, then L1-normalises every row.
PrecedenceMatrix preprocess(const PrecedenceMatrix& m, double start_const = 1.0, double term_const = 1e-3);

// Majority rule on mutual pairs: the smaller direction is zeroed, exact ties
// zero both.
PrecedenceMatrix resolve_two_cycles(const PrecedenceMatrix& m);

struct SequenceGraph {
  static constexpr int kStart = -1;
  static constexpr int kTerminate = -2;

  std::vector<int> nodes;  // START, reached events ascending, TERMINATE if reached
  std::map<int, std::set<int>> successors;
  std::map<int, int> timestep;
  std::map<std::pair<int, int>, int> support;

  // Weight of edges ignored because they would close a cycle, against the total
  // weight of the processed matrix.
  double dropped_weight = 0.0;
  double total_weight = 0.0;

  std::vector<std::pair<int, int>> edges() const;
  bool has_edge(int u, int v) const;
  std::size_t degree(int node) const;
  double dropped_fraction() const { return total_weight > 0 ? dropped_weight / total_weight : 0.0; }
};

std::string node_name(int node);
std::optional<int> parse_node_name(const std::string& name);

// Sequential breadth-first search: frontier by frontier from START, accepting
// an edge only if it closes no cycle among already accepted edges. An accepted
// edge stamps its head with the next time step, so later discoveries push
// events further down the timeline.
SequenceGraph sbfs(const PrecedenceMatrix& m);

// Throws CycleDetected if `g` is not a DAG.
SequenceGraph transitive_reduce(const SequenceGraph& g);

bool is_acyclic(const SequenceGraph& g);
// reach[u] is the set of nodes reachable from u by a path of length >= 1.
std::map<int, std::set<int>> reachability(const SequenceGraph& g);

struct SequencingParams {
  PrecedenceOptions precedence;
  double start_const = 1.0;
  double term_const = 1e-3;
};

// build -> preprocess -> resolve_two_cycles -> sbfs -> transitive_reduce
SequenceGraph sequence_events(const ReviewSequences& sequences, const std::vector<int>& vocabulary,
                              const SequencingParams& params = {});

enum class Judgement { Correct, Incorrect, Unsure };

struct EdgeLabel {
  int source;
  int target;
  std::string judge;
  Judgement label;
};

// Tab-separated: source, target, judge, label in {1, 0, X}. Nodes are event ids
// or START / TERMINATE.
std::vector<EdgeLabel> read_labels(std::istream& in);
std::vector<EdgeLabel> read_labels(const std::string& path);

struct ScoreBounds {
  double lower = 0;  // X read as 0, judge ties as 0
  double upper = 0;  // X read as 1, judge ties as 1
  double point() const { return 0.5 * (lower + upper); }
  double margin() const { return 0.5 * (upper - lower); }
};

struct ScoreReport {
  ScoreBounds weighted;         // percent
  ScoreBounds simple_majority;  // percent
  std::size_t edges = 0;
  std::size_t judges = 0;
  std::size_t ignored_labels = 0;  // labels on START/TERMINATE or unknown edges
};

// Only edges that neither leave START nor enter TERMINATE are scored; every
// judge must label every such edge.
ScoreReport score(const SequenceGraph& g, const std::vector<EdgeLabel>& labels);

void write_sequence_graph(const SequenceGraph& g, std::ostream& out);
SequenceGraph read_sequence_graph(std::istream& in);

// Ranked by time step; hubs (degree > 2) shaded, edges seen in >= 2 reviews marked.
void write_sequence_dot(const SequenceGraph& g, std::ostream& out,
                        const std::vector<Event>& vocabulary = {});

}  // namespace storynet
