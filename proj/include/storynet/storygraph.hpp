#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "storynet/actants.hpp"

namespace storynet {

enum class NodeKind { CHARACTER, CANDIDATE };

struct GraphNode {
  std::string id;
  std::string display;
  NodeKind kind = NodeKind::CHARACTER;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  std::string source;
  std::string target;
  std::vector<std::string> labels;
  int support = 1;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct StoryGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  const GraphNode* find(const std::string& id) const;
  // Distinct neighbours over in- and out-edges.
  std::size_t degree(const std::string& id) const;

  friend bool operator==(const StoryGraph&, const StoryGraph&) = default;
};

struct ExpansionParams {
  int min_edge_support = 5;  // an edge needs strictly more tuples than this
  int min_degree = 3;
};

StoryGraph build_regular_graph(const std::vector<RelationClusterSet>& clusters,
                               const MentionMap& map = {});

// Unmapped mentions by raw frequency, descending; ties lexicographic.
std::vector<std::string> rank_candidates(const ReviewCorpus& corpus, const MentionMap& map,
                                         int top_k = 20);

StoryGraph expand_graph(const StoryGraph& regular, const std::vector<std::string>& candidates,
                        const ReviewCorpus& corpus, const MentionMap& map,
                        const ExpansionParams& params = {});

StoryGraph candidate_subnetwork(const std::vector<std::string>& candidates, const ReviewCorpus& corpus,
                                const ExpansionParams& params = {});

void write_dot(const StoryGraph& g, std::ostream& out, const std::string& name = "story");
void write_graph(const StoryGraph& g, std::ostream& out);
StoryGraph read_graph(std::istream& in);

}  // namespace storynet
