#include "storynet/storygraph.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <set>

#include "storynet/error.hpp"

namespace storynet {

using nlohmann::json;

namespace {

struct EdgeTally {
  int support = 0;
  std::map<std::string, int> phrases;
};

std::vector<std::string> ranked_phrases(const std::map<std::string, int>& phrases) {
  std::vector<std::pair<std::string, int>> v(phrases.begin(), phrases.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (auto& [p, n] : v) out.push_back(p);
  return out;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

bool counts_as_relation(const RelationTuple& t) { return t.kind != TupleKind::SVCOP; }

}  // namespace

const GraphNode* StoryGraph::find(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::size_t StoryGraph::degree(const std::string& id) const {
  std::set<std::string> nbrs;
  for (const auto& e : edges) {
    if (e.source == id && e.target != id) nbrs.insert(e.target);
    if (e.target == id && e.source != id) nbrs.insert(e.source);
  }
  return nbrs.size();
}

StoryGraph build_regular_graph(const std::vector<RelationClusterSet>& clusters, const MentionMap& map) {
  StoryGraph g;
  std::set<std::string> seen;
  auto add_node = [&](const CharacterId& id) {
    if (!seen.insert(id).second) return;
    auto it = map.characters.find(id);
    g.nodes.push_back({id, it == map.characters.end() ? id : it->second, NodeKind::CHARACTER});
  };
  for (const auto& set : clusters) {
    for (const auto& c : set.clusters) {
      if (c.is_noise() || c.members.empty()) continue;
      add_node(set.pair.subject);
      add_node(set.pair.object);
      g.edges.push_back({set.pair.subject, set.pair.object, {c.label}, static_cast<int>(c.members.size())});
    }
  }
  return g;
}

std::vector<std::string> rank_candidates(const ReviewCorpus& corpus, const MentionMap& map, int top_k) {
  if (top_k <= 0) return {};
  std::map<std::string, int> freq;
  for (const auto& [id, tuples] : corpus.reviews) {
    for (const auto& t : tuples) {
      if (!counts_as_relation(t)) continue;
      for (const auto* head : {&t.subject_head, &t.object_head}) {
        auto m = to_lower(trim(*head));
        if (!map.resolve(m)) ++freq[m];
      }
    }
  }
  std::vector<std::pair<std::string, int>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (const auto& [m, n] : ranked) {
    if (static_cast<int>(out.size()) == top_k) break;
    out.push_back(m);
  }
  return out;
}

StoryGraph expand_graph(const StoryGraph& regular, const std::vector<std::string>& candidates,
                        const ReviewCorpus& corpus, const MentionMap& map, const ExpansionParams& params) {
  StoryGraph g = regular;
  std::set<std::string> taken;
  for (const auto& n : g.nodes) taken.insert(n.id);

  for (const auto& raw : candidates) {
    auto cand = to_lower(trim(raw));
    if (map.resolve(cand)) continue;
    // (is_outgoing, character) -> tally
    std::map<std::pair<bool, CharacterId>, EdgeTally> tallies;
    for (const auto& [id, tuples] : corpus.reviews) {
      for (const auto& t : tuples) {
        if (!counts_as_relation(t)) continue;
        auto subj = to_lower(trim(t.subject_head));
        auto obj = to_lower(trim(t.object_head));
        if (subj == cand) {
          if (auto c = map.resolve(obj)) {
            auto& tally = tallies[{true, *c}];
            ++tally.support;
            ++tally.phrases[effective_relation(t)];
          }
        } else if (obj == cand) {
          if (auto c = map.resolve(subj)) {
            auto& tally = tallies[{false, *c}];
            ++tally.support;
            ++tally.phrases[effective_relation(t)];
          }
        }
      }
    }
    std::vector<GraphEdge> kept;
    std::set<CharacterId> neighbours;
    std::string node_id = taken.count(cand) ? "candidate:" + cand : cand;
    for (const auto& [key, tally] : tallies) {
      if (tally.support <= params.min_edge_support) continue;
      const auto& [outgoing, character] = key;
      neighbours.insert(character);
      GraphEdge e{outgoing ? node_id : character, outgoing ? character : node_id,
                  ranked_phrases(tally.phrases), tally.support};
      kept.push_back(std::move(e));
    }
    if (static_cast<int>(neighbours.size()) < params.min_degree) continue;
    for (const auto& character : neighbours) {
      if (taken.insert(character).second) {
        auto it = map.characters.find(character);
        g.nodes.push_back({character, it == map.characters.end() ? character : it->second,
                           NodeKind::CHARACTER});
      }
    }
    taken.insert(node_id);
    g.nodes.push_back({node_id, cand, NodeKind::CANDIDATE});
    g.edges.insert(g.edges.end(), kept.begin(), kept.end());
  }
  return g;
}

StoryGraph candidate_subnetwork(const std::vector<std::string>& candidates, const ReviewCorpus& corpus,
                                const ExpansionParams& params) {
  StoryGraph g;
  std::set<std::string> names;
  for (const auto& raw : candidates) {
    auto c = to_lower(trim(raw));
    if (names.insert(c).second) g.nodes.push_back({c, c, NodeKind::CANDIDATE});
  }
  std::map<std::pair<std::string, std::string>, EdgeTally> tallies;
  for (const auto& [id, tuples] : corpus.reviews) {
    for (const auto& t : tuples) {
      if (!counts_as_relation(t)) continue;
      auto subj = to_lower(trim(t.subject_head));
      auto obj = to_lower(trim(t.object_head));
      if (subj == obj || !names.count(subj) || !names.count(obj)) continue;
      auto& tally = tallies[{subj, obj}];
      ++tally.support;
      ++tally.phrases[effective_relation(t)];
    }
  }
  for (const auto& [key, tally] : tallies) {
    if (tally.support <= params.min_edge_support) continue;
    g.edges.push_back({key.first, key.second, ranked_phrases(tally.phrases), tally.support});
  }
  return g;
}

void write_dot(const StoryGraph& g, std::ostream& out, const std::string& name) {
  out << "digraph " << quoted(name) << " {\n";
  for (const auto& n : g.nodes) {
    bool character = n.kind == NodeKind::CHARACTER;
    out << "  " << quoted(n.id) << " [label=" << quoted(n.display)
        << ", kind=" << (character ? "character" : "candidate")
        << ", style=filled, fillcolor=" << (character ? "palegreen" : "lightgrey") << "];\n";
  }
  for (const auto& e : g.edges) {
    out << "  " << quoted(e.source) << " -> " << quoted(e.target) << " [label="
        << quoted(join(e.labels, "; ")) << ", weight=" << e.support << "];\n";
  }
  out << "}\n";
}

void write_graph(const StoryGraph& g, std::ostream& out) {
  for (const auto& n : g.nodes) {
    out << json{{"type", "node"},
                {"id", n.id},
                {"display", n.display},
                {"kind", n.kind == NodeKind::CHARACTER ? "CHARACTER" : "CANDIDATE"}}
               .dump()
        << '\n';
  }
  for (const auto& e : g.edges) {
    out << json{{"type", "edge"}, {"source", e.source}, {"target", e.target},
                {"labels", e.labels}, {"support", e.support}}
               .dump()
        << '\n';
  }
}

StoryGraph read_graph(std::istream& in) {
  StoryGraph g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto rec = json::parse(line);
      auto type = rec.at("type").get<std::string>();
      if (type == "node") {
        auto kind = rec.at("kind").get<std::string>();
        if (kind != "CHARACTER" && kind != "CANDIDATE") throw Error(ErrorCode::MalformedRecord, "kind " + kind);
        g.nodes.push_back({rec.at("id").get<std::string>(), rec.at("display").get<std::string>(),
                           kind == "CHARACTER" ? NodeKind::CHARACTER : NodeKind::CANDIDATE});
      } else if (type == "edge") {
        g.edges.push_back({rec.at("source").get<std::string>(), rec.at("target").get<std::string>(),
                           rec.at("labels").get<std::vector<std::string>>(), rec.at("support").get<int>()});
      } else {
        throw Error(ErrorCode::MalformedRecord, "unknown record type " + type);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, "graph line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  for (const auto& e : g.edges) {
    if (!g.find(e.source) || !g.find(e.target)) {
      throw Error(ErrorCode::MalformedRecord, "edge " + e.source + " -> " + e.target + " has a missing endpoint");
    }
  }
  return g;
}

}  // namespace storynet
