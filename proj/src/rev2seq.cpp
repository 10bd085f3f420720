#include "storynet/rev2seq.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "storynet/error.hpp"
#include "storynet/text.hpp"

namespace storynet {

using nlohmann::json;

namespace {

int node_of_row(const PrecedenceMatrix& m, Eigen::Index r) {
  if (r == m.start()) return SequenceGraph::kStart;
  if (r == m.terminate()) return SequenceGraph::kTerminate;
  return m.events[static_cast<std::size_t>(r - 1)];
}

// Kahn order over g.nodes; empty optional on a cycle.
std::optional<std::vector<int>> topological_order(const SequenceGraph& g) {
  std::map<int, int> indeg;
  for (int n : g.nodes) indeg[n] = 0;
  for (const auto& [u, vs] : g.successors) {
    indeg.try_emplace(u, 0);
    for (int v : vs) ++indeg[v];
  }
  std::deque<int> ready;
  for (const auto& [n, d] : indeg) {
    if (d == 0) ready.push_back(n);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int u = ready.front();
    ready.pop_front();
    order.push_back(u);
    auto it = g.successors.find(u);
    if (it == g.successors.end()) continue;
    for (int v : it->second) {
      if (--indeg[v] == 0) ready.push_back(v);
    }
  }
  if (order.size() != indeg.size()) return std::nullopt;
  return order;
}

}  // namespace

std::optional<Eigen::Index> PrecedenceMatrix::row_of(int event_id) const {
  auto it = std::lower_bound(events.begin(), events.end(), event_id);
  if (it == events.end() || *it != event_id) return std::nullopt;
  return static_cast<Eigen::Index>(it - events.begin()) + 1;
}

PrecedenceMatrix build_precedence_matrix(const ReviewSequences& sequences, const std::vector<int>& vocabulary,
                                         const PrecedenceOptions& options) {
  PrecedenceMatrix m;
  m.events = vocabulary;
  std::sort(m.events.begin(), m.events.end());
  m.events.erase(std::unique(m.events.begin(), m.events.end()), m.events.end());
  const auto size = static_cast<Eigen::Index>(m.events.size()) + 2;
  m.weights = Matrix::Zero(size, size);
  m.reviews = Matrix::Zero(size, size);

  for (const auto& [review, seq] : sequences) {
    std::vector<Eigen::Index> rows;
    rows.reserve(seq.size());
    for (int e : seq) {
      auto r = m.row_of(e);
      if (!r) throw Error(ErrorCode::UnknownEvent, "event " + std::to_string(e) + " in review '" + review + "'");
      rows.push_back(*r);
    }
    if (rows.empty()) continue;

    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    auto count = [&](Eigen::Index a, Eigen::Index b) {
      bool first = seen.insert({a, b}).second;
      if (first) m.reviews(a, b) += 1;
      if (first || !options.per_review_dedup) m.weights(a, b) += 1;
    };
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      if (options.pairs == PairMode::Adjacent) {
        count(rows[i], rows[i + 1]);
      } else {
        for (std::size_t j = i + 1; j < rows.size(); ++j) count(rows[i], rows[j]);
      }
    }
    m.reviews(m.start(), rows.front()) += 1;
    m.reviews(rows.back(), m.terminate()) += 1;
  }
  return m;
}

PrecedenceMatrix preprocess(const PrecedenceMatrix& m, double start_const, double term_const) {
  const auto n = static_cast<Eigen::Index>(m.events.size());
  Matrix w = m.weights;
  w.diagonal().setZero();

  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 1; r <= n; ++r) {
    double links = w.block(r, 1, 1, n).sum() + w.block(1, r, n, 1).sum();
    if (links > 0) keep.push_back(r);
  }

  PrecedenceMatrix out;
  const auto k = static_cast<Eigen::Index>(keep.size());
  out.weights = Matrix::Zero(k + 2, k + 2);
  out.reviews = Matrix::Zero(k + 2, k + 2);
  std::vector<Eigen::Index> src{0};
  src.insert(src.end(), keep.begin(), keep.end());
  src.push_back(m.terminate());
  for (Eigen::Index i = 0; i < k + 2; ++i) {
    for (Eigen::Index j = 0; j < k + 2; ++j) {
      out.weights(i, j) = w(src[i], src[j]);
      out.reviews(i, j) = m.reviews(src[i], src[j]);
    }
  }
  for (auto r : keep) out.events.push_back(m.events[static_cast<std::size_t>(r - 1)]);

  out.weights.row(out.start()).setZero();
  out.weights.col(out.terminate()).setZero();
  for (Eigen::Index r = 1; r <= k; ++r) {
    out.weights(out.start(), r) = start_const;
    out.weights(r, out.terminate()) = term_const;
  }
  out.weights.row(out.terminate()).setZero();
  for (Eigen::Index r = 0; r < out.size(); ++r) {
    double s = out.weights.row(r).sum();
    if (s > 0) out.weights.row(r) /= s;
  }
  return out;
}

PrecedenceMatrix resolve_two_cycles(const PrecedenceMatrix& m) {
  PrecedenceMatrix out = m;
  auto& w = out.weights;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < w.cols(); ++j) {
      if (w(i, j) > 0 && w(j, i) > 0) {
        if (w(i, j) > w(j, i)) {
          w(j, i) = 0;
        } else if (w(j, i) > w(i, j)) {
          w(i, j) = 0;
        } else {
          w(i, j) = 0;
          w(j, i) = 0;
        }
      }
    }
  }
  return out;
}

std::vector<std::pair<int, int>> SequenceGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& [u, vs] : successors) {
    for (int v : vs) out.emplace_back(u, v);
  }
  return out;
}

bool SequenceGraph::has_edge(int u, int v) const {
  auto it = successors.find(u);
  return it != successors.end() && it->second.count(v) != 0;
}

std::size_t SequenceGraph::degree(int node) const {
  std::size_t d = 0;
  for (const auto& [u, vs] : successors) {
    if (u == node) d += vs.size();
    d += vs.count(node);
  }
  return d;
}

std::string node_name(int node) {
  if (node == SequenceGraph::kStart) return "START";
  if (node == SequenceGraph::kTerminate) return "TERMINATE";
  return std::to_string(node);
}

std::optional<int> parse_node_name(const std::string& raw) {
  auto name = trim(raw);
  if (name == "START") return SequenceGraph::kStart;
  if (name == "TERMINATE") return SequenceGraph::kTerminate;
  std::string_view digits = name;
  if (!digits.empty() && digits.front() == 'e') digits.remove_prefix(1);
  int value = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || p != digits.data() + digits.size() || value < 0) return std::nullopt;
  return value;
}

SequenceGraph sbfs(const PrecedenceMatrix& m) {
  const auto n = m.size();
  const Matrix& w = m.weights;
  std::vector<std::vector<Eigen::Index>> accepted(static_cast<std::size_t>(n));
  std::vector<int> time_of(static_cast<std::size_t>(n), -1);
  time_of[0] = 0;

  // Depth-first search over accepted edges.
  std::vector<char> visited(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> stack;
  auto has_path = [&](Eigen::Index from, Eigen::Index to) {
    if (from == to) return true;
    std::fill(visited.begin(), visited.end(), 0);
    stack.assign(1, from);
    visited[static_cast<std::size_t>(from)] = 1;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (auto v : accepted[static_cast<std::size_t>(u)]) {
        if (v == to) return true;
        if (!visited[static_cast<std::size_t>(v)]) {
          visited[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
    return false;
  };

  std::set<std::pair<Eigen::Index, Eigen::Index>> ignored;
  std::vector<Eigen::Index> current{0};
  int now = 0;
  while (!current.empty()) {
    std::sort(current.begin(), current.end());
    std::vector<Eigen::Index> next;
    std::vector<char> in_next(static_cast<std::size_t>(n));
    for (auto i : current) {
      for (Eigen::Index child = 0; child < n; ++child) {
        if (!(w(i, child) > 0)) continue;
        if (has_path(child, i)) {
          ignored.insert({i, child});
          continue;
        }
        auto& out = accepted[static_cast<std::size_t>(i)];
        if (std::find(out.begin(), out.end(), child) == out.end()) out.push_back(child);
        time_of[static_cast<std::size_t>(child)] = now + 1;
        if (!in_next[static_cast<std::size_t>(child)]) {
          in_next[static_cast<std::size_t>(child)] = 1;
          next.push_back(child);
        }
      }
    }
    current = std::move(next);
    ++now;
  }

  SequenceGraph g;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (time_of[static_cast<std::size_t>(r)] < 0) continue;
    int node = node_of_row(m, r);
    g.nodes.push_back(node);
    g.timestep[node] = time_of[static_cast<std::size_t>(r)];
  }
  for (Eigen::Index u = 0; u < n; ++u) {
    for (auto v : accepted[static_cast<std::size_t>(u)]) {
      int a = node_of_row(m, u);
      int b = node_of_row(m, v);
      g.successors[a].insert(b);
      g.support[{a, b}] = static_cast<int>(m.reviews(u, v));
    }
  }
  for (const auto& [u, v] : ignored) g.dropped_weight += w(u, v);
  g.total_weight = w.sum();
  return g;
}

bool is_acyclic(const SequenceGraph& g) { return topological_order(g).has_value(); }

std::map<int, std::set<int>> reachability(const SequenceGraph& g) {
  auto order = topological_order(g);
  if (!order) throw Error(ErrorCode::CycleDetected, "reachability of a cyclic graph");
  std::map<int, std::set<int>> reach;
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    auto& r = reach[*it];
    auto s = g.successors.find(*it);
    if (s == g.successors.end()) continue;
    for (int v : s->second) {
      r.insert(v);
      const auto& rv = reach[v];
      r.insert(rv.begin(), rv.end());
    }
  }
  return reach;
}

SequenceGraph transitive_reduce(const SequenceGraph& g) {
  auto reach = reachability(g);
  SequenceGraph out = g;
  for (auto& [u, vs] : out.successors) {
    const auto& direct = g.successors.at(u);
    for (auto it = vs.begin(); it != vs.end();) {
      int v = *it;
      bool shortcut = false;
      for (int w : direct) {
        if (w != v && reach[w].count(v)) {
          shortcut = true;
          break;
        }
      }
      if (shortcut) {
        out.support.erase({u, v});
        it = vs.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto it = out.successors.begin(); it != out.successors.end();) {
    it = it->second.empty() ? out.successors.erase(it) : std::next(it);
  }
  return out;
}

SequenceGraph sequence_events(const ReviewSequences& sequences, const std::vector<int>& vocabulary,
                              const SequencingParams& params) {
  auto m = build_precedence_matrix(sequences, vocabulary, params.precedence);
  m = preprocess(m, params.start_const, params.term_const);
  m = resolve_two_cycles(m);
  return transitive_reduce(sbfs(m));
}

std::vector<EdgeLabel> read_labels(std::istream& in) {
  std::vector<EdgeLabel> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream fields(line);
    while (std::getline(fields, field, '\t')) f.push_back(trim(field));
    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::MalformedRecord, "label line " + std::to_string(lineno) + ": " + what);
    };
    if (f.size() != 4) fail("expected source<TAB>target<TAB>judge<TAB>label");
    auto s = parse_node_name(f[0]);
    auto t = parse_node_name(f[1]);
    if (!s || !t) fail("bad node name");
    if (f[2].empty()) fail("empty judge id");
    Judgement j;
    if (f[3] == "1") {
      j = Judgement::Correct;
    } else if (f[3] == "0") {
      j = Judgement::Incorrect;
    } else if (f[3] == "X" || f[3] == "x") {
      j = Judgement::Unsure;
    } else {
      fail("label must be 1, 0 or X");
    }
    out.push_back({*s, *t, f[2], j});
  }
  return out;
}

std::vector<EdgeLabel> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, path);
  return read_labels(in);
}

ScoreReport score(const SequenceGraph& g, const std::vector<EdgeLabel>& labels) {
  std::vector<std::pair<int, int>> scored;
  for (const auto& [u, v] : g.edges()) {
    if (u != SequenceGraph::kStart && v != SequenceGraph::kTerminate) scored.emplace_back(u, v);
  }
  std::set<std::pair<int, int>> scored_set(scored.begin(), scored.end());

  ScoreReport report;
  std::set<std::string> judges;
  std::map<std::pair<std::pair<int, int>, std::string>, Judgement> table;
  for (const auto& l : labels) {
    judges.insert(l.judge);
    if (!scored_set.count({l.source, l.target})) {
      ++report.ignored_labels;
      continue;
    }
    auto [it, fresh] = table.emplace(std::make_pair(std::make_pair(l.source, l.target), l.judge), l.label);
    if (!fresh && it->second != l.label) {
      throw Error(ErrorCode::MalformedRecord, "conflicting labels from judge " + l.judge + " on " +
                                                  node_name(l.source) + " -> " + node_name(l.target));
    }
  }
  report.edges = scored.size();
  report.judges = judges.size();
  if (scored.empty()) return report;
  if (judges.empty()) throw Error(ErrorCode::MissingLabel, "no labels for " + std::to_string(scored.size()) + " edges");

  std::string missing;
  double ones = 0, unsure = 0;
  double majority_lower = 0, majority_upper = 0;
  const double n = static_cast<double>(judges.size());
  for (const auto& e : scored) {
    double e_ones = 0, e_unsure = 0;
    for (const auto& j : judges) {
      auto it = table.find({e, j});
      if (it == table.end()) {
        if (!missing.empty()) missing += ", ";
        missing += node_name(e.first) + "->" + node_name(e.second) + " by " + j;
        continue;
      }
      if (it->second == Judgement::Correct) e_ones += 1;
      if (it->second == Judgement::Unsure) e_unsure += 1;
    }
    ones += e_ones;
    unsure += e_unsure;
    if (2 * e_ones > n) majority_lower += 1;
    if (2 * (e_ones + e_unsure) >= n) majority_upper += 1;
  }
  if (!missing.empty()) throw Error(ErrorCode::MissingLabel, missing);

  const double total = n * static_cast<double>(scored.size());
  report.weighted = {100.0 * ones / total, 100.0 * (ones + unsure) / total};
  report.simple_majority = {100.0 * majority_lower / static_cast<double>(scored.size()),
                            100.0 * majority_upper / static_cast<double>(scored.size())};
  return report;
}

void write_sequence_graph(const SequenceGraph& g, std::ostream& out) {
  json nodes = json::array();
  for (int n : g.nodes) nodes.push_back(node_name(n));
  json edges = json::array();
  for (const auto& [u, v] : g.edges()) {
    auto it = g.support.find({u, v});
    edges.push_back({{"source", node_name(u)}, {"target", node_name(v)},
                     {"support", it == g.support.end() ? 0 : it->second}});
  }
  json steps = json::object();
  for (const auto& [node, t] : g.timestep) steps[node_name(node)] = t;
  json doc{{"nodes", nodes},
           {"edges", edges},
           {"timestep", steps},
           {"dropped_weight", g.dropped_weight},
           {"total_weight", g.total_weight}};
  out << doc.dump(2) << '\n';
}

SequenceGraph read_sequence_graph(std::istream& in) {
  SequenceGraph g;
  try {
    json doc = json::parse(in);
    auto node = [](const json& j) {
      auto n = parse_node_name(j.get<std::string>());
      if (!n) throw Error(ErrorCode::MalformedRecord, "bad node name " + j.dump());
      return *n;
    };
    for (const auto& n : doc.at("nodes")) g.nodes.push_back(node(n));
    for (const auto& e : doc.at("edges")) {
      int u = node(e.at("source"));
      int v = node(e.at("target"));
      g.successors[u].insert(v);
      g.support[{u, v}] = e.at("support").get<int>();
    }
    for (const auto& [name, t] : doc.at("timestep").items()) g.timestep[node(json(name))] = t.get<int>();
    g.dropped_weight = doc.value("dropped_weight", 0.0);
    g.total_weight = doc.value("total_weight", 0.0);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("sequence graph: ") + e.what());
  }
  return g;
}

void write_sequence_dot(const SequenceGraph& g, std::ostream& out, const std::vector<Event>& vocabulary) {
  auto label_of = [&](int node) {
    if (node >= 0 && static_cast<std::size_t>(node) < vocabulary.size()) return vocabulary[node].describe();
    return node_name(node);
  };
  auto q = [](const std::string& s) {
    std::string r = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') r.push_back('\\');
      r.push_back(c);
    }
    return r + "\"";
  };
  out << "digraph sequence {\n  rankdir=TB;\n  node [shape=box];\n";
  std::map<int, std::vector<int>> ranks;
  for (int n : g.nodes) {
    int t = g.timestep.count(n) ? g.timestep.at(n) : 0;
    ranks[t].push_back(n);
    out << "  " << q(node_name(n)) << " [label=" << q(label_of(n)) << ", timestep=" << t;
    if (n >= 0 && g.degree(n) > 2) out << ", hub=true, style=filled, fillcolor=turquoise";
    out << "];\n";
  }
  for (const auto& [t, members] : ranks) {
    bool terminal = std::find(members.begin(), members.end(), SequenceGraph::kTerminate) != members.end();
    out << "  { rank=" << (t == 0 ? "min" : terminal ? "max" : "same") << ";";
    for (int n : members) out << ' ' << q(node_name(n)) << ';';
    out << " }\n";
  }
  for (const auto& [u, v] : g.edges()) {
    auto it = g.support.find({u, v});
    int support = it == g.support.end() ? 0 : it->second;
    out << "  " << q(node_name(u)) << " -> " << q(node_name(v)) << " [support=" << support;
    if (support >= 2) out << ", verified=true, penwidth=2";
    out << "];\n";
  }
  out << "}\n";
}

}  // namespace storynet
