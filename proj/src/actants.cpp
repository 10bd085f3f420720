#include "storynet/actants.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "storynet/error.hpp"

namespace storynet {

using nlohmann::json;

namespace {

struct Profile {
  Vector out_sum;
  Vector in_sum;
  int out_n = 0;
  int in_n = 0;

  void add_out(const Vector& v) {
    if (out_n == 0) out_sum = Vector::Zero(v.size());
    out_sum += v;
    ++out_n;
  }
  void add_in(const Vector& v) {
    if (in_n == 0) in_sum = Vector::Zero(v.size());
    in_sum += v;
    ++in_n;
  }
};

// Mean cosine over the directions both profiles have evidence for.
std::optional<double> profile_similarity(const Profile& a, const Profile& b) {
  double total = 0;
  int dirs = 0;
  if (a.out_n > 0 && b.out_n > 0 && a.out_sum.norm() > 0 && b.out_sum.norm() > 0) {
    total += cosine(a.out_sum, b.out_sum);
    ++dirs;
  }
  if (a.in_n > 0 && b.in_n > 0 && a.in_sum.norm() > 0 && b.in_sum.norm() > 0) {
    total += cosine(a.in_sum, b.in_sum);
    ++dirs;
  }
  if (dirs == 0) return std::nullopt;
  return total / dirs;
}

bool takes_part_in_relations(const RelationTuple& t) { return t.kind != TupleKind::SVCOP; }

bool matches_keyword(const PhraseCluster& c, const WordSet& keywords) {
  auto hit = [&](std::string_view text) {
    for (const auto& tok : tokenize(text)) {
      if (keywords.count(tok) || keywords.count(lemmatize_word(tok))) return true;
    }
    return false;
  };
  if (hit(c.label)) return true;
  for (const auto& m : c.members) {
    if (hit(m.phrase)) return true;
  }
  return false;
}

// Clusters sharing a label describe the same event; fold them together.
std::vector<PhraseCluster> fold_duplicate_labels(std::vector<PhraseCluster> clusters) {
  std::vector<PhraseCluster> out;
  std::map<std::string, std::size_t> by_label;
  std::optional<PhraseCluster> noise;
  for (auto& c : clusters) {
    if (c.is_noise()) {
      noise = std::move(c);
      continue;
    }
    auto [it, fresh] = by_label.emplace(c.label, out.size());
    if (fresh) {
      c.id = static_cast<int>(out.size());
      out.push_back(std::move(c));
    } else {
      auto& dst = out[it->second].members;
      dst.insert(dst.end(), c.members.begin(), c.members.end());
    }
  }
  if (noise) out.push_back(std::move(*noise));
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) fields.push_back(trim(field));
  return fields;
}

}  // namespace

std::optional<CharacterId> MentionMap::resolve(std::string_view mention) const {
  auto it = mapping.find(to_lower(trim(mention)));
  if (it == mapping.end()) return std::nullopt;
  return it->second;
}

void MentionMap::add(std::string_view mention, const CharacterId& id, const std::string& display) {
  mapping[to_lower(trim(mention))] = id;
  auto& name = characters[id];
  if (name.empty()) name = display.empty() ? id : display;
}

bool MentionMap::is_surjective() const {
  std::set<CharacterId> hit;
  for (const auto& [m, id] : mapping) hit.insert(id);
  for (const auto& [id, name] : characters) {
    if (!hit.count(id)) return false;
  }
  return true;
}

MentionMap MentionMap::read(std::istream& in) {
  MentionMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorCode::MalformedRecord,
                  "character line " + std::to_string(lineno) + ": expected mention<TAB>id[<TAB>name]");
    }
    map.add(fields[0], fields[1], fields.size() > 2 ? fields[2] : std::string());
  }
  return map;
}

MentionMap MentionMap::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, path);
  return read(in);
}

void MentionMap::write(std::ostream& out) const {
  for (const auto& [mention, id] : mapping) {
    out << mention << '\t' << id << '\t' << characters.at(id) << '\n';
  }
}

std::optional<std::size_t> RelationClusterSet::cluster_of(const std::string& phrase) const {
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    for (const auto& m : clusters[i].members) {
      if (m.phrase == phrase) return i;
    }
  }
  return std::nullopt;
}

void ClusterExclusions::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, path);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() == 3) {
      events.emplace(fields[0], fields[1], fields[2]);
    } else {
      keywords.insert(to_lower(trim(line)));
    }
  }
}

const Vector& relation_vector(const EmbeddingTable& table, const RelationTuple& t) {
  auto key = effective_relation(t);
  if (table.contains(key)) return table.at(key);
  if (table.contains(t.relation_text)) return table.at(t.relation_text);
  return table.at(key);
}

MentionMap emg_resolve(const ReviewCorpus& corpus, const MentionMap& seed,
                       const EmbeddingTable& table, double sim_threshold) {
  if (seed.mapping.empty() || seed.characters.empty()) {
    throw Error(ErrorCode::EmptySeed, "EMG needs at least one seeded character");
  }
  std::map<std::string, Profile> mentions;
  for (const auto& [id, tuples] : corpus.reviews) {
    for (const auto& t : tuples) {
      if (!takes_part_in_relations(t)) continue;
      const auto& v = relation_vector(table, t);
      mentions[to_lower(trim(t.subject_head))].add_out(v);
      mentions[to_lower(trim(t.object_head))].add_in(v);
    }
  }

  std::map<CharacterId, Profile> characters;
  for (const auto& [mention, profile] : mentions) {
    auto id = seed.resolve(mention);
    if (!id) continue;
    auto& c = characters[*id];
    if (profile.out_n > 0) {
      if (c.out_n == 0) c.out_sum = Vector::Zero(profile.out_sum.size());
      c.out_sum += profile.out_sum;
      c.out_n += profile.out_n;
    }
    if (profile.in_n > 0) {
      if (c.in_n == 0) c.in_sum = Vector::Zero(profile.in_sum.size());
      c.in_sum += profile.in_sum;
      c.in_n += profile.in_n;
    }
  }

  MentionMap out = seed;
  for (const auto& [mention, profile] : mentions) {
    if (seed.resolve(mention)) continue;
    std::optional<CharacterId> best;
    double best_sim = sim_threshold;
    for (const auto& [id, cprof] : characters) {
      auto sim = profile_similarity(profile, cprof);
      if (sim && *sim > best_sim) {
        best_sim = *sim;
        best = id;
      }
    }
    if (best) out.mapping[mention] = *best;
  }
  return out;
}

RelationClusterSet iarc(const ReviewCorpus& corpus, const MentionMap& map, const CharacterPair& pair,
                        const EmbeddingTable& table, const IarcParams& params,
                        const ClusterExclusions& exclusions, const WordSet& stopwords) {
  RelationClusterSet out;
  out.pair = pair;
  std::vector<EmbeddedPhrase> points;
  for (const auto& [id, tuples] : corpus.reviews) {
    for (const auto& t : tuples) {
      if (!takes_part_in_relations(t)) continue;
      auto s = map.resolve(t.subject_head);
      auto o = map.resolve(t.object_head);
      if (!s || !o || *s != pair.subject || *o != pair.object) continue;
      points.push_back({effective_relation(t), relation_vector(table, t)});
    }
  }
  if (points.empty()) return out;

  auto clusters = cluster(points, params.cluster, stopwords);
  clusters = merge_similar(clusters, params.merge_threshold, stopwords);
  out.clusters = fold_duplicate_labels(std::move(clusters));
  for (const auto& c : out.clusters) {
    if (c.is_noise()) {
      out.sequenceable.push_back(false);
      continue;
    }
    out.labels.insert(c.label);
    bool excluded = matches_keyword(c, exclusions.keywords) ||
                    exclusions.events.count({pair.subject, c.label, pair.object}) != 0;
    out.sequenceable.push_back(!excluded);
  }
  return out;
}

std::vector<RelationClusterSet> iarc_all(const ReviewCorpus& corpus, const MentionMap& map,
                                         const EmbeddingTable& table, const IarcParams& params,
                                         const ClusterExclusions& exclusions,
                                         const WordSet& stopwords) {
  std::set<CharacterPair> pairs;
  for (const auto& [id, tuples] : corpus.reviews) {
    for (const auto& t : tuples) {
      if (!takes_part_in_relations(t)) continue;
      auto s = map.resolve(t.subject_head);
      auto o = map.resolve(t.object_head);
      if (s && o && *s != *o) pairs.insert({*s, *o});
    }
  }
  std::vector<RelationClusterSet> out;
  for (const auto& pair : pairs) {
    auto set = iarc(corpus, map, pair, table, params, exclusions, stopwords);
    if (!set.clusters.empty()) out.push_back(std::move(set));
  }
  return out;
}

EventSequences build_event_sequences(const ReviewCorpus& corpus, const MentionMap& map,
                                     const std::vector<RelationClusterSet>& clusters) {
  EventSequences out;
  std::map<CharacterPair, std::size_t> set_of;
  std::map<std::pair<std::size_t, std::size_t>, int> event_of;
  for (std::size_t s = 0; s < clusters.size(); ++s) {
    const auto& set = clusters[s];
    set_of[set.pair] = s;
    for (std::size_t c = 0; c < set.clusters.size(); ++c) {
      if (set.clusters[c].is_noise() || !set.sequenceable[c]) continue;
      Event e{set.pair.subject, set.clusters[c].label, set.pair.object,
              static_cast<int>(out.vocabulary.size())};
      event_of[{s, c}] = e.id;
      out.vocabulary.push_back(std::move(e));
    }
  }

  for (const auto& [review, tuples] : corpus.reviews) {
    auto& seq = out.by_review[review];
    for (const auto& t : tuples) {
      if (!takes_part_in_relations(t)) continue;
      auto s = map.resolve(t.subject_head);
      auto o = map.resolve(t.object_head);
      if (!s || !o || *s == *o) continue;
      auto set = set_of.find({*s, *o});
      if (set == set_of.end()) continue;
      auto c = clusters[set->second].cluster_of(effective_relation(t));
      if (!c) continue;
      auto ev = event_of.find({set->second, *c});
      if (ev == event_of.end()) continue;
      if (!seq.empty() && seq.back() == ev->second) continue;
      seq.push_back(ev->second);
    }
  }
  return out;
}

void write_cluster_sets(const std::vector<RelationClusterSet>& sets, std::ostream& out) {
  for (const auto& set : sets) {
    for (std::size_t c = 0; c < set.clusters.size(); ++c) {
      const auto& cl = set.clusters[c];
      json members = json::array();
      for (const auto& m : cl.members) members.push_back(m.phrase);
      out << json{{"subject", set.pair.subject},
                  {"object", set.pair.object},
                  {"id", cl.id},
                  {"label", cl.label},
                  {"sequenceable", static_cast<bool>(set.sequenceable[c])},
                  {"members", members}}
                 .dump()
          << '\n';
    }
  }
}

std::vector<RelationClusterSet> read_cluster_sets(std::istream& in) {
  std::vector<RelationClusterSet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto rec = json::parse(line);
      CharacterPair pair{rec.at("subject").get<std::string>(), rec.at("object").get<std::string>()};
      if (out.empty() || out.back().pair != pair) {
        out.emplace_back();
        out.back().pair = pair;
      }
      auto& set = out.back();
      PhraseCluster c;
      c.id = rec.at("id").get<int>();
      c.label = rec.at("label").get<std::string>();
      for (const auto& m : rec.at("members")) c.members.push_back({m.get<std::string>(), Vector()});
      if (!c.is_noise()) set.labels.insert(c.label);
      set.sequenceable.push_back(rec.at("sequenceable").get<bool>());
      set.clusters.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, "cluster line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_event_sequences(const EventSequences& seqs, std::ostream& events_out,
                           std::ostream& sequences_out) {
  for (const auto& e : seqs.vocabulary) {
    events_out << json{{"id", e.id}, {"subject", e.subject}, {"relation", e.relation_label},
                       {"object", e.object}}
                      .dump()
               << '\n';
  }
  for (const auto& [review, events] : seqs.by_review) {
    sequences_out << json{{"review_id", review}, {"events", events}}.dump() << '\n';
  }
}

EventSequences read_event_sequences(std::istream& events_in, std::istream& sequences_in) {
  EventSequences out;
  std::string line;
  std::size_t lineno = 0;
  try {
    while (std::getline(events_in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      auto rec = json::parse(line);
      Event e{rec.at("subject").get<std::string>(), rec.at("relation").get<std::string>(),
              rec.at("object").get<std::string>(), rec.at("id").get<int>()};
      if (e.id != static_cast<int>(out.vocabulary.size())) {
        throw Error(ErrorCode::MalformedRecord, "event ids must be dense and ordered");
      }
      out.vocabulary.push_back(std::move(e));
    }
    lineno = 0;
    while (std::getline(sequences_in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      auto rec = json::parse(line);
      out.by_review[rec.at("review_id").get<std::string>()] = rec.at("events").get<std::vector<int>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, "event/sequence line " + std::to_string(lineno) + ": " + e.what());
  }
  return out;
}

}  // namespace storynet
