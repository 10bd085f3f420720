#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "storynet/denscluster.hpp"
#include "storynet/embedstore.hpp"
#include "storynet/ingest.hpp"

namespace storynet {

using CharacterId = std::string;

// Surjective map from case-folded entity mentions to characters.
struct MentionMap {
  std::map<std::string, CharacterId> mapping;
  std::map<CharacterId, std::string> characters;

  std::optional<CharacterId> resolve(std::string_view mention) const;
  void add(std::string_view mention, const CharacterId& id, const std::string& display = {});
  bool is_surjective() const;

  // Tab-separated: mention, character-id, display-name.
  static MentionMap read(std::istream& in);
  static MentionMap read(const std::string& path);
  void write(std::ostream& out) const;
};

struct CharacterPair {
  CharacterId subject;
  CharacterId object;

  auto operator<=>(const CharacterPair&) const = default;
};

struct RelationClusterSet {
  CharacterPair pair;
  std::vector<PhraseCluster> clusters;  // noise, if any, last
  std::vector<bool> sequenceable;       // parallel to clusters; false for noise
  std::set<std::string> labels;

  // Cluster index holding this phrase. Identical phrases share a vector and
  // therefore always share a cluster.
  std::optional<std::size_t> cluster_of(const std::string& phrase) const;
};

// Keywords and (subject, label, object) triples that mark relation clusters as
// unsuitable for sequencing.
struct ClusterExclusions {
  WordSet keywords{"wish", "hope"};
  std::set<std::tuple<CharacterId, std::string, CharacterId>> events;

  // One keyword per line, or subject<TAB>label<TAB>object. Adds to the defaults.
  void read(const std::string& path);
};

struct IarcParams {
  ClusterParams cluster{3, 2.0};
  double merge_threshold = 1.6;
};

struct Event {
  CharacterId subject;
  std::string relation_label;
  CharacterId object;
  int id = 0;

  std::string describe() const { return subject + " " + relation_label + " " + object; }
  friend bool operator==(const Event&, const Event&) = default;
};

struct EventSequences {
  std::vector<Event> vocabulary;  // index == id
  std::map<std::string, std::vector<int>> by_review;
};

// Embedding of a tuple's relation: looked up by lemma first, then by text.
const Vector& relation_vector(const EmbeddingTable& table, const RelationTuple& t);

MentionMap emg_resolve(const ReviewCorpus& corpus, const MentionMap& seed,
                       const EmbeddingTable& table, double sim_threshold = 0.85);

RelationClusterSet iarc(const ReviewCorpus& corpus, const MentionMap& map, const CharacterPair& pair,
                        const EmbeddingTable& table, const IarcParams& params = {},
                        const ClusterExclusions& exclusions = {},
                        const WordSet& stopwords = default_stopwords());

// IARC over every ordered pair of distinct characters that co-occur in a tuple.
std::vector<RelationClusterSet> iarc_all(const ReviewCorpus& corpus, const MentionMap& map,
                                         const EmbeddingTable& table, const IarcParams& params = {},
                                         const ClusterExclusions& exclusions = {},
                                         const WordSet& stopwords = default_stopwords());

EventSequences build_event_sequences(const ReviewCorpus& corpus, const MentionMap& map,
                                     const std::vector<RelationClusterSet>& clusters);

// JSON-lines handoff between pipeline stages. Member vectors are not persisted.
void write_cluster_sets(const std::vector<RelationClusterSet>& sets, std::ostream& out);
std::vector<RelationClusterSet> read_cluster_sets(std::istream& in);
void write_event_sequences(const EventSequences& seqs, std::ostream& events_out,
                           std::ostream& sequences_out);
EventSequences read_event_sequences(std::istream& events_in, std::istream& sequences_in);

}  // namespace storynet
