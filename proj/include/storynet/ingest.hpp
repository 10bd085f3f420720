#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "storynet/text.hpp"

namespace storynet {

enum class TupleKind { SVO, SVCOP, OTHER };

enum class SentenceFlag { HYPOTHETICAL, INFINITIVE_RELATION };

struct RelationTuple {
  std::string review_id;
  std::uint32_t position = 0;
  std::string subject_text;
  std::string subject_head;
  std::string relation_text;
  std::optional<std::string> relation_lemma;
  std::string object_text;
  std::string object_head;
  TupleKind kind = TupleKind::SVO;
  std::set<SentenceFlag> sentence_flags;
  std::string sentence_text;

  bool has_flag(SentenceFlag f) const { return sentence_flags.count(f) != 0; }

  friend bool operator==(const RelationTuple&, const RelationTuple&) = default;
};

// Phrase used for clustering and labels: the lemma for single-word relations,
// the verbatim relation text otherwise.
std::string effective_relation(const RelationTuple& t);

struct ReviewCorpus {
  std::map<std::string, std::vector<RelationTuple>> reviews;
  std::map<std::string, std::string> raw_texts;

  std::size_t tuple_count() const;

  friend bool operator==(const ReviewCorpus&, const ReviewCorpus&) = default;
};

struct StopEntityList {
  WordSet entries;  // stored lowercased

  static StopEntityList defaults();
  static StopEntityList from_file(const std::string& path);

  bool contains(std::string_view mention) const;
};

std::string to_string(TupleKind k);
std::string to_string(SentenceFlag f);

// One JSON object per line carrying the RelationTuple fields. Raw texts default
// to the distinct sentence texts of each review joined by a space.
ReviewCorpus parse_tuples(std::istream& in);
ReviewCorpus parse_tuples(const std::string& path);

// One JSON object per line: {"review_id": ..., "text": ...}. Every review in the
// corpus must be present; reviews without tuples are kept as documents.
void attach_raw_texts(ReviewCorpus& corpus, std::istream& in);
void attach_raw_texts(ReviewCorpus& corpus, const std::string& path);

void write_tuples(const ReviewCorpus& corpus, std::ostream& out);
void write_raw_texts(const ReviewCorpus& corpus, std::ostream& out);

// Case-insensitive, word-boundary match on would/could/should.
bool is_hypothetical_sentence(std::string_view sentence);

ReviewCorpus filter_eligible_events(const ReviewCorpus& corpus, const StopEntityList& stops);

std::string lemmatize_word(std::string_view word);
RelationTuple lemmatize_relation(RelationTuple t);
ReviewCorpus lemmatize_corpus(ReviewCorpus corpus);

}  // namespace storynet
