#include <doctest.h>

#include <sstream>

#include "storynet/embedstore.hpp"
#include "storynet/error.hpp"
#include "storynet/ingest.hpp"
#include "test_support.hpp"

using namespace storynet;
using testutil::code_of;
using testutil::tuple;

namespace {

const char* kRecord =
    R"({"review_id":"r1","position":0,"subject_text":"Atticus Finch","subject_head":"Atticus",)"
    R"("relation_text":"defends","object_text":"Tom","object_head":"Tom","kind":"SVO",)"
    R"("sentence_flags":[],"sentence_text":"Atticus Finch defends Tom."})";

}  // namespace

TEST_CASE("tokenize lowercases and drops inner apostrophes") {
  CHECK(tokenize("Lennie's rabbits, Don't!") == std::vector<std::string>{"lennies", "rabbits", "dont"});
  CHECK(tokenize("  ") .empty());
  CHECK(tokenize("A-B 3rd") == std::vector<std::string>{"a", "b", "3rd"});
}

TEST_CASE("default stopwords cover function words only") {
  const auto& s = default_stopwords();
  CHECK(s.count("the"));
  CHECK(s.count("would"));
  CHECK_FALSE(s.count("wizard"));
  CHECK_FALSE(s.count("#"));
}

TEST_CASE("parse_tuples on an empty stream gives an empty corpus") {
  std::istringstream in("");
  auto c = parse_tuples(in);
  CHECK(c.reviews.empty());
  CHECK(c.tuple_count() == 0);
}

TEST_CASE("parse_tuples reads one well-formed record") {
  std::istringstream in(kRecord);
  auto c = parse_tuples(in);
  REQUIRE(c.reviews.size() == 1);
  const auto& t = c.reviews.at("r1").at(0);
  CHECK(t.subject_head == "Atticus");
  CHECK(t.kind == TupleKind::SVO);
  CHECK_FALSE(t.relation_lemma.has_value());
  CHECK(c.raw_texts.at("r1") == "Atticus Finch defends Tom.");
}

TEST_CASE("parse_tuples reports malformed lines with line and field") {
  std::string bad = std::string(kRecord) + "\n" + R"({"review_id":"r1","position":1})" + "\n";
  std::istringstream in(bad);
  try {
    parse_tuples(in);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedRecord);
    std::string what = e.what();
    CHECK(what.find("line 2") != std::string::npos);
    CHECK(what.find("subject_text") != std::string::npos);
  }

  std::istringstream garbage("not json\n");
  CHECK(code_of([&] { parse_tuples(garbage); }) == ErrorCode::MalformedRecord);

  std::string empty_head = kRecord;
  empty_head.replace(empty_head.find(R"("object_head":"Tom")"), 18, R"("object_head":"")");
  std::istringstream in2(empty_head);
  CHECK(code_of([&] { parse_tuples(in2); }) == ErrorCode::MalformedRecord);

  std::string bad_kind = kRecord;
  bad_kind.replace(bad_kind.find(R"("SVO")"), 5, R"("SOV")");
  std::istringstream in3(bad_kind);
  CHECK(code_of([&] { parse_tuples(in3); }) == ErrorCode::MalformedRecord);
}

TEST_CASE("duplicate positions within a review are rejected") {
  std::istringstream in(std::string(kRecord) + "\n" + kRecord + "\n");
  try {
    parse_tuples(in);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicatePosition);
    CHECK(std::string(e.what()).find("r1") != std::string::npos);
  }
}

TEST_CASE("a missing tuple file is MissingInput") {
  CHECK(code_of([] { parse_tuples(std::string("/nonexistent/tuples.jsonl")); }) == ErrorCode::MissingInput);
}

TEST_CASE("tuples are sorted by position on load") {
  ReviewCorpus c;
  testutil::add(c, tuple("r", 5, "A", "meets", "B"));
  testutil::add(c, tuple("r", 2, "B", "meets", "C"));
  std::stringstream buf;
  write_tuples(c, buf);
  auto back = parse_tuples(buf);
  REQUIRE(back.reviews.at("r").size() == 2);
  CHECK(back.reviews.at("r")[0].position == 2);
  CHECK(back.reviews.at("r")[1].position == 5);
}

TEST_CASE("tuple serialisation round-trips") {
  ReviewCorpus c;
  auto t = tuple("r1", 0, "Snowball", "was", "humble", TupleKind::SVCOP, "Snowball was humble and a good leader.");
  testutil::add(c, t);
  auto u = tuple("r1", 1, "Snowball", "was", "a good leader", TupleKind::SVCOP, t.sentence_text);
  u.object_head = "leader";
  c.reviews["r1"].push_back(u);
  auto v = tuple("r2", 3, "Gandalf", "chose", "hobbit");
  v.relation_lemma = "choose";
  v.sentence_flags = {SentenceFlag::HYPOTHETICAL, SentenceFlag::INFINITIVE_RELATION};
  testutil::add(c, v);
  testutil::add(c, tuple("r2", 4, "\"Quoted\" name", "says", "caf\xc3\xa9", TupleKind::OTHER));

  std::stringstream tuples, texts;
  write_tuples(c, tuples);
  write_raw_texts(c, texts);
  auto back = parse_tuples(tuples);
  attach_raw_texts(back, texts);
  CHECK(back == c);
}

TEST_CASE("raw texts must cover every review") {
  ReviewCorpus c;
  testutil::add(c, tuple("r1", 0, "A", "meets", "B"));
  testutil::add(c, tuple("r2", 0, "A", "meets", "B"));
  std::istringstream texts(R"({"review_id":"r1","text":"hello"})");
  CHECK(code_of([&] { attach_raw_texts(c, texts); }) == ErrorCode::MalformedRecord);
}

TEST_CASE("stop entities default to I, we and author, case-insensitively") {
  auto s = StopEntityList::defaults();
  CHECK(s.contains("I"));
  CHECK(s.contains("We"));
  CHECK(s.contains("AUTHOR"));
  CHECK_FALSE(s.contains("Bilbo"));
}

TEST_CASE("hypothetical sentences match whole modal words") {
  CHECK(is_hypothetical_sentence("Bilbo would never leave."));
  CHECK(is_hypothetical_sentence("COULD he?"));
  CHECK(is_hypothetical_sentence("They should've run"));
  CHECK_FALSE(is_hypothetical_sentence("The wouldbe king shoulders it."));
}

TEST_CASE("filter_eligible_events drops ineligible tuples and keeps order") {
  ReviewCorpus c;
  auto hyp = tuple("r", 0, "Bilbo", "leaves", "Shire");
  hyp.sentence_flags.insert(SentenceFlag::HYPOTHETICAL);
  testutil::add(c, hyp);
  testutil::add(c, tuple("r", 1, "Bilbo", "meets", "Gandalf"));
  testutil::add(c, tuple("r", 2, "Bilbo", "fools", "bilbo"));
  testutil::add(c, tuple("r", 3, "I", "loved", "Bilbo"));
  auto inf = tuple("r", 4, "Gandalf", "to find", "Bilbo");
  inf.sentence_flags.insert(SentenceFlag::INFINITIVE_RELATION);
  testutil::add(c, inf);
  testutil::add(c, tuple("r", 5, "Gandalf", "could find", "Bilbo", TupleKind::SVO, "Gandalf could find Bilbo."));
  testutil::add(c, tuple("r", 6, "Thorin", "hires", "Bilbo"));
  testutil::add(c, tuple("r", 7, "Bilbo", "thanks", "Author"));

  auto f = filter_eligible_events(c, StopEntityList::defaults());
  const auto& kept = f.reviews.at("r");
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].position == 1);
  CHECK(kept[1].position == 6);
  CHECK(f.raw_texts == c.raw_texts);
}

TEST_CASE("filtering is idempotent and order preserving on random corpora") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> heads{"Bilbo", "Gandalf", "I", "we", "Thorin", "author"};
  for (int trial = 0; trial < 50; ++trial) {
    ReviewCorpus c;
    for (std::uint32_t p = 0; p < 30; ++p) {
      auto t = tuple("r" + std::to_string(rng() % 3), p, heads[rng() % heads.size()], "meets",
                     heads[rng() % heads.size()]);
      if (rng() % 7 == 0) t.sentence_flags.insert(SentenceFlag::HYPOTHETICAL);
      if (rng() % 9 == 0) t.sentence_text = "They would meet.";
      testutil::add(c, t);
    }
    auto once = filter_eligible_events(c, StopEntityList::defaults());
    CHECK(filter_eligible_events(once, StopEntityList::defaults()) == once);
    for (const auto& [id, ts] : once.reviews) {
      for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i - 1].position < ts[i].position);
    }
  }
}

TEST_CASE("single-word relations are lemmatised") {
  CHECK(lemmatize_word("kills") == "kill");
  CHECK(lemmatize_word("defends") == "defend");
  CHECK(lemmatize_word("marries") == "marry");
  CHECK(lemmatize_word("watches") == "watch");
  CHECK(lemmatize_word("misses") == "miss");
  CHECK(lemmatize_word("loved") == "love");
  CHECK(lemmatize_word("stopped") == "stop");
  CHECK(lemmatize_word("hunting") == "hunt");
  CHECK(lemmatize_word("agreed") == "agree");
  CHECK(lemmatize_word("carried") == "carry");
  CHECK(lemmatize_word("is") == "is");
  CHECK(lemmatize_word("Falls") == "fall");

  auto t = tuple("r", 0, "A", "kills", "B");
  CHECK(lemmatize_relation(t).relation_lemma == "kill");
  auto multi = tuple("r", 0, "A", "was defending", "B");
  CHECK_FALSE(lemmatize_relation(multi).relation_lemma.has_value());
  CHECK(effective_relation(lemmatize_relation(multi)) == "was defending");
  auto given = tuple("r", 0, "Gandalf", "chose", "hobbit");
  given.relation_lemma = "choose";
  CHECK(lemmatize_relation(given).relation_lemma == "choose");
  CHECK(effective_relation(given) == "choose");
}

TEST_CASE("extractor output fixture passes ingest and is fully embedded") {
  auto c = parse_tuples(testutil::fixture("extractor/tuples.jsonl"));
  attach_raw_texts(c, testutil::fixture("extractor/reviews.jsonl"));
  CHECK(c.reviews.size() == 4);
  CHECK(c.tuple_count() == 9);

  const auto& snowball = c.reviews.at("rev-001");
  REQUIRE(snowball.size() == 3);
  CHECK(snowball[0].kind == TupleKind::SVCOP);
  CHECK(snowball[0].object_text == "humble");
  CHECK(snowball[1].kind == TupleKind::SVCOP);
  CHECK(snowball[1].object_text == "a good leader");
  CHECK(snowball[0].sentence_text == snowball[1].sentence_text);

  const auto& gandalf = c.reviews.at("rev-002")[0];
  CHECK(gandalf.subject_head == "Gandalf");
  CHECK(gandalf.relation_text == "chose");
  CHECK(gandalf.object_head == "hobbit");
  CHECK(c.reviews.at("rev-002")[1].sentence_flags.count(SentenceFlag::HYPOTHETICAL));
  CHECK(c.reviews.at("rev-005")[1].sentence_flags.count(SentenceFlag::INFINITIVE_RELATION));

  auto table = EmbeddingTable::read(testutil::fixture("extractor/embeddings.tsv"));
  CHECK(table.dim() == 768);
  CHECK(table.model() == "fixture-encoder-768");
  for (const auto& [id, ts] : c.reviews) {
    for (const auto& t : ts) {
      CHECK_MESSAGE(table.contains(t.kind == TupleKind::SVCOP ? t.object_text : t.relation_text), t.relation_text);
    }
  }

  auto kept = filter_eligible_events(c, StopEntityList::defaults());
  CHECK(kept.tuple_count() == 7);
}
