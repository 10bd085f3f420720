#pragma once

#include <filesystem>
#include <functional>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "storynet/error.hpp"
#include "storynet/ingest.hpp"

namespace testutil {

// Error code thrown by `fn`; nullopt when it returns normally.
inline std::optional<storynet::ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const storynet::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::string fixture(const std::string& name) { return std::string(STORYNET_FIXTURES) + "/" + name; }

inline storynet::RelationTuple tuple(const std::string& review, std::uint32_t pos, const std::string& subject,
                                     const std::string& relation, const std::string& object,
                                     storynet::TupleKind kind = storynet::TupleKind::SVO,
                                     const std::string& sentence = {}) {
  storynet::RelationTuple t;
  t.review_id = review;
  t.position = pos;
  t.subject_text = subject;
  t.subject_head = subject;
  t.relation_text = relation;
  t.object_text = object;
  t.object_head = object;
  t.kind = kind;
  t.sentence_text = sentence.empty() ? subject + " " + relation + " " + object + "." : sentence;
  return t;
}

inline void add(storynet::ReviewCorpus& c, storynet::RelationTuple t) {
  auto& text = c.raw_texts[t.review_id];
  if (!text.empty()) text += ' ';
  text += t.sentence_text;
  c.reviews[t.review_id].push_back(std::move(t));
}

// Candidate "tolkien" has 6 tuples with each of three characters; "jackson"
// has 5 with each of four. One tuple per review.
inline storynet::ReviewCorpus expansion_corpus() {
  storynet::ReviewCorpus c;
  int review = 0;
  auto emit = [&](const std::string& s, const std::string& r, const std::string& o, int times) {
    for (int i = 0; i < times; ++i) add(c, tuple("r" + std::to_string(review++), 0, s, r, o));
  };
  const char* verbs[] = {"to masterfully develop", "provides", "knocked", "introduced", "provides", "wrote"};
  for (const char* ch : {"Bilbo", "Gandalf", "Thorin"}) {
    for (const char* v : verbs) emit("Tolkien", v, ch, 1);
  }
  for (const char* ch : {"Bilbo", "Gandalf", "Thorin", "Smaug"}) emit("Jackson", "filmed", ch, 5);
  emit("Bilbo", "follows", "Gandalf", 3);
  return c;
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() / ("storynet-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

}  // namespace testutil
