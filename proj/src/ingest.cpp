#include "storynet/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "storynet/error.hpp"

namespace storynet {

using nlohmann::json;

namespace {

struct Diagnostics {
  std::vector<std::string> items;

  void add(std::size_t line, const std::string& field, const std::string& problem) {
    items.push_back("line " + std::to_string(line) + ", field '" + field + "': " + problem);
  }

  void raise_if_any(ErrorCode code) const {
    if (items.empty()) return;
    std::string msg;
    for (const auto& item : items) {
      if (!msg.empty()) msg += "; ";
      msg += item;
    }
    throw Error(code, msg);
  }
};

const char* const kStringFields[] = {"review_id",   "subject_text", "subject_head",
                                     "relation_text", "object_text", "object_head",
                                     "sentence_text"};

std::optional<TupleKind> parse_kind(const std::string& s) {
  if (s == "SVO") return TupleKind::SVO;
  if (s == "SVCOP") return TupleKind::SVCOP;
  if (s == "OTHER") return TupleKind::OTHER;
  return std::nullopt;
}

std::optional<SentenceFlag> parse_flag(const std::string& s) {
  if (s == "HYPOTHETICAL") return SentenceFlag::HYPOTHETICAL;
  if (s == "INFINITIVE_RELATION") return SentenceFlag::INFINITIVE_RELATION;
  return std::nullopt;
}

std::optional<RelationTuple> parse_record(const json& rec, std::size_t line, Diagnostics& diag) {
  if (!rec.is_object()) {
    diag.add(line, "<record>", "not a JSON object");
    return std::nullopt;
  }
  const auto before = diag.items.size();
  RelationTuple t;
  std::map<std::string, std::string> strings;
  for (const char* field : kStringFields) {
    auto it = rec.find(field);
    if (it == rec.end() || !it->is_string()) {
      diag.add(line, field, "missing or not a string");
      continue;
    }
    strings[field] = it->get<std::string>();
  }
  if (auto it = rec.find("position"); it == rec.end() || !it->is_number_integer() ||
                                      it->get<long long>() < 0) {
    diag.add(line, "position", "missing or not a nonnegative integer");
  } else {
    t.position = static_cast<std::uint32_t>(it->get<long long>());
  }
  if (auto it = rec.find("relation_lemma"); it != rec.end() && !it->is_null()) {
    if (!it->is_string()) {
      diag.add(line, "relation_lemma", "not a string");
    } else {
      t.relation_lemma = it->get<std::string>();
    }
  }
  if (auto it = rec.find("kind"); it == rec.end() || !it->is_string() ||
                                  !parse_kind(it->get<std::string>())) {
    diag.add(line, "kind", "expected one of SVO, SVCOP, OTHER");
  } else {
    t.kind = *parse_kind(it->get<std::string>());
  }
  if (auto it = rec.find("sentence_flags"); it == rec.end() || !it->is_array()) {
    diag.add(line, "sentence_flags", "missing or not an array");
  } else {
    for (const auto& f : *it) {
      auto flag = f.is_string() ? parse_flag(f.get<std::string>()) : std::nullopt;
      if (!flag) {
        diag.add(line, "sentence_flags", "unknown flag " + f.dump());
        continue;
      }
      t.sentence_flags.insert(*flag);
    }
  }
  if (diag.items.size() != before) return std::nullopt;

  t.review_id = strings["review_id"];
  t.subject_text = strings["subject_text"];
  t.subject_head = strings["subject_head"];
  t.relation_text = strings["relation_text"];
  t.object_text = strings["object_text"];
  t.object_head = strings["object_head"];
  t.sentence_text = strings["sentence_text"];
  if (trim(t.subject_head).empty()) diag.add(line, "subject_head", "empty");
  if (trim(t.object_head).empty()) diag.add(line, "object_head", "empty");
  if (trim(t.relation_text).empty()) diag.add(line, "relation_text", "empty");
  if (diag.items.size() != before) return std::nullopt;
  return t;
}

json to_json(const RelationTuple& t) {
  json flags = json::array();
  for (auto f : t.sentence_flags) flags.push_back(to_string(f));
  return json{{"review_id", t.review_id},
              {"position", t.position},
              {"subject_text", t.subject_text},
              {"subject_head", t.subject_head},
              {"relation_text", t.relation_text},
              {"relation_lemma", t.relation_lemma ? json(*t.relation_lemma) : json(nullptr)},
              {"object_text", t.object_text},
              {"object_head", t.object_head},
              {"kind", to_string(t.kind)},
              {"sentence_flags", flags},
              {"sentence_text", t.sentence_text}};
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, path);
  return in;
}

bool is_vowel(const std::string& w, std::size_t i) {
  switch (w[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return true;
    case 'y': return i > 0 && !is_vowel(w, i - 1);
    default: return false;
  }
}

bool has_vowel(const std::string& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_vowel(w, i)) return true;
  }
  return false;
}

// Number of vowel-consonant sequences, as in the Porter stemmer.
int measure(const std::string& w) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    bool v = is_vowel(w, i);
    if (prev_vowel && !v) ++m;
    prev_vowel = v;
  }
  return m;
}

bool ends_cvc(const std::string& w) {
  auto n = w.size();
  if (n < 3) return false;
  char last = w[n - 1];
  return !is_vowel(w, n - 3) && is_vowel(w, n - 2) && !is_vowel(w, n - 1) && last != 'w' &&
         last != 'x' && last != 'y';
}

bool ends_with(const std::string& w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string restore_stem(std::string stem) {
  auto n = stem.size();
  if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz")) return stem + "e";
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem, n - 1) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
  return stem;
}

}  // namespace

std::string to_string(TupleKind k) {
  switch (k) {
    case TupleKind::SVO: return "SVO";
    case TupleKind::SVCOP: return "SVCOP";
    case TupleKind::OTHER: return "OTHER";
  }
  return "OTHER";
}

std::string to_string(SentenceFlag f) {
  return f == SentenceFlag::HYPOTHETICAL ? "HYPOTHETICAL" : "INFINITIVE_RELATION";
}

std::string effective_relation(const RelationTuple& t) {
  auto text = trim(t.relation_text);
  bool single = text.find_first_of(" \t") == std::string::npos;
  if (single && t.relation_lemma && !t.relation_lemma->empty()) return *t.relation_lemma;
  return text;
}

std::size_t ReviewCorpus::tuple_count() const {
  std::size_t n = 0;
  for (const auto& [id, tuples] : reviews) n += tuples.size();
  return n;
}

StopEntityList StopEntityList::defaults() { return StopEntityList{{"i", "we", "author"}}; }

StopEntityList StopEntityList::from_file(const std::string& path) {
  return StopEntityList{read_word_list(path)};
}

bool StopEntityList::contains(std::string_view mention) const {
  return entries.count(to_lower(trim(mention))) != 0;
}

ReviewCorpus parse_tuples(std::istream& in) {
  ReviewCorpus corpus;
  Diagnostics malformed;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      malformed.add(lineno, "<record>", std::string("invalid JSON: ") + e.what());
      continue;
    }
    if (auto t = parse_record(rec, lineno, malformed)) {
      corpus.reviews[t->review_id].push_back(std::move(*t));
    }
  }
  malformed.raise_if_any(ErrorCode::MalformedRecord);

  Diagnostics duplicates;
  for (auto& [id, tuples] : corpus.reviews) {
    std::stable_sort(tuples.begin(), tuples.end(),
                     [](const auto& a, const auto& b) { return a.position < b.position; });
    for (std::size_t i = 1; i < tuples.size(); ++i) {
      if (tuples[i].position == tuples[i - 1].position) {
        duplicates.items.push_back("review '" + id + "' position " +
                                   std::to_string(tuples[i].position));
      }
    }
    std::string text;
    std::set<std::string> seen;
    for (const auto& t : tuples) {
      if (t.sentence_text.empty() || !seen.insert(t.sentence_text).second) continue;
      if (!text.empty()) text += ' ';
      text += t.sentence_text;
    }
    corpus.raw_texts[id] = std::move(text);
  }
  duplicates.raise_if_any(ErrorCode::DuplicatePosition);
  return corpus;
}

ReviewCorpus parse_tuples(const std::string& path) {
  auto in = open_input(path);
  return parse_tuples(in);
}

void attach_raw_texts(ReviewCorpus& corpus, std::istream& in) {
  std::map<std::string, std::string> texts;
  Diagnostics diag;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      diag.add(lineno, "<record>", "invalid JSON object");
      continue;
    }
    auto id = rec.find("review_id");
    auto text = rec.find("text");
    if (id == rec.end() || !id->is_string()) {
      diag.add(lineno, "review_id", "missing or not a string");
      continue;
    }
    if (text == rec.end() || !text->is_string()) {
      diag.add(lineno, "text", "missing or not a string");
      continue;
    }
    texts[id->get<std::string>()] = text->get<std::string>();
  }
  for (const auto& [id, tuples] : corpus.reviews) {
    if (!texts.count(id)) diag.items.push_back("review '" + id + "' has tuples but no raw text");
  }
  diag.raise_if_any(ErrorCode::MalformedRecord);
  corpus.raw_texts = std::move(texts);
}

void attach_raw_texts(ReviewCorpus& corpus, const std::string& path) {
  auto in = open_input(path);
  attach_raw_texts(corpus, in);
}

void write_tuples(const ReviewCorpus& corpus, std::ostream& out) {
  for (const auto& [id, tuples] : corpus.reviews) {
    for (const auto& t : tuples) out << to_json(t).dump() << '\n';
  }
}

void write_raw_texts(const ReviewCorpus& corpus, std::ostream& out) {
  for (const auto& [id, text] : corpus.raw_texts) {
    out << json{{"review_id", id}, {"text", text}}.dump() << '\n';
  }
}

bool is_hypothetical_sentence(std::string_view sentence) {
  // Any non-alphanumeric byte is a boundary here, so "should've" matches.
  std::string word;
  auto modal = [&] { return word == "would" || word == "could" || word == "should"; };
  for (char ch : sentence) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
      continue;
    }
    if (modal()) return true;
    word.clear();
  }
  return modal();
}

ReviewCorpus filter_eligible_events(const ReviewCorpus& corpus, const StopEntityList& stops) {
  ReviewCorpus out;
  out.raw_texts = corpus.raw_texts;
  for (const auto& [id, tuples] : corpus.reviews) {
    auto& kept = out.reviews[id];
    for (const auto& t : tuples) {
      if (t.has_flag(SentenceFlag::HYPOTHETICAL) || is_hypothetical_sentence(t.sentence_text))
        continue;
      if (t.has_flag(SentenceFlag::INFINITIVE_RELATION)) continue;
      if (to_lower(trim(t.subject_head)) == to_lower(trim(t.object_head))) continue;
      if (stops.contains(t.subject_head) || stops.contains(t.object_head)) continue;
      kept.push_back(t);
    }
  }
  return out;
}

std::string lemmatize_word(std::string_view word) {
  std::string w = to_lower(trim(word));
  if (w.size() <= 3) return w;

  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes") || ends_with(w, "zes"))
    return w.substr(0, w.size() - 2);
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return w;
  if (ends_with(w, "s")) return w.substr(0, w.size() - 1);

  if (ends_with(w, "ied") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "eed")) return w.substr(0, w.size() - 1);
  if (ends_with(w, "ed")) {
    auto stem = w.substr(0, w.size() - 2);
    return has_vowel(stem) ? restore_stem(stem) : w;
  }
  if (ends_with(w, "ing")) {
    auto stem = w.substr(0, w.size() - 3);
    return has_vowel(stem) ? restore_stem(stem) : w;
  }
  return w;
}

RelationTuple lemmatize_relation(RelationTuple t) {
  auto text = trim(t.relation_text);
  if (text.find_first_of(" \t") != std::string::npos) return t;
  if (!t.relation_lemma || t.relation_lemma->empty()) t.relation_lemma = lemmatize_word(text);
  return t;
}

ReviewCorpus lemmatize_corpus(ReviewCorpus corpus) {
  for (auto& [id, tuples] : corpus.reviews) {
    for (auto& t : tuples) t = lemmatize_relation(std::move(t));
  }
  return corpus;
}

}  // namespace storynet
