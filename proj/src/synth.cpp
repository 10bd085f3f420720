#include "storynet/synth.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>
#include <set>

#include "storynet/embedstore.hpp"
#include "storynet/error.hpp"
#include "storynet/ingest.hpp"
#include "storynet/text.hpp"

namespace storynet {

using nlohmann::json;

namespace {

using Rng = std::mt19937_64;

const char* const kNames[] = {"Aldric", "Brenna",  "Cedric", "Dorian", "Elowen", "Fenwick", "Galen",  "Hestia",
                              "Isolde", "Jasper",  "Kestrel", "Lorcan", "Maren",  "Niall",   "Orla",   "Percival",
                              "Quilla", "Rowan",   "Seren",  "Tamsin", "Ulric",  "Vesna",   "Wystan", "Yselda"};

const char* const kVerbs[] = {"betrays", "rescues",  "follows",  "warns",    "meets",    "trains",   "robs",
                              "guides",  "challenges", "frees",  "hunts",    "marries",  "deceives", "crowns",
                              "exiles",  "heals",    "summons",  "defeats",  "trusts",   "visits",   "shelters",
                              "accuses", "forgives", "captures", "teaches",  "abandons", "protects", "mocks",
                              "recruits", "poisons", "befriends", "hides",   "tricks",   "avenges",  "courts",
                              "banishes", "obeys",   "pursues",  "outwits",  "saves"};

const char* const kTraits[] = {"brave",   "loyal",    "cunning", "gentle",     "stubborn", "reckless", "wise",
                               "naive",   "ambitious", "cruel",  "generous",   "humble",   "proud",    "anxious",
                               "clever",  "honest",   "jealous", "curious",    "patient",  "bitter",   "charming",
                               "fearless", "greedy",  "kind",    "lonely",     "mysterious", "noble",  "quiet",
                               "ruthless", "selfish", "tragic",  "witty",      "tender",   "vain",     "stoic",
                               "fierce",  "timid",    "hopeful", "grim",       "playful"};

const char* const kTraitForms[] = {"{}",           "truly {}",    "{} at heart",  "a {} soul",
                                   "deeply {}",    "remarkably {}", "{} to the core", "{} beyond measure"};

const char* const kStray[] = {"unforgettable", "a bit much", "the uncle of someone", "unbelievably lucky",
                              "nostalgic",     "hard to read", "everywhere",         "a real piece of work"};

constexpr int kVerbCount = static_cast<int>(std::size(kVerbs));
constexpr int kTraitCount = static_cast<int>(std::size(kTraits));

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::string lower(std::string s) { return to_lower(s); }

std::string fill(const char* form, const std::string& word) {
  std::string f = form;
  auto pos = f.find("{}");
  return f.replace(pos, 2, word);
}

// Counts of linear extensions over every downward-closed prefix.
class ExtensionSampler {
public:
  explicit ExtensionSampler(const GroundTruth& gt) : n_(gt.events), preds_(static_cast<std::size_t>(gt.events), 0) {
    for (const auto& [u, v] : gt.edges) preds_[static_cast<std::size_t>(v)] |= (1u << u);
    if (n_ > kExactLimit) return;
    const std::uint32_t full = n_ == 32 ? ~0u : ((1u << n_) - 1);
    counts_.assign(static_cast<std::size_t>(full) + 1, 0.0);
    counts_[full] = 1.0;
    for (std::int64_t mask = static_cast<std::int64_t>(full) - 1; mask >= 0; --mask) {
      double total = 0;
      for (int v = 0; v < n_; ++v) {
        if (available(static_cast<std::uint32_t>(mask), v)) total += counts_[static_cast<std::uint32_t>(mask) | (1u << v)];
      }
      counts_[static_cast<std::size_t>(mask)] = total;
    }
  }

  std::vector<int> sample(Rng& rng) const {
    std::vector<int> order;
    std::uint32_t mask = 0;
    for (int step = 0; step < n_; ++step) {
      std::vector<int> ready;
      for (int v = 0; v < n_; ++v) {
        if (available(mask, v)) ready.push_back(v);
      }
      int pick = ready.front();
      if (n_ <= kExactLimit) {
        double r = uniform01(rng) * counts_[mask];
        for (int v : ready) {
          pick = v;
          r -= counts_[mask | (1u << v)];
          if (r < 0) break;
        }
      } else {
        pick = ready[std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng)];
      }
      order.push_back(pick);
      mask |= (1u << pick);
    }
    return order;
  }

private:
  static constexpr int kExactLimit = 20;

  bool available(std::uint32_t mask, int v) const {
    return !(mask & (1u << v)) && (preds_[static_cast<std::size_t>(v)] & ~mask) == 0;
  }

  int n_;
  std::vector<std::uint32_t> preds_;
  std::vector<double> counts_;
};

struct SyntheticEvent {
  std::string subject;
  std::string verb;
  std::string object;
};

std::vector<SyntheticEvent> event_surface(const GroundTruth& gt) {
  const auto c = static_cast<int>(gt.characters.size());
  std::vector<SyntheticEvent> out;
  for (int k = 0; k < gt.events; ++k) {
    int s = k % c;
    int o = (k + 1 + k / c) % c;
    if (o == s) o = (o + 1) % c;
    std::string verb = kVerbs[k % kVerbCount];
    if (k >= kVerbCount) verb += " again" + std::to_string(k / kVerbCount);
    out.push_back({gt.characters[static_cast<std::size_t>(s)], verb, gt.characters[static_cast<std::size_t>(o)]});
  }
  return out;
}

Vector random_direction(Rng& rng, int dim, double norm) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v.normalized() * norm;
}

}  // namespace

std::vector<std::vector<bool>> GroundTruth::precedence() const {
  const auto n = static_cast<std::size_t>(events);
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (const auto& [u, v] : edges) reach[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = true;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = true;
      }
    }
  }
  return reach;
}

std::vector<std::pair<int, int>> GroundTruth::reduced_edges() const {
  auto reach = precedence();
  std::vector<std::pair<int, int>> out;
  for (const auto& [u, v] : edges) {
    bool shortcut = false;
    for (int w = 0; w < events && !shortcut; ++w) {
      shortcut = w != u && w != v && reach[static_cast<std::size_t>(u)][static_cast<std::size_t>(w)] &&
                 reach[static_cast<std::size_t>(w)][static_cast<std::size_t>(v)];
    }
    if (!shortcut) out.emplace_back(u, v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GroundTruth random_ground_truth(int events, double edge_p, std::uint64_t seed) {
  if (events < 0 || events > 31) throw Error(ErrorCode::ConfigConflict, "synthetic DAGs support 0..31 events");
  Rng rng(seed);
  GroundTruth gt;
  gt.events = events;
  gt.seed = seed;
  std::vector<int> hidden(static_cast<std::size_t>(events));
  std::iota(hidden.begin(), hidden.end(), 0);
  std::shuffle(hidden.begin(), hidden.end(), rng);
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    for (std::size_t j = i + 1; j < hidden.size(); ++j) {
      if (uniform01(rng) < edge_p) gt.edges.emplace_back(hidden[i], hidden[j]);
    }
  }
  std::sort(gt.edges.begin(), gt.edges.end());
  int chars = std::clamp((events + 1) / 2, 3, static_cast<int>(std::size(kNames)));
  for (int c = 0; c < chars; ++c) gt.characters.emplace_back(kNames[c]);
  return gt;
}

std::vector<int> sample_linear_extension(const GroundTruth& gt, std::uint64_t seed) {
  Rng rng(seed);
  return ExtensionSampler(gt).sample(rng);
}

ReviewSequences generate_reviews(const GroundTruth& gt, int n, double drop_p, double swap_p, std::uint64_t seed) {
  if (drop_p < 0 || drop_p > 1 || swap_p < 0 || swap_p >= 1) {
    throw Error(ErrorCode::ConfigConflict, "drop_p must be in [0,1] and swap_p in [0,1)");
  }
  ExtensionSampler sampler(gt);
  Rng rng(seed);
  ReviewSequences out;
  const int width = std::max(4, static_cast<int>(std::to_string(std::max(n, 1)).size()));
  for (int r = 0; r < n; ++r) {
    auto order = sampler.sample(rng);
    std::vector<int> kept;
    for (int e : order) {
      if (uniform01(rng) >= drop_p) kept.push_back(e);
    }
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) {
      if (uniform01(rng) < swap_p) std::swap(kept[i], kept[i + 1]);
    }
    auto id = std::to_string(r);
    out["r" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(id.size(), width), '0') + id] =
        std::move(kept);
  }
  return out;
}

EdgeAccuracy edge_accuracy(const SequenceGraph& recovered, const GroundTruth& gt) {
  for (int node : recovered.nodes) {
    if (node >= gt.events || (node < 0 && node != SequenceGraph::kStart && node != SequenceGraph::kTerminate)) {
      throw Error(ErrorCode::VocabularyMismatch, "recovered event " + std::to_string(node) + " not in ground truth");
    }
  }
  auto reach = gt.precedence();
  auto truth = gt.reduced_edges();
  std::set<std::pair<int, int>> truth_set(truth.begin(), truth.end());

  std::size_t total = 0, hits = 0, consistent = 0, strict = 0;
  for (const auto& [u, v] : recovered.edges()) {
    if (u < 0 || v < 0) continue;
    if (u >= gt.events || v >= gt.events) {
      throw Error(ErrorCode::VocabularyMismatch, "edge " + std::to_string(u) + "->" + std::to_string(v));
    }
    ++total;
    if (truth_set.count({u, v})) ++hits;
    if (!reach[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)]) ++consistent;
    if (reach[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) ++strict;
  }
  EdgeAccuracy acc;
  if (total > 0) {
    acc.precision = static_cast<double>(hits) / static_cast<double>(total);
    acc.order_accuracy = static_cast<double>(consistent) / static_cast<double>(total);
    acc.strict_order_accuracy = static_cast<double>(strict) / static_cast<double>(total);
  }
  acc.recall = truth.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  return acc;
}

void write_synthetic_corpus(const GroundTruth& gt, const ReviewSequences& reviews, const std::string& dir,
                            std::uint64_t seed, const SynthCorpusOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Rng rng(seed ^ 0x5eedc0ffeeULL);
  const auto surface = event_surface(gt);
  const auto chars = static_cast<int>(gt.characters.size());

  EmbeddingTable table(options.dim);
  table.set_model("synthetic-gaussian-v1");
  auto embed_phrase = [&](const std::string& phrase, const Vector& centre, double jitter) {
    if (table.contains(phrase)) return;
    table.insert(phrase, centre + random_direction(rng, options.dim, jitter));
  };
  for (const auto& e : surface) embed_phrase(e.verb, random_direction(rng, options.dim, 10.0), 0.0);
  for (const char* verb : {"portrays", "loved"}) embed_phrase(verb, random_direction(rng, options.dim, 10.0), 0.0);
  for (int t = 0; t < kTraitCount; ++t) {
    Vector centre = random_direction(rng, options.dim, 10.0);
    for (const char* form : kTraitForms) embed_phrase(fill(form, kTraits[t]), centre, 0.5);
  }
  for (const char* stray : kStray) embed_phrase(stray, random_direction(rng, options.dim, 10.0), 0.0);

  ReviewCorpus corpus;
  for (const auto& [review, events] : reviews) {
    std::vector<RelationTuple> tuples;
    auto make = [&](const std::string& subject, const std::string& verb, const std::string& object, TupleKind kind,
                    const std::string& sentence) {
      RelationTuple t;
      t.review_id = review;
      t.subject_text = subject;
      t.subject_head = subject;
      t.relation_text = verb;
      if (verb.find(' ') == std::string::npos) t.relation_lemma = lemmatize_word(verb);
      t.object_text = object;
      t.object_head = kind == TupleKind::SVCOP ? tokenize(object).back() : object;
      t.kind = kind;
      t.sentence_text = sentence;
      return t;
    };
    for (int e : events) {
      const auto& s = surface[static_cast<std::size_t>(e)];
      tuples.push_back(make(s.subject, s.verb, s.object, TupleKind::SVO, s.subject + " " + s.verb + " " + s.object + "."));
    }
    auto insert_at_random = [&](RelationTuple t) {
      auto pos = std::uniform_int_distribution<std::size_t>(0, tuples.size())(rng);
      tuples.insert(tuples.begin() + static_cast<std::ptrdiff_t>(pos), std::move(t));
    };
    int impressions = static_cast<int>(options.impression_rate);
    if (uniform01(rng) < options.impression_rate - impressions) ++impressions;
    for (int i = 0; i < impressions; ++i) {
      int c = std::uniform_int_distribution<int>(0, chars - 1)(rng);
      std::string phrase;
      if (uniform01(rng) < 0.05) {
        phrase = kStray[std::uniform_int_distribution<std::size_t>(0, std::size(kStray) - 1)(rng)];
      } else {
        int g = std::uniform_int_distribution<int>(0, options.traits_per_character - 1)(rng);
        const char* trait = kTraits[(c * options.traits_per_character + g) % kTraitCount];
        const char* form = kTraitForms[std::uniform_int_distribution<std::size_t>(0, std::size(kTraitForms) - 1)(rng)];
        phrase = fill(form, trait);
      }
      const auto& name = gt.characters[static_cast<std::size_t>(c)];
      insert_at_random(make(name, "was", phrase, TupleKind::SVCOP, name + " was " + phrase + "."));
    }
    if (uniform01(rng) < options.narrator_rate) {
      const auto& name = gt.characters[std::uniform_int_distribution<std::size_t>(0, gt.characters.size() - 1)(rng)];
      insert_at_random(make("storyteller", "portrays", name, TupleKind::SVO, "The storyteller portrays " + name + "."));
    }
    if (!events.empty() && uniform01(rng) < options.hypothetical_rate) {
      const auto& s = surface[static_cast<std::size_t>(events.front())];
      auto t = make(s.subject, s.verb, s.object, TupleKind::SVO, s.subject + " would have " + s.verb + " " + s.object + ".");
      t.sentence_flags.insert(SentenceFlag::HYPOTHETICAL);
      insert_at_random(std::move(t));
    }
    if (uniform01(rng) < 0.2) insert_at_random(make("I", "loved", "book", TupleKind::SVO, "I loved this book."));

    std::string text;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      tuples[i].position = static_cast<std::uint32_t>(i);
      if (!text.empty()) text += ' ';
      text += tuples[i].sentence_text;
    }
    corpus.raw_texts[review] = text;
    corpus.reviews[review] = std::move(tuples);
  }

  auto open = [&](const std::string& name) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::MissingInput, (fs::path(dir) / name).string());
    return out;
  };
  {
    auto out = open("tuples.jsonl");
    write_tuples(corpus, out);
  }
  {
    auto out = open("reviews.jsonl");
    write_raw_texts(corpus, out);
  }
  {
    auto out = open("characters.tsv");
    for (const auto& name : gt.characters) out << lower(name) << '\t' << lower(name) << '\t' << name << '\n';
  }
  {
    auto out = open("embeddings.tsv");
    table.write(out);
  }
  {
    json events = json::array();
    for (int k = 0; k < gt.events; ++k) {
      const auto& s = surface[static_cast<std::size_t>(k)];
      std::string lemma = s.verb.find(' ') == std::string::npos ? lemmatize_word(s.verb) : s.verb;
      events.push_back({{"id", k}, {"subject", lower(s.subject)}, {"relation", lemma}, {"object", lower(s.object)}});
    }
    json doc{{"events", events}, {"edges", gt.edges}, {"seed", gt.seed}, {"characters", gt.characters}};
    auto out = open("ground_truth.json");
    out << doc.dump(2) << '\n';
  }
}

}  // namespace storynet
