#include "storynet/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "storynet/error.hpp"
#include "storynet/storygraph.hpp"
#include "storynet/synth.hpp"

namespace storynet {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
void assign(const json& value, T& field, const std::string& where) {
  try {
    field = value.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ConfigConflict, where + ": wrong type (" + value.dump() + ")");
  }
}

template <typename T>
void assign(const json& value, std::optional<T>& field, const std::string& where) {
  if (value.is_null()) {
    field.reset();
    return;
  }
  T v{};
  assign(value, v, where);
  field = v;
}

using Setter = std::function<void(const json&, const std::string&)>;

template <typename T>
Setter bind(T& field) {
  return [&field](const json& v, const std::string& where) { assign(v, field, where); };
}

std::map<std::string, std::map<std::string, Setter>> setters(PipelineConfig& c) {
  return {
      {"paths",
       {{"out_dir", bind(c.paths.out_dir)},
        {"tuples", bind(c.paths.tuples)},
        {"reviews", bind(c.paths.reviews)},
        {"stop_entities", bind(c.paths.stop_entities)},
        {"embeddings", bind(c.paths.embeddings)},
        {"characters", bind(c.paths.characters)},
        {"exclude_clusters", bind(c.paths.exclude_clusters)},
        {"stopwords", bind(c.paths.stopwords)},
        {"labels", bind(c.paths.labels)},
        {"dot", bind(c.paths.dot)},
        {"graph_out", bind(c.paths.graph_out)},
        {"plot", bind(c.paths.plot)}}},
      {"actants",
       {{"min_cluster_size", bind(c.actants.min_cluster_size)},
        {"eps", bind(c.actants.eps)},
        {"merge_threshold", bind(c.actants.merge_threshold)},
        {"emg_threshold", bind(c.actants.emg_threshold)}}},
      {"storygraph",
       {{"top_k", bind(c.storygraph.top_k)},
        {"min_edge_support", bind(c.storygraph.min_edge_support)},
        {"min_degree", bind(c.storygraph.min_degree)}}},
      {"rev2seq",
       {{"pairs", bind(c.rev2seq.pairs)},
        {"per_review_dedup", bind(c.rev2seq.per_review_dedup)},
        {"start_const", bind(c.rev2seq.start_const)},
        {"term_const", bind(c.rev2seq.term_const)}}},
      {"sent2imp",
       {{"min_cluster_size", bind(c.sent2imp.min_cluster_size)},
        {"eps", bind(c.sent2imp.eps)},
        {"skew_threshold", bind(c.sent2imp.skew_threshold)},
        {"mean_threshold", bind(c.sent2imp.mean_threshold)},
        {"variance_threshold", bind(c.sent2imp.variance_threshold)},
        {"pca_components", bind(c.sent2imp.pca_components)},
        {"bins", bind(c.sent2imp.bins)},
        {"kernel_width", bind(c.sent2imp.kernel_width)},
        {"character", bind(c.sent2imp.character)},
        {"a", bind(c.sent2imp.a)},
        {"b", bind(c.sent2imp.b)}}},
      {"synth",
       {{"events", bind(c.synth.events)},
        {"reviews", bind(c.synth.reviews)},
        {"drop", bind(c.synth.drop)},
        {"swap", bind(c.synth.swap)},
        {"edge_p", bind(c.synth.edge_p)},
        {"seed", bind(c.synth.seed)}}},
  };
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ConfigConflict, what);
}

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

fs::path out_path(const PipelineConfig& cfg, const char* name) { return fs::path(cfg.paths.out_dir) / name; }

std::string existing(const std::string& path, const std::string& what) {
  if (path.empty()) throw Error(ErrorCode::MissingInput, what + " not configured");
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::MissingInput, path);
  return path;
}

std::string existing(const fs::path& path) { return existing(path.string(), path.string()); }

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingInput, path);
  return in;
}

// Writes `body` to `path` only once it has been produced in full.
void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream buf;
  body(buf);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingInput, "cannot write " + path.string());
  out << buf.str();
}

WordSet stopwords_for(const PipelineConfig& cfg) {
  if (cfg.paths.stopwords.empty()) return default_stopwords();
  return read_word_list(existing(cfg.paths.stopwords, "stopword list"));
}

StopEntityList stops_for(const PipelineConfig& cfg) {
  if (cfg.paths.stop_entities.empty()) return StopEntityList::defaults();
  return StopEntityList::from_file(existing(cfg.paths.stop_entities, "stop-entity list"));
}

EmbeddingTable embeddings_for(const PipelineConfig& cfg) {
  return EmbeddingTable::read(existing(cfg.paths.embeddings, "embedding file (--embeddings)"));
}

ReviewCorpus read_corpus(const fs::path& tuples, const fs::path& reviews) {
  auto corpus = parse_tuples(existing(tuples));
  if (fs::is_regular_file(reviews)) attach_raw_texts(corpus, reviews.string());
  return corpus;
}

MentionMap read_mentions(const PipelineConfig& cfg) { return MentionMap::read(existing(out_path(cfg, artifact::kMentions))); }

EventSequences read_events(const PipelineConfig& cfg) {
  auto events = open_in(existing(out_path(cfg, artifact::kEvents)));
  auto seqs = open_in(existing(out_path(cfg, artifact::kSequences)));
  return read_event_sequences(events, seqs);
}

SequenceGraph read_sequence(const PipelineConfig& cfg) {
  auto in = open_in(existing(out_path(cfg, artifact::kSequenceGraph)));
  return read_sequence_graph(in);
}

std::map<CharacterId, ImpressionMixture> read_impressions(const PipelineConfig& cfg, const EmbeddingTable& table) {
  auto in = open_in(existing(out_path(cfg, artifact::kImpressions)));
  return read_mixtures(in, &table);
}

const ImpressionMixture& mixture_of(const std::map<CharacterId, ImpressionMixture>& mixes, const std::string& id) {
  auto it = mixes.find(id);
  if (it == mixes.end()) throw Error(ErrorCode::UnknownEvent, "no impression mixture for character '" + id + "'");
  return it->second;
}

}  // namespace

ordered_json PipelineConfig::to_json() const {
  return ordered_json{
      {"paths",
       {{"out_dir", paths.out_dir},
        {"tuples", paths.tuples},
        {"reviews", paths.reviews},
        {"stop_entities", paths.stop_entities},
        {"embeddings", paths.embeddings},
        {"characters", paths.characters},
        {"exclude_clusters", paths.exclude_clusters},
        {"stopwords", paths.stopwords},
        {"labels", paths.labels},
        {"dot", paths.dot},
        {"graph_out", paths.graph_out},
        {"plot", paths.plot}}},
      {"actants",
       {{"min_cluster_size", actants.min_cluster_size},
        {"eps", actants.eps},
        {"merge_threshold", actants.merge_threshold},
        {"emg_threshold", actants.emg_threshold}}},
      {"storygraph",
       {{"top_k", storygraph.top_k},
        {"min_edge_support", storygraph.min_edge_support},
        {"min_degree", storygraph.min_degree}}},
      {"rev2seq",
       {{"pairs", rev2seq.pairs},
        {"per_review_dedup", rev2seq.per_review_dedup},
        {"start_const", rev2seq.start_const},
        {"term_const", rev2seq.term_const}}},
      {"sent2imp",
       {{"min_cluster_size", sent2imp.min_cluster_size},
        {"eps", sent2imp.eps},
        {"skew_threshold", sent2imp.skew_threshold},
        {"mean_threshold", optional_json(sent2imp.mean_threshold)},
        {"variance_threshold", optional_json(sent2imp.variance_threshold)},
        {"pca_components", sent2imp.pca_components},
        {"bins", sent2imp.bins},
        {"kernel_width", sent2imp.kernel_width},
        {"character", sent2imp.character},
        {"a", sent2imp.a},
        {"b", sent2imp.b}}},
      {"synth",
       {{"events", synth.events},
        {"reviews", synth.reviews},
        {"drop", synth.drop},
        {"swap", synth.swap},
        {"edge_p", synth.edge_p},
        {"seed", synth.seed}}},
  };
}

void PipelineConfig::merge(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigConflict, "config must be a JSON object");
  auto table = setters(*this);
  for (const auto& [section, body] : j.items()) {
    auto s = table.find(section);
    if (s == table.end()) throw Error(ErrorCode::ConfigConflict, "unknown config section '" + section + "'");
    if (!body.is_object()) throw Error(ErrorCode::ConfigConflict, "config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      auto k = s->second.find(key);
      if (k == s->second.end()) throw Error(ErrorCode::ConfigConflict, "unknown config key '" + section + "." + key + "'");
      k->second(value, section + "." + key);
    }
  }
  validate();
}

void PipelineConfig::validate() const {
  require(!paths.out_dir.empty(), "paths.out_dir must not be empty");
  require(actants.min_cluster_size >= 2, "actants.min_cluster_size must be at least 2");
  require(actants.eps > 0, "actants.eps must be positive");
  require(actants.merge_threshold >= -2 && actants.merge_threshold <= 2, "actants.merge_threshold must lie in [-2, 2]");
  require(actants.emg_threshold >= -1 && actants.emg_threshold <= 1, "actants.emg_threshold must lie in [-1, 1]");
  require(storygraph.top_k >= 0, "storygraph.top_k must be non-negative");
  require(storygraph.min_edge_support >= 0, "storygraph.min_edge_support must be non-negative");
  require(storygraph.min_degree >= 0, "storygraph.min_degree must be non-negative");
  require(rev2seq.pairs == "adjacent" || rev2seq.pairs == "all", "rev2seq.pairs must be 'adjacent' or 'all'");
  require(rev2seq.start_const > 0, "rev2seq.start_const must be positive");
  require(rev2seq.term_const > 0, "rev2seq.term_const must be positive");
  require(sent2imp.min_cluster_size >= 2, "sent2imp.min_cluster_size must be at least 2");
  require(sent2imp.eps > 0, "sent2imp.eps must be positive");
  require(sent2imp.pca_components >= 1, "sent2imp.pca_components must be at least 1");
  require(sent2imp.bins >= 1, "sent2imp.bins must be at least 1");
  require(sent2imp.kernel_width >= 1 && sent2imp.kernel_width <= sent2imp.bins,
          "sent2imp.kernel_width must lie in [1, bins]");
  require(synth.events >= 1 && synth.events <= 31, "synth.events must lie in [1, 31]");
  require(synth.reviews >= 0, "synth.reviews must be non-negative");
  require(synth.drop >= 0 && synth.drop <= 1, "synth.drop must lie in [0, 1]");
  require(synth.swap >= 0 && synth.swap < 1, "synth.swap must lie in [0, 1)");
  require(synth.edge_p >= 0 && synth.edge_p <= 1, "synth.edge_p must lie in [0, 1]");
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  auto in = open_in(existing(path, "config file"));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigConflict, path + ": " + e.what());
  }
  PipelineConfig cfg;
  cfg.merge(j);
  return cfg;
}

IarcParams iarc_params(const PipelineConfig& cfg) {
  IarcParams p;
  p.cluster = {cfg.actants.min_cluster_size, cfg.actants.eps};
  p.merge_threshold = cfg.actants.merge_threshold;
  return p;
}

SequencingParams sequencing_params(const PipelineConfig& cfg) {
  SequencingParams p;
  p.precedence.pairs = cfg.rev2seq.pairs == "all" ? PairMode::All : PairMode::Adjacent;
  p.precedence.per_review_dedup = cfg.rev2seq.per_review_dedup;
  p.start_const = cfg.rev2seq.start_const;
  p.term_const = cfg.rev2seq.term_const;
  return p;
}

void run_ingest(const PipelineConfig& cfg) {
  auto corpus = parse_tuples(existing(cfg.paths.tuples, "tuple file (--tuples)"));
  if (!cfg.paths.reviews.empty()) attach_raw_texts(corpus, existing(cfg.paths.reviews, "review file (--reviews)"));
  auto stops = stops_for(cfg);
  corpus = lemmatize_corpus(std::move(corpus));
  auto filtered = filter_eligible_events(corpus, stops);
  write_file(out_path(cfg, artifact::kTuplesAll), [&](std::ostream& o) { write_tuples(corpus, o); });
  write_file(out_path(cfg, artifact::kTuplesFiltered), [&](std::ostream& o) { write_tuples(filtered, o); });
  write_file(out_path(cfg, artifact::kReviews), [&](std::ostream& o) { write_raw_texts(corpus, o); });
}

void run_actants(const PipelineConfig& cfg) {
  auto corpus = read_corpus(out_path(cfg, artifact::kTuplesFiltered), out_path(cfg, artifact::kReviews));
  auto seed = MentionMap::read(existing(cfg.paths.characters, "character seed file (--characters)"));
  auto table = embeddings_for(cfg);
  ClusterExclusions exclusions;
  if (!cfg.paths.exclude_clusters.empty()) {
    exclusions.read(existing(cfg.paths.exclude_clusters, "cluster exclusion file (--exclude-clusters)"));
  }
  auto stopwords = stopwords_for(cfg);

  auto map = emg_resolve(corpus, seed, table, cfg.actants.emg_threshold);
  auto sets = iarc_all(corpus, map, table, iarc_params(cfg), exclusions, stopwords);
  auto seqs = build_event_sequences(corpus, map, sets);

  write_file(out_path(cfg, artifact::kMentions), [&](std::ostream& o) { map.write(o); });
  write_file(out_path(cfg, artifact::kClusters), [&](std::ostream& o) { write_cluster_sets(sets, o); });
  std::ostringstream seq_buf;
  write_file(out_path(cfg, artifact::kEvents), [&](std::ostream& o) { write_event_sequences(seqs, o, seq_buf); });
  write_file(out_path(cfg, artifact::kSequences), [&](std::ostream& o) { o << seq_buf.str(); });
}

void run_storygraph(const PipelineConfig& cfg) {
  auto corpus = read_corpus(out_path(cfg, artifact::kTuplesFiltered), out_path(cfg, artifact::kReviews));
  auto map = read_mentions(cfg);
  auto clusters_in = open_in(existing(out_path(cfg, artifact::kClusters)));
  auto sets = read_cluster_sets(clusters_in);

  ExpansionParams params{cfg.storygraph.min_edge_support, cfg.storygraph.min_degree};
  auto regular = build_regular_graph(sets, map);
  auto candidates = rank_candidates(corpus, map, cfg.storygraph.top_k);
  auto expanded = expand_graph(regular, candidates, corpus, map, params);
  auto sub = candidate_subnetwork(candidates, corpus, params);

  auto dot = [&](std::ostream& o) { write_dot(expanded, o); };
  auto graph = [&](std::ostream& o) { write_graph(expanded, o); };
  write_file(out_path(cfg, artifact::kStoryDot), dot);
  write_file(out_path(cfg, artifact::kStoryGraph), graph);
  write_file(out_path(cfg, artifact::kCandidateGraph), [&](std::ostream& o) { write_graph(sub, o); });
  if (!cfg.paths.dot.empty()) write_file(cfg.paths.dot, dot);
  if (!cfg.paths.graph_out.empty()) write_file(cfg.paths.graph_out, graph);
}

void run_rev2seq_build(const PipelineConfig& cfg) {
  auto seqs = read_events(cfg);
  std::vector<int> vocabulary;
  for (const auto& e : seqs.vocabulary) vocabulary.push_back(e.id);
  auto g = sequence_events(seqs.by_review, vocabulary, sequencing_params(cfg));
  write_file(out_path(cfg, artifact::kSequenceGraph), [&](std::ostream& o) { write_sequence_graph(g, o); });
  run_rev2seq_export(cfg);
}

void run_rev2seq_export(const PipelineConfig& cfg) {
  auto g = read_sequence(cfg);
  std::vector<Event> vocabulary;
  if (fs::is_regular_file(out_path(cfg, artifact::kEvents)) && fs::is_regular_file(out_path(cfg, artifact::kSequences))) {
    vocabulary = read_events(cfg).vocabulary;
  }
  auto dot = [&](std::ostream& o) { write_sequence_dot(g, o, vocabulary); };
  write_file(out_path(cfg, artifact::kSequenceDot), dot);
  if (!cfg.paths.dot.empty()) write_file(cfg.paths.dot, dot);
}

ScoreReport run_rev2seq_score(const PipelineConfig& cfg) {
  auto g = read_sequence(cfg);
  auto labels = read_labels(existing(cfg.paths.labels, "label file (--labels)"));
  auto report = score(g, labels);
  write_file(out_path(cfg, artifact::kScore), [&](std::ostream& o) { write_score_report(report, o); });
  return report;
}

std::map<CharacterId, ImpressionMixture> impression_mixtures(const ReviewCorpus& corpus, const MentionMap& map,
                                                             const EmbeddingTable& table, const PipelineConfig& cfg,
                                                             const WordSet& stopwords) {
  TermStatistics stats(corpus, stopwords);
  ClusterParams params{cfg.sent2imp.min_cluster_size, cfg.sent2imp.eps};
  std::map<CharacterId, std::vector<PhraseCluster>> raw;
  std::vector<PhraseCluster> every;
  for (const auto& [character, phrases] : select_svcop(corpus, map)) {
    std::vector<EmbeddedPhrase> points;
    for (const auto& p : phrases) points.push_back({p, table.at(p)});
    auto& clusters = raw[character] = cluster(points, params, stopwords);
    for (const auto& c : clusters) {
      if (!c.is_noise()) every.push_back(c);
    }
  }

  FilterThresholds thresholds;
  thresholds.skew = cfg.sent2imp.skew_threshold;
  thresholds.mean = cfg.sent2imp.mean_threshold;
  thresholds.variance = cfg.sent2imp.variance_threshold;
  if (!thresholds.variance) {
    auto vars = score_variances(every, stats, stopwords);
    if (!vars.empty()) thresholds.variance = percentile(vars, 50.0);
  }

  std::map<CharacterId, ImpressionMixture> out;
  for (const auto& [character, clusters] : raw) {
    out[character] = filter_clusters(character, clusters, stats, thresholds, stopwords);
  }
  return out;
}

void run_sent2imp_profile(const PipelineConfig& cfg, std::ostream* echo) {
  auto corpus = read_corpus(out_path(cfg, artifact::kTuplesAll), out_path(cfg, artifact::kReviews));
  auto map = read_mentions(cfg);
  auto table = embeddings_for(cfg);
  auto mixes = impression_mixtures(corpus, map, table, cfg, stopwords_for(cfg));
  if (!cfg.sent2imp.character.empty()) {
    const auto& m = mixture_of(mixes, cfg.sent2imp.character);
    if (echo) write_mixture(m, *echo);
  }
  write_file(out_path(cfg, artifact::kImpressions), [&](std::ostream& o) {
    for (const auto& [character, m] : mixes) write_mixture(m, o);
  });
}

Heatmap run_sent2imp_heatmap(const PipelineConfig& cfg) {
  if (cfg.sent2imp.a.empty()) throw Error(ErrorCode::ConfigConflict, "heatmap needs a character (--a)");
  auto table = embeddings_for(cfg);
  auto mixes = read_impressions(cfg, table);
  const auto& b_id = cfg.sent2imp.b.empty() ? cfg.sent2imp.a : cfg.sent2imp.b;
  auto h = mixture_heatmap(mixture_of(mixes, cfg.sent2imp.a), mixture_of(mixes, b_id), table,
                           cfg.sent2imp.pca_components);
  auto name = "heatmap." + cfg.sent2imp.a + "." + b_id + ".tsv";
  write_file(fs::path(cfg.paths.out_dir) / name, [&](std::ostream& o) { write_heatmap(h, o); });
  if (!cfg.paths.plot.empty()) write_file(cfg.paths.plot, [&](std::ostream& o) { write_heatmap_ppm(h, o); });
  return h;
}

void run_sent2imp_complexity(const PipelineConfig& cfg, std::ostream* echo) {
  auto table = embeddings_for(cfg);
  auto mixes = read_impressions(cfg, table);
  std::ostringstream body;
  body << "character\tn_clusters\tentropy\n";
  for (const auto& [character, m] : mixes) {
    if (m.clusters.size() < 4) continue;
    auto h = mixture_heatmap(m, m, table, cfg.sent2imp.pca_components);
    double entropy = character_entropy(h, cfg.sent2imp.bins, cfg.sent2imp.kernel_width);
    body << character << '\t' << m.clusters.size() << '\t' << json(entropy).dump() << '\n';
  }
  write_file(out_path(cfg, artifact::kComplexity), [&](std::ostream& o) { o << body.str(); });
  if (echo) *echo << body.str();
}

void run_synth(const PipelineConfig& cfg) {
  const auto& s = cfg.synth;
  auto gt = random_ground_truth(s.events, s.edge_p, s.seed);
  auto reviews = generate_reviews(gt, s.reviews, s.drop, s.swap, s.seed + 1);
  write_synthetic_corpus(gt, reviews, cfg.paths.out_dir, s.seed + 2);
}

void run_all(const PipelineConfig& cfg) {
  run_ingest(cfg);
  run_actants(cfg);
  run_storygraph(cfg);
  run_rev2seq_build(cfg);
  if (!cfg.paths.labels.empty()) run_rev2seq_score(cfg);
  run_sent2imp_profile(cfg);
  run_sent2imp_complexity(cfg);
}

void write_score_report(const ScoreReport& r, std::ostream& out) {
  auto bounds = [](const ScoreBounds& b) {
    return ordered_json{{"lower", b.lower}, {"upper", b.upper}, {"point", b.point()}, {"margin", b.margin()}};
  };
  ordered_json j{{"edges", r.edges},
                 {"judges", r.judges},
                 {"ignored_labels", r.ignored_labels},
                 {"weighted", bounds(r.weighted)},
                 {"simple_majority", bounds(r.simple_majority)}};
  out << j.dump(2) << '\n';
}

}  // namespace storynet
