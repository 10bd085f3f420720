#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <vector>

#include "storynet/error.hpp"
#include "storynet/pipeline.hpp"

using nlohmann::json;
using storynet::PipelineConfig;

namespace {

// Command-line values land in a JSON patch applied over the config file.
struct Overrides {
  std::string config_path;
  json patch = json::object();
  std::vector<std::function<void()>> collect;

  template <typename T>
  void option(CLI::App* app, const std::string& flag, const std::string& section, const std::string& key,
              const std::string& help) {
    auto holder = std::make_shared<std::optional<T>>();
    app->add_option(flag, *holder, help);
    collect.push_back([this, holder, section, key] {
      if (*holder) patch[section][key] = **holder;
    });
  }

  void flag(CLI::App* app, const std::string& name, const std::string& section, const std::string& key,
            const std::string& help) {
    auto holder = std::make_shared<bool>(false);
    app->add_flag(name, *holder, help);
    collect.push_back([this, holder, section, key] {
      if (*holder) patch[section][key] = true;
    });
  }

  PipelineConfig resolve() {
    for (auto& c : collect) c();
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : PipelineConfig::load(config_path);
    cfg.merge(patch);
    return cfg;
  }
};

void add_base(CLI::App* app, Overrides& ov) {
  app->add_option("--config", ov.config_path, "JSON config file");
  ov.option<std::string>(app, "--out-dir", "paths", "out_dir", "directory for stage outputs");
}

void add_pipeline_options(CLI::App* app, Overrides& ov) {
  add_base(app, ov);
  ov.option<std::string>(app, "--tuples", "paths", "tuples", "relation tuple file (JSON lines)");
  ov.option<std::string>(app, "--reviews", "paths", "reviews", "raw review text file (JSON lines)");
  ov.option<std::string>(app, "--stop-entities", "paths", "stop_entities", "stop-entity list");
  ov.option<std::string>(app, "--embeddings", "paths", "embeddings", "phrase embedding file");
  ov.option<std::string>(app, "--characters", "paths", "characters", "character seed map");
  ov.option<std::string>(app, "--exclude-clusters", "paths", "exclude_clusters", "relation cluster exclusions");
  ov.option<std::string>(app, "--stopwords", "paths", "stopwords", "stopword list");
  ov.option<std::string>(app, "--labels", "paths", "labels", "judge label file for scoring");
  ov.option<std::string>(app, "--dot", "paths", "dot", "extra DOT export path");
  ov.option<std::string>(app, "--graph-out", "paths", "graph_out", "extra story graph export path");
  ov.option<std::string>(app, "--plot", "paths", "plot", "heatmap image path (PPM)");

  ov.option<int>(app, "--min-cluster-size", "actants", "min_cluster_size", "relation cluster core size");
  ov.option<double>(app, "--eps", "actants", "eps", "relation cluster distance threshold");
  ov.option<double>(app, "--merge-threshold", "actants", "merge_threshold", "cluster merge similarity");
  ov.option<double>(app, "--emg-threshold", "actants", "emg_threshold", "mention grouping similarity");

  ov.option<int>(app, "--top-k", "storygraph", "top_k", "candidate mentions considered");
  ov.option<int>(app, "--min-edge-support", "storygraph", "min_edge_support", "candidate edges need more tuples");
  ov.option<int>(app, "--min-degree", "storygraph", "min_degree", "candidate admission degree");

  ov.option<std::string>(app, "--pairs", "rev2seq", "pairs", "precedence pairs: adjacent or all");
  ov.flag(app, "--per-review-dedup", "rev2seq", "per_review_dedup", "count each pair once per review");
  ov.option<double>(app, "--start-const", "rev2seq", "start_const", "START row constant");
  ov.option<double>(app, "--term-const", "rev2seq", "term_const", "TERMINATE column constant");

  ov.option<int>(app, "--impression-min-cluster-size", "sent2imp", "min_cluster_size", "impression cluster core size");
  ov.option<double>(app, "--impression-eps", "sent2imp", "eps", "impression cluster distance threshold");
  ov.option<double>(app, "--skew-threshold", "sent2imp", "skew_threshold", "cluster skewness threshold");
  ov.option<double>(app, "--mean-threshold", "sent2imp", "mean_threshold", "cluster score mean threshold");
  ov.option<double>(app, "--variance-threshold", "sent2imp", "variance_threshold", "cluster score variance threshold");
  ov.option<int>(app, "--pca-components", "sent2imp", "pca_components", "heatmap PCA components");
  ov.option<int>(app, "--bins", "sent2imp", "bins", "entropy histogram bins");
  ov.option<int>(app, "--kernel-width", "sent2imp", "kernel_width", "entropy smoothing width");
  ov.option<std::string>(app, "--character", "sent2imp", "character", "character to profile");
  ov.option<std::string>(app, "--a", "sent2imp", "a", "heatmap row character");
  ov.option<std::string>(app, "--b", "sent2imp", "b", "heatmap column character (defaults to --a)");
}

void add_synth_options(CLI::App* app, Overrides& ov) {
  add_base(app, ov);
  ov.option<int>(app, "--events", "synth", "events", "events in the ground-truth DAG");
  ov.option<int>(app, "--reviews", "synth", "reviews", "number of reviews");
  ov.option<double>(app, "--drop", "synth", "drop", "per-event drop probability");
  ov.option<double>(app, "--swap", "synth", "swap", "adjacent swap probability");
  ov.option<double>(app, "--edge-p", "synth", "edge_p", "ground-truth edge probability");
  ov.option<std::uint64_t>(app, "--seed", "synth", "seed", "random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"storynet: story networks and event timelines from review tuples"};
  app.require_subcommand(1);
  Overrides ov;
  std::function<void(const PipelineConfig&)> action;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, bool synth,
                  std::function<void(const PipelineConfig&)> fn) {
    auto* sub = parent->add_subcommand(name, help);
    if (synth) {
      add_synth_options(sub, ov);
    } else {
      add_pipeline_options(sub, ov);
    }
    sub->callback([&action, fn] { action = fn; });
    return sub;
  };

  leaf(&app, "ingest", "validate, lemmatise and filter relation tuples", false, storynet::run_ingest);
  leaf(&app, "actants", "group mentions, cluster relations, derive event sequences", false, storynet::run_actants);
  leaf(&app, "storygraph", "build the expanded story network", false, storynet::run_storygraph);

  auto* rev2seq = app.add_subcommand("rev2seq", "consensus event sequence");
  rev2seq->require_subcommand(1);
  leaf(rev2seq, "build", "sequence events into a timeline DAG", false, storynet::run_rev2seq_build);
  leaf(rev2seq, "export", "write the sequence DAG as DOT", false, storynet::run_rev2seq_export);
  leaf(rev2seq, "score", "score the sequence DAG against judge labels", false, [](const PipelineConfig& cfg) {
    storynet::write_score_report(storynet::run_rev2seq_score(cfg), std::cout);
  });

  auto* sent2imp = app.add_subcommand("sent2imp", "character impressions");
  sent2imp->require_subcommand(1);
  leaf(sent2imp, "profile", "impression mixtures per character", false,
       [](const PipelineConfig& cfg) { storynet::run_sent2imp_profile(cfg, &std::cout); });
  leaf(sent2imp, "heatmap", "similarity heatmap between two mixtures", false, [](const PipelineConfig& cfg) {
    storynet::write_heatmap(storynet::run_sent2imp_heatmap(cfg), std::cout);
  });
  leaf(sent2imp, "complexity", "entropy-based complexity per character", false,
       [](const PipelineConfig& cfg) { storynet::run_sent2imp_complexity(cfg, &std::cout); });

  auto* synth = app.add_subcommand("synth", "synthetic corpora");
  synth->require_subcommand(1);
  leaf(synth, "gen", "generate a synthetic corpus with known event order", true, storynet::run_synth);

  auto* run = app.add_subcommand("run", "run several stages");
  run->require_subcommand(1);
  leaf(run, "all", "every stage from ingest to complexity", false, storynet::run_all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    auto cfg = ov.resolve();
    std::cerr << "storynet: resolved config " << cfg.to_json().dump() << '\n';
    action(cfg);
  } catch (const storynet::Error& e) {
    std::cerr << "storynet: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "storynet: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
