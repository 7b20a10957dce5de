// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "covmis/annotate.hpp"
#include "covmis/annotate_service.hpp"
#include "covmis/corpus.hpp"
#include "covmis/errors.hpp"
#include "covmis/evaluate.hpp"
#include "covmis/ingest.hpp"
#include "covmis/random.hpp"
#include "covmis/textprep.hpp"

namespace covmis {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct Options {
  // common
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::string run_name;

  // inputs
  std::string pairs, tweets, items, queries, backend = "fixture";
  std::vector<std::string> examples;
  std::vector<std::string> texts;
  std::string threads;
  std::string scheme = "identity";
  std::string embeddings, token_embeddings;
  std::string model;
  std::string gold;
  std::vector<std::string> preds;
  std::string baseline;
  std::string test;
  std::vector<std::string> datasets;

  // knobs
  std::string mode = "expected";
  bool split = false;
  std::string features = "sbert";
  std::string orientation = "tweet_as_premise";
  bool weighted = false;
  bool undersample = false;
  std::optional<std::size_t> target;
  std::optional<double> threshold;
  bool two_step = false;
  std::optional<double> learning_rate, weight_decay;
  std::optional<std::size_t> epochs, batch_size;
  std::size_t seeds = 5;
  bool parallel = false;

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log;
  bool resume = false;
  double duration = 0.0;
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out << content;
  if (!out) throw DataError("write failed for " + p.string());
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path require_input(const std::string& flag, const std::string& value) {
  if (value.empty()) throw UsageError(flag + " is required");
  if (!fs::exists(value)) throw DataError("input not found: " + value + " (" + flag + ")");
  return value;
}

std::string utc_stamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

/// Output directory of one invocation. Removed again unless commit() is
/// reached, so a failed run leaves nothing behind.
class RunDir {
 public:
  RunDir(const fs::path& root, const std::string& name) {
    path_ = root / name;
    fs::create_directories(path_);
  }
  ~RunDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
  }
  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& f) const { return path_ / f; }
  void commit() { committed_ = true; }

 private:
  fs::path path_;
  bool committed_ = false;
};

std::string run_name_for(const std::string& sub, const Options& o, const RunConfig& c) {
  if (!o.run_name.empty()) {
    if (o.run_name.find('/') != std::string::npos || o.run_name == "." || o.run_name == "..") {
      throw UsageError("--run-name must be a plain directory name");
    }
    return o.run_name;
  }
  const fs::path root = c.paths.out;
  const std::string base = sub + "-" + utc_stamp() + "-s" + std::to_string(c.seed);
  std::string name = base;
  for (int i = 2; fs::exists(root / name); ++i) name = base + "-" + std::to_string(i);
  return name;
}

std::string labels_json(const std::array<std::size_t, kNumLabels>& c) {
  ojson j;
  for (auto l : kLabels) j[std::string(to_string(l))] = c[code(l)];
  return j.dump();
}

std::size_t default_target(LabelScheme scheme, const Options& o, const RunConfig& c) {
  if (o.target) {
    if (*o.target == 0) throw UsageError("--target must be positive");
    return *o.target;
  }
  if (scheme == LabelScheme::CovidLies) return c.undersample_covidlies;
  if (scheme == LabelScheme::RumourEval) return c.undersample_rumoureval;
  throw UsageError("--target is required for the " + std::string(to_string(scheme)) + " scheme");
}

Orientation orientation_of(const Options& o) { return parse_orientation(o.orientation); }

std::vector<Label> require_labels(const std::vector<ExampleRow>& rows, const std::string& what) {
  std::vector<Label> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (!r.label) throw DataError(what + ": example " + r.key() + " has no label");
    out.push_back(*r.label);
  }
  return out;
}

std::vector<ExampleRow> read_all_examples(const std::vector<std::string>& paths, LabelScheme scheme) {
  if (paths.empty()) throw UsageError("--examples is required");
  std::vector<ExampleRow> rows;
  for (const auto& p : paths) {
    auto part = read_examples(require_input("--examples", p), scheme);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

std::vector<fs::path> text_paths(const Options& o) {
  std::vector<fs::path> out;
  for (const auto& t : o.texts) out.push_back(require_input("--texts", t));
  return out;
}

std::string embeddings_path(const Options& o, const RunConfig& c) {
  return o.embeddings.empty() ? c.paths.embeddings : o.embeddings;
}

/// Loads what a feature kind needs. For tfidf the vocabulary is fitted on
/// the texts of `fit_rows` unless a fitted model is supplied.
FeatureSource make_source(FeatureKind kind, Orientation orientation, const Options& o,
                          const RunConfig& c, const std::vector<ExampleRow>* fit_rows,
                          std::optional<TfidfModel> fitted = std::nullopt) {
  FeatureSource src;
  src.kind = kind;
  src.orientation = orientation;
  switch (kind) {
    case FeatureKind::Sbert:
      src.sentences = load_sentence_embeddings(require_input("--embeddings", embeddings_path(o, c)));
      break;
    case FeatureKind::Glove:
      src.words = load_word_embeddings(require_input("--embeddings", embeddings_path(o, c)));
      if (o.texts.empty()) throw UsageError("--texts is required for glove features");
      src.tokens = read_token_texts(text_paths(o));
      break;
    case FeatureKind::Tfidf:
      if (o.texts.empty()) throw UsageError("--texts is required for tfidf features");
      src.tokens = read_token_texts(text_paths(o));
      if (fitted) {
        src.tfidf = std::move(fitted);
      } else {
        std::vector<std::vector<std::string>> docs;
        std::set<std::string> seen;
        for (const auto& r : *fit_rows) {
          for (const auto* id : {&r.target_id, &r.text_id}) {
            if (!seen.insert(*id).second) continue;
            auto it = src.tokens.find(*id);
            if (it == src.tokens.end()) throw DataError("no text for id '" + *id + "'");
            docs.push_back(it->second);
          }
        }
        src.tfidf = fit_tfidf(docs, {1, 2});
      }
      break;
  }
  return src;
}

FeatureMatrix build_features(const FeatureSource& src, const std::vector<ExampleRow>& rows) {
  FeatureMatrix m;
  m.dim = src.dim();
  m.rows.reserve(rows.size());
  for (const auto& r : rows) src.add_row(m, r);
  return m;
}

TrainConfig train_config(const Options& o, const RunConfig& c, std::uint64_t seed) {
  TrainConfig t = c.train;
  if (o.learning_rate) t.learning_rate = *o.learning_rate;
  if (o.weight_decay) t.weight_decay = *o.weight_decay;
  if (o.epochs) t.epochs = *o.epochs;
  if (o.batch_size) t.batch_size = *o.batch_size;
  t.seed = seed;
  return t;
}

std::string features_json(const FeatureSource& src) {
  ojson j;
  j["kind"] = to_string(src.kind);
  j["orientation"] = src.orientation == Orientation::TweetAsPremise ? "tweet_as_premise" : "misinfo_as_premise";
  j["spec"] = src.spec();
  if (src.tfidf) {
    j["tfidf"] = {{"orders", src.tfidf->orders()},
                  {"vocabulary", src.tfidf->vocabulary()},
                  {"idf", src.tfidf->idf()}};
  }
  return j.dump() + "\n";
}

MetricReport report_rows(const std::vector<ExampleRow>& rows, std::span<const Label> pred) {
  const auto gold = require_labels(rows, "gold");
  bool typed = !rows.empty();
  for (const auto& r : rows) typed = typed && r.query_type.has_value();
  if (!typed) {
    MetricReport rep;
    rep.overall = metrics(confusion(gold, pred));
    return rep;
  }
  std::vector<StancePair> pairs;
  pairs.reserve(rows.size());
  for (const auto& r : rows) {
    StancePair p;
    p.misinfo_id = r.target_id;
    p.tweet_id = r.text_id;
    p.query_type = *r.query_type;
    p.label = r.label;
    pairs.push_back(std::move(p));
  }
  return report(gold, pred, pairs);
}

// --- subcommands -----------------------------------------------------------

int cmd_ingest(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const auto items = read_items(require_input("--items", o.items));
  RetrievalResult r;
  if (o.backend == "fixture") {
    const auto backend =
        FixtureBackend::load(require_input("--queries", o.queries), require_input("--tweets", o.tweets));
    r = retrieve(items, backend);
  } else if (o.backend == "live") {
    r = retrieve(items, LiveStubBackend{});
  } else {
    throw UsageError("--backend must be fixture or live");
  }
  (void)c;
  write_pairs(dir / "pairs.jsonl", r.pairs);
  write_tweets(dir / "tweets.jsonl", r.tweets);
  std::string q;
  for (const auto& s : r.queries) {
    q += json{{"kind", to_string(s.kind)}, {"text", s.text}}.dump() + "\n";
  }
  write_file(dir / "queries.jsonl", q);
  std::string missing;
  for (const auto& m : r.missing) missing += m + "\n";
  write_file(dir / "missing.txt", missing);
  out << "retrieved " << r.pairs.size() << " pairs, " << r.tweets.size() << " tweets, " << r.missing.size()
      << " missing\n";
  return kExitOk;
}

int cmd_clean(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const auto tweets = read_tweets(require_input("--tweets", o.tweets));
  const auto pairs = read_pairs(require_input("--pairs", o.pairs.empty() ? c.paths.corpus : o.pairs));
  CleaningConfig cc;
  cc.dedup_threshold = c.dedup_threshold;
  cc.min_words = c.min_words;
  cc.min_item_tweets = c.min_item_tweets;
  cc.seed = derive_seed(c.seed, "clean");
  const auto r = clean(tweets, pairs, cc);
  write_pairs(dir / "pairs.jsonl", r.pairs);
  const auto report = r.report.to_json();
  write_file(dir / "cleaning_report.json", report + "\n");
  out << report << "\n";
  return kExitOk;
}

int cmd_sample(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const auto pairs = read_pairs(require_input("--pairs", o.pairs.empty() ? c.paths.corpus : o.pairs));
  SamplingConfig sc;
  sc.per_type_quota = c.per_type_quota;
  sc.target = c.sample_target;
  if (o.mode == "expected") {
    sc.remainder = RemainderMode::Expected;
  } else if (o.mode == "realized") {
    sc.remainder = RemainderMode::Realized;
  } else {
    throw UsageError("--mode must be expected or realized");
  }
  auto r = sample_corpus(pairs, sc, derive_seed(c.seed, "sample"));
  if (o.split) r.pairs = split_validation(std::move(r.pairs), c.split_ratio, derive_seed(c.seed, "split"));
  write_pairs(dir / "pairs.jsonl", r.pairs);
  write_file(dir / "selection.csv", selection_csv(r.plans));
  out << "sampled " << r.pairs.size() << " of " << pairs.size() << " pairs over " << r.plans.size()
      << " items\n";
  return kExitOk;
}

int cmd_autolabel(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const auto pairs = auto_label(read_pairs(require_input("--pairs", o.pairs.empty() ? c.paths.corpus : o.pairs)));
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.auto_labeled ? 1 : 0;
  write_pairs(dir / "pairs.jsonl", pairs);
  out << "auto-labeled " << n << " pairs Against\n";
  return kExitOk;
}

int cmd_serve(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const auto pairs = read_pairs(require_input("--pairs", o.pairs.empty() ? c.paths.corpus : o.pairs));
  TaskTexts texts;
  if (!o.items.empty()) {
    for (const auto& m : read_items(require_input("--items", o.items))) texts.misinfo[m.id] = m.text;
  }
  if (!o.tweets.empty()) {
    for (const auto& t : read_tweets(require_input("--tweets", o.tweets))) {
      texts.tweets[t.id] = normalize_tweet(t.text).text;
    }
  }
  const fs::path log = o.log.empty() ? dir / "events.jsonl" : fs::path(o.log);
  AnnotationStore store(pairs, c.annotators, c.items_per_batch);
  if (o.resume) store = replay_log(std::move(store), log);

  AnnotationService service(std::move(store), std::move(texts), log);
  std::exception_ptr failure;
  std::thread server([&] {
    try {
      service.serve(o.host, o.port);
    } catch (...) {
      failure = std::current_exception();
    }
  });

  g_stop = false;
  auto prev_int = std::signal(SIGINT, on_signal);
  auto prev_term = std::signal(SIGTERM, on_signal);
  const auto start = std::chrono::steady_clock::now();
  bool announced = false;
  while (!g_stop && !failure) {
    if (!announced && service.listening()) {
      out << "listening on http://" << o.host << ":" << service.bound_port() << std::endl;
      announced = true;
    }
    if (o.duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= o.duration) {
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  service.stop();
  server.join();
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);
  if (failure) std::rethrow_exception(failure);

  const auto state = service.snapshot();
  write_pairs(dir / "pairs.jsonl", state->final_labels());
  out << "stopped; " << state->log().size() << " events logged to " << log.string() << "\n";
  return kExitOk;
}

int cmd_rebalance(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const auto scheme = parse_label_scheme(o.scheme);
  std::vector<TrainingExample> examples;
  ojson rep;
  if (!o.threads.empty()) {
    const auto f = filter_denied_sources(read_threads(require_input("--threads", o.threads)));
    examples = f.examples;
    rep["dropped_deny_threads"] = f.dropped_deny_threads;
    rep["skipped_missing_flag"] = f.skipped_missing_flag;
  } else {
    for (const auto& r : read_all_examples(o.examples, scheme)) {
      if (!r.label) throw DataError("example " + r.key() + " has no label");
      examples.push_back({r.target_id, r.text_id, *r.label});
    }
  }
  const auto effective = o.threads.empty() ? scheme : LabelScheme::RumourEval;
  const auto target = default_target(effective, o, c);
  std::vector<Label> labels;
  for (const auto& e : examples) labels.push_back(e.label);
  const auto kept = undersample_indices(labels, target, derive_seed(c.seed, "rebalance"));
  std::vector<TrainingExample> out_examples;
  std::vector<Label> kept_labels;
  for (auto i : kept) {
    out_examples.push_back(examples[i]);
    kept_labels.push_back(labels[i]);
  }
  write_training_examples(dir / "examples.jsonl", out_examples);

  const auto before = label_counts(labels);
  const auto after = label_counts(kept_labels);
  rep["scheme"] = to_string(effective);
  rep["target"] = target;
  rep["before"] = json::parse(labels_json(before));
  rep["after"] = json::parse(labels_json(after));
  auto weights_or_null = [](const std::array<std::size_t, kNumLabels>& counts) -> ojson {
    for (auto n : counts)
      if (n == 0) return nullptr;
    return class_weights(counts).w;
  };
  rep["class_weights_before"] = weights_or_null(before);
  rep["class_weights_after"] = weights_or_null(after);
  write_file(dir / "rebalance.json", rep.dump(2) + "\n");
  out << "kept " << out_examples.size() << " of " << examples.size() << " examples " << labels_json(after)
      << "\n";
  return kExitOk;
}

int cmd_train(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const auto scheme = parse_label_scheme(o.scheme);
  auto rows = read_all_examples(o.examples, scheme);
  auto labels = require_labels(rows, "training");
  if (o.undersample) {
    const auto kept = undersample_indices(labels, default_target(scheme, o, c), derive_seed(c.seed, "rebalance"));
    std::vector<ExampleRow> r2;
    std::vector<Label> l2;
    for (auto i : kept) {
      r2.push_back(rows[i]);
      l2.push_back(labels[i]);
    }
    rows = std::move(r2);
    labels = std::move(l2);
  }
  const auto src = make_source(parse_feature_kind(o.features), orientation_of(o), o, c, &rows);
  const auto fm = build_features(src, rows);
  const auto weights = o.weighted ? class_weights(label_counts(labels)) : ClassWeights::uniform();
  const auto tc = train_config(o, c, derive_seed(c.seed, "train"));
  const auto result = train_head(fm, labels, weights, tc, src.spec());

  save_head(dir / "head.json", result.model);
  write_file(dir / "features.json", features_json(src));
  std::string trace = "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_trace.size(); ++e) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e + 1, result.loss_trace[e]);
    trace += buf;
  }
  write_file(dir / "loss_trace.csv", trace);
  write_file(dir / "class_weights.json", ojson(weights.w).dump() + "\n");
  const auto pred = predict_batch(result.model, fm);
  const auto rep = report_rows(rows, pred);
  write_file(dir / "train_metrics.json", to_json(rep));
  out << "trained on " << rows.size() << " examples; final objective " << result.loss_trace.back()
      << "; training accuracy " << rep.overall.accuracy << "\n";
  return kExitOk;
}

int cmd_score(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const fs::path model_dir = require_input("--model", o.model);
  const auto head = load_head(require_input("--model", (model_dir / "head.json").string()));
  const json fj = json::parse(read_file(require_input("--model", (model_dir / "features.json").string())));
  std::optional<TfidfModel> tfidf;
  if (fj.contains("tfidf")) {
    const auto& t = fj["tfidf"];
    tfidf = TfidfModel::restore(t.at("vocabulary").get<std::vector<std::string>>(),
                                t.at("idf").get<std::vector<double>>(), t.at("orders").get<std::vector<int>>());
  }
  const auto kind = parse_feature_kind(fj.at("kind").get<std::string>());
  const auto orientation = parse_orientation(fj.at("orientation").get<std::string>());
  const auto rows = read_all_examples(o.examples, parse_label_scheme(o.scheme));
  const auto src = make_source(kind, orientation, o, c, nullptr, std::move(tfidf));
  if (src.spec() != head.feature_spec) {
    throw DataError("feature spec mismatch: model has '" + head.feature_spec + "', inputs give '" + src.spec() + "'");
  }

  std::optional<TokenEmbeddingStore> tokens;
  const double threshold = o.threshold.value_or(c.bertscore_threshold);
  if (o.two_step) {
    if (kind != FeatureKind::Sbert) throw UsageError("--two-step needs an sbert head");
    tokens = load_token_embeddings(require_input("--token-embeddings", o.token_embeddings));
  }

  std::vector<Label> pred;
  std::string lines;
  for (const auto& r : rows) {
    ojson j{{"target_id", r.target_id}, {"text_id", r.text_id}};
    if (o.two_step) {
      const auto [premise, hypothesis] = orient(r.target_id, r.text_id, orientation);
      const auto d = two_step(tokens->at(r.text_id).vectors, tokens->at(r.target_id).vectors,
                              src.sentences->at(premise), src.sentences->at(hypothesis), threshold, head);
      pred.push_back(d.label);
      j["label"] = to_string(d.label);
      j["bertscore_f1"] = d.score.f1;
      if (d.label != Label::Neither) j["probs"] = d.head_probs;
    } else {
      FeatureMatrix one;
      one.dim = src.dim();
      src.add_row(one, r);
      const auto p = softmax(logits(head, one.rows[0]));
      pred.push_back(argmax_label(p));
      j["label"] = to_string(pred.back());
      j["probs"] = p;
    }
    if (r.query_type) j["query_type"] = to_string(*r.query_type);
    lines += j.dump() + "\n";
  }
  write_file(dir / "predictions.jsonl", lines);

  bool labeled = !rows.empty();
  for (const auto& r : rows) labeled = labeled && r.label.has_value();
  out << "scored " << rows.size() << " pairs";
  if (labeled) {
    const auto rep = report_rows(rows, pred);
    write_file(dir / "metrics.json", to_json(rep));
    out << "; accuracy " << rep.overall.accuracy;
  }
  out << "\n";
  return kExitOk;
}

int cmd_bertscore(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const auto rows = read_all_examples(o.examples, parse_label_scheme(o.scheme));
  const auto tokens = load_token_embeddings(require_input("--token-embeddings", o.token_embeddings));
  const double threshold = o.threshold.value_or(c.bertscore_threshold);
  std::string lines;
  double sum = 0.0;
  std::size_t relevant = 0;
  for (const auto& r : rows) {
    const auto s = bertscore(tokens.at(r.text_id).vectors, tokens.at(r.target_id).vectors);
    sum += s.f1;
    relevant += s.f1 > threshold ? 1 : 0;
    lines += ojson{{"target_id", r.target_id},
                   {"text_id", r.text_id},
                   {"precision", s.precision},
                   {"recall", s.recall},
                   {"f1", s.f1},
                   {"relevant", s.f1 > threshold}}
                 .dump() +
             "\n";
  }
  write_file(dir / "bertscore.jsonl", lines);
  out << "scored " << rows.size() << " pairs; mean F1 " << (rows.empty() ? 0.0 : sum / static_cast<double>(rows.size()))
      << "; relevant " << relevant << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  (void)c;
  const auto gold = read_examples(require_input("--gold", o.gold.empty() ? c.paths.corpus : o.gold),
                                  parse_label_scheme(o.scheme));
  std::vector<std::vector<Label>> runs;
  if (o.baseline == "majority") {
    std::vector<StancePair> pairs;
    for (const auto& r : gold) {
      if (!r.query_type) throw DataError("majority baseline needs query_type on every gold row");
      StancePair p;
      p.misinfo_id = r.target_id;
      p.tweet_id = r.text_id;
      p.query_type = *r.query_type;
      p.label = r.label;
      pairs.push_back(std::move(p));
    }
    runs.push_back(majority_baseline(pairs));
  } else if (!o.baseline.empty()) {
    throw UsageError("--baseline must be majority");
  }
  for (const auto& path : o.preds) {
    std::map<std::string, Label> by_key;
    for (const auto& r : read_examples(require_input("--pred", path))) {
      if (!r.label) throw DataError(path + ": prediction " + r.key() + " has no label");
      by_key[r.key()] = *r.label;
    }
    std::vector<Label> pred;
    for (const auto& g : gold) {
      auto it = by_key.find(g.key());
      if (it == by_key.end()) throw DataError(path + ": no prediction for " + g.key());
      pred.push_back(it->second);
    }
    runs.push_back(std::move(pred));
  }
  if (runs.empty()) throw UsageError("give --pred or --baseline majority");

  std::vector<MetricReport> reports;
  for (const auto& p : runs) reports.push_back(report_rows(gold, p));
  write_file(dir / "metrics.json", to_json(reports[0]));
  const auto text = report_table(reports[0]) + "\n" + group_table(reports[0]);
  write_file(dir / "report.txt", text);
  if (reports.size() > 1) {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      write_file(dir / ("metrics_" + std::to_string(i) + ".json"), to_json(reports[i]));
    }
    std::map<std::string, std::vector<double>> values;
    for (const auto& r : reports)
      for (const auto& [k, v] : run_metrics(r)) values[k].push_back(v);
    std::map<std::string, Summary> summary;
    for (const auto& [k, vs] : values) summary[k] = vs.size() >= 2 ? summarize(vs) : Summary{vs[0], 0.0, 1, vs};
    write_file(dir / "summary.json", to_json(summary));
  }
  out << text;
  return kExitOk;
}

int cmd_ablate(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  if (o.datasets.size() < 2) throw UsageError("ablate needs at least two --dataset name=path");
  std::map<std::string, std::vector<ExampleRow>> data;
  std::vector<std::string> names;
  for (const auto& spec : o.datasets) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--dataset expects name=path, got '" + spec + "'");
    const auto name = spec.substr(0, eq);
    if (data.count(name)) throw UsageError("duplicate dataset name '" + name + "'");
    data[name] = read_examples(require_input("--dataset", spec.substr(eq + 1)));
    require_labels(data[name], name);
    names.push_back(name);
  }
  const auto test = read_examples(require_input("--test", o.test));
  require_labels(test, "test");
  const auto kind = parse_feature_kind(o.features);
  const auto orientation = orientation_of(o);

  // Embedding stores are shared by every cell; tfidf is refitted per subset.
  std::optional<FeatureSource> shared;
  if (kind != FeatureKind::Tfidf) shared = make_source(kind, orientation, o, c, nullptr);

  auto runner = [&](const std::vector<std::string>& subset, std::uint64_t seed) {
    std::vector<ExampleRow> rows;
    for (const auto& n : subset) rows.insert(rows.end(), data.at(n).begin(), data.at(n).end());
    const auto labels = require_labels(rows, "training");
    const FeatureSource src = shared ? *shared : make_source(kind, orientation, o, c, &rows);
    const auto fm = build_features(src, rows);
    const auto weights = o.weighted ? class_weights(label_counts(labels)) : ClassWeights::uniform();
    const auto result = train_head(fm, labels, weights, train_config(o, c, seed), src.spec());
    const auto pred = predict_batch(result.model, build_features(src, test));
    return run_metrics(report_rows(test, pred));
  };
  AblationOptions ao;
  ao.seeds = o.seeds;
  ao.root_seed = derive_seed(c.seed, "ablate");
  ao.parallel = o.parallel;
  const auto table = ablation(names, runner, ao);
  write_file(dir / "ablation.json", to_json(table));
  const auto text = ablation_table(table);
  write_file(dir / "ablation.txt", text);
  out << text;
  return kExitOk;
}

int cmd_stats(const Options& o, const RunConfig& c, RunDir& dir, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto pairs = read_pairs(require_input("--pairs", o.pairs.empty() ? c.paths.corpus : o.pairs));
  const auto t = dataset_stats(pairs);
  write_file(dir / "stats.csv", stats_csv(t));
  const auto text = stats_text(t);
  write_file(dir / "stats.txt", text);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << text;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(%.3f s)\n", secs);
  out << buf;
  return kExitOk;
}

using Command = int (*)(const Options&, const RunConfig&, RunDir&, std::ostream&);

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Root seed (overrides the config)");
  sub->add_option("--config", o.config, "JSON run config");
  sub->add_option("--out", o.out, "Output root directory (overrides the config)");
  sub->add_option("--run-name", o.run_name, "Run directory name (default: <command>-<utc stamp>-s<seed>)");
}

std::string command_json(const std::string& name, int argc, const char* const* argv) {
  ojson j;
  j["command"] = name;
  std::vector<std::string> args(argv + 1, argv + argc);
  j["argv"] = args;
  return j.dump(2) + "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Corpus construction and stance classification for misinformation tweets", "covmis"};
  app.require_subcommand(1);

  std::map<std::string, std::pair<CLI::App*, Command>> commands;
  auto sub = [&](const char* name, const char* help, Command fn) {
    auto* s = app.add_subcommand(name, help);
    add_common(s, o);
    commands[name] = {s, fn};
    return s;
  };

  auto* ingest = sub("ingest", "Retrieve tweets for misinformation items", cmd_ingest);
  ingest->add_option("--items", o.items, "Misinformation items (JSONL)");
  ingest->add_option("--queries", o.queries, "Fixture search results (JSON map query -> ids)");
  ingest->add_option("--tweets", o.tweets, "Fixture tweets (JSONL)");
  ingest->add_option("--backend", o.backend, "fixture or live");

  auto* clean_cmd = sub("clean", "Drop duplicate, non-English, short and near-duplicate tweets", cmd_clean);
  clean_cmd->add_option("--pairs", o.pairs, "Pairs (JSONL)");
  clean_cmd->add_option("--tweets", o.tweets, "Tweets (JSONL)");

  auto* sample = sub("sample", "Draw about 24 tweets per item", cmd_sample);
  sample->add_option("--pairs", o.pairs, "Pairs (JSONL)");
  sample->add_option("--mode", o.mode, "expected or realized remainder draw");
  sample->add_flag("--split", o.split, "Also assign validation/test splits");

  auto* serve = sub("annotate-serve", "Serve the annotation HTTP API", cmd_serve);
  serve->add_option("--pairs", o.pairs, "Pairs (JSONL)");
  serve->add_option("--items", o.items, "Misinformation items for task texts");
  serve->add_option("--tweets", o.tweets, "Tweets for task texts");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port (0 picks a free one)");
  serve->add_option("--log", o.log, "Event log (default: <run>/events.jsonl)");
  serve->add_flag("--resume", o.resume, "Replay the event log before serving");
  serve->add_option("--duration", o.duration, "Stop after this many seconds (0 = until signal)");

  auto* autolabel = sub("autolabel", "Label fact-check URL pairs Against", cmd_autolabel);
  autolabel->add_option("--pairs", o.pairs, "Pairs (JSONL)");

  auto* rebalance = sub("rebalance", "Map labels and undersample Favor/Neither", cmd_rebalance);
  rebalance->add_option("--examples", o.examples, "Training examples (JSONL)");
  rebalance->add_option("--threads", o.threads, "Conversation threads (JSONL); drops deny-source threads");
  rebalance->add_option("--scheme", o.scheme, "identity, nli, rumoureval or covidlies");
  rebalance->add_option("--target", o.target, "Expected Favor/Neither count");

  auto* train = sub("train", "Train a softmax head", cmd_train);
  train->add_option("--examples", o.examples, "Training examples (JSONL); repeatable");
  train->add_option("--scheme", o.scheme, "Label scheme of the examples");
  train->add_option("--features", o.features, "sbert, glove or tfidf");
  train->add_option("--embeddings", o.embeddings, "Sentence (sbert) or word (glove) embeddings");
  train->add_option("--texts", o.texts, "id/text JSONL files (glove, tfidf); repeatable");
  train->add_option("--orientation", o.orientation, "tweet_as_premise or misinfo_as_premise");
  train->add_flag("--weighted", o.weighted, "Class-weighted loss");
  train->add_flag("--undersample", o.undersample, "Undersample Favor/Neither first");
  train->add_option("--target", o.target, "Undersampling target");
  train->add_option("--lr", o.learning_rate, "Learning rate");
  train->add_option("--weight-decay", o.weight_decay, "L2 decay");
  train->add_option("--epochs", o.epochs, "Epochs");
  train->add_option("--batch-size", o.batch_size, "Batch size (0 = full batch)");

  auto* score = sub("score", "Predict with a trained head", cmd_score);
  score->add_option("--model", o.model, "Train run directory");
  score->add_option("--examples", o.examples, "Pairs or examples to score");
  score->add_option("--scheme", o.scheme, "Label scheme of the examples");
  score->add_option("--embeddings", o.embeddings, "Sentence or word embeddings");
  score->add_option("--texts", o.texts, "id/text JSONL files");
  score->add_flag("--two-step", o.two_step, "Gate by BERTScore first");
  score->add_option("--token-embeddings", o.token_embeddings, "Token embeddings (JSONL)");
  score->add_option("--threshold", o.threshold, "BERTScore F1 threshold");

  auto* bs = sub("bertscore", "BERTScore between tweets and misinformation items", cmd_bertscore);
  bs->add_option("--examples", o.examples, "Pairs or examples");
  bs->add_option("--scheme", o.scheme, "Label scheme of the examples");
  bs->add_option("--token-embeddings", o.token_embeddings, "Token embeddings (JSONL)");
  bs->add_option("--threshold", o.threshold, "Relevance threshold");

  auto* eval = sub("eval", "Metrics against gold labels", cmd_eval);
  eval->add_option("--gold", o.gold, "Gold pairs or examples");
  eval->add_option("--scheme", o.scheme, "Label scheme of the gold file");
  eval->add_option("--pred", o.preds, "Prediction JSONL; repeat for several seeds");
  eval->add_option("--baseline", o.baseline, "majority");

  auto* ablate = sub("ablate", "Only-one / all-without-one training-set grid", cmd_ablate);
  ablate->add_option("--dataset", o.datasets, "name=path; repeat");
  ablate->add_option("--test", o.test, "Test pairs");
  ablate->add_option("--features", o.features, "sbert, glove or tfidf");
  ablate->add_option("--embeddings", o.embeddings, "Sentence or word embeddings");
  ablate->add_option("--texts", o.texts, "id/text JSONL files");
  ablate->add_option("--orientation", o.orientation, "tweet_as_premise or misinfo_as_premise");
  ablate->add_flag("--weighted", o.weighted, "Class-weighted loss");
  ablate->add_option("--seeds", o.seeds, "Runs per cell");
  ablate->add_flag("--parallel", o.parallel, "Run cells concurrently");
  ablate->add_option("--lr", o.learning_rate, "Learning rate");
  ablate->add_option("--epochs", o.epochs, "Epochs");
  ablate->add_option("--batch-size", o.batch_size, "Batch size (0 = full batch)");

  auto* stats = sub("stats", "Label counts per query type", cmd_stats);
  stats->add_option("--pairs", o.pairs, "Pairs (JSONL)");

  // Keep repeatable options from swallowing the next flag's value.
  for (auto& [name, entry] : commands) {
    for (auto* opt : entry.first->get_options()) {
      if (opt->get_expected_max() > 1) opt->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  std::string name;
  Command fn = nullptr;
  for (const auto& [n, entry] : commands) {
    if (entry.first->parsed()) {
      name = n;
      fn = entry.second;
    }
  }

  try {
    RunConfig config = o.config.empty() ? RunConfig{} : load_config(require_input("--config", o.config));
    if (o.seed) config.seed = *o.seed;
    if (!o.out.empty()) config.paths.out = o.out;
    config.validate();

    RunDir dir(config.paths.out, run_name_for(name, o, config));
    write_file(dir / "config.json", config.to_json());
    write_file(dir / "command.json", command_json(name, argc, argv));
    const int rc = fn(o, config, dir, out);
    if (rc == kExitOk) dir.commit();
    out << "run directory: " << dir.path().string() << "\n";
    return rc;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SearchError& e) {
    err << "search error: " << e.what() << "\n";
    return kExitData;
  } catch (const AnnotationError& e) {
    err << "annotation error: " << e.what() << "\n";
    return kExitData;
  } catch (const TrainingError& e) {
    err << "training error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace covmis
