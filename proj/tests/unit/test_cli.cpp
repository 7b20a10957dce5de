// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include <doctest.h>

#include <random>
#include <sstream>

#include <json.hpp>

#include "covmis/cli.hpp"
#include "covmis/errors.hpp"
#include "support.hpp"

using namespace covmis;
using json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "covmis");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture() { return (test::source_dir() / "data/fixtures/covmis_stance_fixture.jsonl").string(); }

std::string words(std::size_t n, const std::string& stem) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + stem + std::to_string(i);
  return s;
}

/// Small labeled corpus whose tweets carry class-specific vocabulary, plus
/// id/text files for tfidf features.
void write_toy(const test::TempDir& dir) {
  std::vector<StancePair> pairs;
  std::vector<Tweet> tweets;
  std::vector<MisinfoItem> items;
  const char* cue[3] = {"true indeed confirmed", "fake hoax debunked", "weather football music"};
  for (int m = 0; m < 3; ++m) {
    const auto mid = "m" + std::to_string(m);
    items.push_back({mid, "claim number " + std::to_string(m) + " about the virus", {}, {}, {}, {"virus"}});
    for (int t = 0; t < 12; ++t) {
      const int k = t % 3;
      const auto tid = mid + "t" + std::to_string(t);
      tweets.push_back(make_tweet(tid, std::string(cue[k]) + " " + words(8, tid + "w"), "en"));
      pairs.push_back({mid, tid, kQueryTypes[static_cast<std::size_t>(t % 4)], label_from_code(k), false, {}});
    }
  }
  write_pairs(dir / "pairs.jsonl", pairs);
  write_tweets(dir / "tweets.jsonl", tweets);
  write_items(dir / "items.jsonl", items);
}

}  // namespace

TEST_CASE("stats prints the corpus counts") {
  test::TempDir dir;
  const auto r = run({"stats", "--pairs", fixture(), "--out", dir.path().string(), "--run-name", "s"});
  CHECK(r.code == 0);
  CHECK(r.out.find("1276") != std::string::npos);
  CHECK(r.out.find("1047") != std::string::npos);
  CHECK(r.out.find("308") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "s/stats.csv"));
  const auto cfg = json::parse(test::slurp(dir / "s/config.json"));
  CHECK(cfg["thresholds"]["dedup"] == 0.8);
  CHECK(cfg["thresholds"]["bertscore"] == 0.4);
  CHECK(cfg["undersample"]["covidlies"] == 400);
  CHECK(cfg["split_ratio"] == 0.2);
}

TEST_CASE("clean reports one short tweet") {
  test::TempDir dir;
  std::vector<StancePair> pairs;
  std::vector<Tweet> tweets;
  for (int i = 0; i < 25; ++i) {
    const auto id = "t" + std::to_string(i);
    tweets.push_back(make_tweet(id, words(i == 0 ? 9 : 12, id + "_"), "en"));
    pairs.push_back({"m", id, QueryType::Keywords, {}, false, {}});
  }
  write_pairs(dir / "pairs.jsonl", pairs);
  write_tweets(dir / "tweets.jsonl", tweets);
  const auto r = run({"clean", "--pairs", (dir / "pairs.jsonl").string(), "--tweets", (dir / "tweets.jsonl").string(),
                      "--out", (dir / "runs").string(), "--run-name", "c"});
  REQUIRE(r.code == 0);
  const auto rep = json::parse(test::slurp(dir / "runs/c/cleaning_report.json"));
  CHECK(rep["removed"]["short"] == 1);
  CHECK(rep["surviving"] == 24);
}

TEST_CASE("eval with predictions equal to gold gives accuracy 1") {
  test::TempDir dir;
  const auto r = run({"eval", "--gold", fixture(), "--pred", fixture(), "--out", dir.path().string(), "--run-name",
                      "e"});
  REQUIRE(r.code == 0);
  const auto m = json::parse(test::slurp(dir / "e/metrics.json"));
  CHECK(m["overall"]["accuracy"] == 1.0);
  CHECK(m["overall"]["macro"]["f1"] == 1.0);

  const auto b = run({"eval", "--gold", fixture(), "--baseline", "majority", "--out", dir.path().string(),
                      "--run-name", "b"});
  REQUIRE(b.code == 0);
  const auto bm = json::parse(test::slurp(dir / "b/metrics.json"));
  CHECK(bm["overall"]["accuracy"].get<double>() == doctest::Approx((195.0 + 646.0 + 745.0) / 2631.0));
}

TEST_CASE("exit codes and failure hygiene") {
  test::TempDir dir;
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"stats", "--out", dir.path().string()}).code == 1);  // --pairs missing

  const auto missing = run({"stats", "--pairs", (dir / "nope.jsonl").string(), "--out", dir.path().string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("nope.jsonl") != std::string::npos);

  dir.write("bad.jsonl", "{\"misinfo_id\":\"m\"}\n");
  const auto bad = run({"stats", "--pairs", (dir / "bad.jsonl").string(), "--out", (dir / "runs").string(),
                        "--run-name", "bad"});
  CHECK(bad.code == 2);
  // A failed run leaves no directory behind.
  CHECK_FALSE(std::filesystem::exists(dir / "runs/bad"));

  dir.write("cfg.json", R"({"thresholds": {"dedup": 1.5}})");
  CHECK(run({"stats", "--pairs", fixture(), "--config", (dir / "cfg.json").string(), "--out", dir.path().string()})
            .code == 2);
  dir.write("typo.json", R"({"thresholdz": {}})");
  const auto typo =
      run({"stats", "--pairs", fixture(), "--config", (dir / "typo.json").string(), "--out", dir.path().string()});
  CHECK(typo.code == 2);
  CHECK(typo.err.find("thresholdz") != std::string::npos);

  const auto live = run({"ingest", "--items", fixture(), "--backend", "live", "--out", dir.path().string()});
  CHECK(live.code == 2);
}

TEST_CASE("config values flow into the run and flags override them") {
  test::TempDir dir;
  dir.write("cfg.json", R"({"seed": 17, "cleaning": {"min_words": 5}, "paths": {"corpus": ")" + fixture() + R"("}})");
  const auto r = run({"stats", "--config", (dir / "cfg.json").string(), "--seed", "99", "--out",
                      dir.path().string(), "--run-name", "x"});
  REQUIRE(r.code == 0);
  const auto cfg = json::parse(test::slurp(dir / "x/config.json"));
  CHECK(cfg["seed"] == 99);
  CHECK(cfg["cleaning"]["min_words"] == 5);
  const auto cmd = json::parse(test::slurp(dir / "x/command.json"));
  CHECK(cmd.dump().find("stats") != std::string::npos);

  // Default run names are unique per invocation.
  const auto a = run({"stats", "--pairs", fixture(), "--out", (dir / "auto").string()});
  const auto b = run({"stats", "--pairs", fixture(), "--out", (dir / "auto").string()});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "auto")) ++n;
  CHECK(n == 2);
}

TEST_CASE("ingest, autolabel, sample and rebalance write their artifacts") {
  test::TempDir dir;
  write_toy(dir);
  dir.write("queries.json", R"({"virus": ["m0t0", "m0t1", "ghost"]})");
  const auto out = (dir / "runs").string();
  auto r = run({"ingest", "--items", (dir / "items.jsonl").string(), "--queries", (dir / "queries.json").string(),
                "--tweets", (dir / "tweets.jsonl").string(), "--out", out, "--run-name", "i"});
  REQUIRE(r.code == 0);
  CHECK(read_pairs(dir / "runs/i/pairs.jsonl").size() == 6);
  CHECK(test::slurp(dir / "runs/i/missing.txt") == "ghost\n");

  r = run({"autolabel", "--pairs", (dir / "pairs.jsonl").string(), "--out", out, "--run-name", "a"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("auto-labeled 9 pairs") != std::string::npos);

  r = run({"sample", "--pairs", (dir / "pairs.jsonl").string(), "--split", "--out", out, "--run-name", "s"});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "runs/s/selection.csv"));

  r = run({"rebalance", "--examples", (dir / "pairs.jsonl").string(), "--target", "2", "--out", out, "--run-name",
           "r"});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "runs/r/rebalance.json"));
}

TEST_CASE("train, score and eval reproduce byte-identical metrics") {
  test::TempDir dir;
  write_toy(dir);
  const auto texts = {(dir / "tweets.jsonl").string(), (dir / "items.jsonl").string()};
  auto train_args = [&](const std::string& name) {
    std::vector<std::string> a = {"train", "--examples", (dir / "pairs.jsonl").string(), "--features", "tfidf",
                                  "--epochs", "40", "--seed", "7", "--out", (dir / "runs").string(), "--run-name",
                                  name};
    for (const auto& t : texts) {
      a.push_back("--texts");
      a.push_back(t);
    }
    return a;
  };
  REQUIRE(run(train_args("t1")).code == 0);
  REQUIRE(run(train_args("t2")).code == 0);
  for (const char* f : {"head.json", "train_metrics.json", "loss_trace.csv", "features.json"}) {
    CHECK(test::slurp(dir / "runs/t1" / f) == test::slurp(dir / "runs/t2" / f));
  }
  CHECK(test::slurp(dir / "runs/t1/loss_trace.csv").rfind("epoch,loss\n", 0) == 0);

  std::vector<std::string> score = {"score", "--model", (dir / "runs/t1").string(), "--examples",
                                    (dir / "pairs.jsonl").string(), "--out", (dir / "runs").string(),
                                    "--run-name", "sc"};
  for (const auto& t : texts) {
    score.push_back("--texts");
    score.push_back(t);
  }
  const auto sr = run(score);
  REQUIRE(sr.code == 0);
  const auto sm = json::parse(test::slurp(dir / "runs/sc/metrics.json"));
  CHECK(sm["overall"]["accuracy"] == 1.0);

  const auto e = run({"eval", "--gold", (dir / "pairs.jsonl").string(), "--pred",
                      (dir / "runs/sc/predictions.jsonl").string(), "--pred",
                      (dir / "runs/sc/predictions.jsonl").string(), "--out", (dir / "runs").string(), "--run-name",
                      "ev"});
  REQUIRE(e.code == 0);
  const auto summary = json::parse(test::slurp(dir / "runs/ev/summary.json"));
  CHECK(summary["accuracy"]["sd"] == 0.0);

  // A head trained on other features is refused.
  test::TempDir emb;
  SentenceEmbeddingStore store;
  store.dim = 2;
  for (const auto& p : read_pairs(dir / "pairs.jsonl")) {
    store.vectors[p.misinfo_id] = {1.0, 0.0};
    store.vectors[p.tweet_id] = {0.0, 1.0};
  }
  write_sentence_embeddings(emb / "s.jsonl", store);
  const auto mismatch = run({"score", "--model", (dir / "runs/t1").string(), "--examples",
                             (dir / "pairs.jsonl").string(), "--embeddings", (emb / "s.jsonl").string(), "--texts",
                             (dir / "tweets.jsonl").string(), "--out", (dir / "runs").string()});
  CHECK(mismatch.code == 2);
}

TEST_CASE("sbert training and the ablation grid run end to end") {
  test::TempDir dir;
  write_toy(dir);
  SentenceEmbeddingStore store;
  store.dim = 3;
  std::mt19937_64 gen(1);
  std::normal_distribution<double> N(0.0, 0.1);
  for (const auto& p : read_pairs(dir / "pairs.jsonl")) {
    store.vectors[p.misinfo_id] = {1.0, 1.0, 1.0};
    const int k = code(*p.label);
    store.vectors[p.tweet_id] = {k == 0 ? 1.0 + N(gen) : N(gen), k == 1 ? 1.0 + N(gen) : N(gen),
                                 k == 2 ? 1.0 + N(gen) : N(gen)};
  }
  write_sentence_embeddings(dir / "sent.jsonl", store);
  const auto out = (dir / "runs").string();
  auto r = run({"train", "--examples", (dir / "pairs.jsonl").string(), "--embeddings", (dir / "sent.jsonl").string(),
                "--weighted", "--epochs", "50", "--out", out, "--run-name", "sb"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(test::slurp(dir / "runs/sb/features.json"))["spec"] ==
        "sbert;dim=9;orientation=tweet_as_premise");

  r = run({"ablate", "--dataset", "a=" + (dir / "pairs.jsonl").string(), "--dataset",
           "b=" + (dir / "pairs.jsonl").string(), "--test", (dir / "pairs.jsonl").string(), "--embeddings",
           (dir / "sent.jsonl").string(), "--seeds", "2", "--epochs", "5", "--out", out, "--run-name", "ab"});
  REQUIRE(r.code == 0);
  const auto t = json::parse(test::slurp(dir / "runs/ab/ablation.json"));
  CHECK(t["notes"].size() == 1);
}
