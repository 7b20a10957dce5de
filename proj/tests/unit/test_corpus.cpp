// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include <doctest.h>

#include <random>
#include <set>

#include "covmis/corpus.hpp"
#include "covmis/errors.hpp"
#include "covmis/textprep.hpp"
#include "support.hpp"

using namespace covmis;

namespace {

std::string words(std::size_t n, const std::string& stem = "w") {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + stem + std::to_string(i);
  return s;
}

struct Corpus {
  std::vector<Tweet> tweets;
  std::vector<StancePair> pairs;

  void add(const std::string& item, const std::string& id, const std::string& text, std::string lang = "en",
           QueryType q = QueryType::Keywords) {
    tweets.push_back(make_tweet(id, text, std::move(lang)));
    pairs.push_back({item, id, q, std::nullopt, false, std::nullopt});
  }
};

CleaningConfig lenient() {
  CleaningConfig c;
  c.min_item_tweets = 1;
  return c;
}

void check_accounting(const CleaningReport& r) {
  CHECK(r.input_pairs == r.surviving + r.removed());
}

ItemTweets make_item(std::initializer_list<std::pair<QueryType, std::size_t>> sizes) {
  ItemTweets it;
  int k = 0;
  for (const auto& [q, n] : sizes)
    for (std::size_t i = 0; i < n; ++i) it[q].push_back("t" + std::to_string(k++));
  return it;
}

}  // namespace

TEST_CASE("a 9-word English tweet is removed as short") {
  Corpus c;
  c.add("m", "t1", words(9, "a"));
  c.add("m", "t2", words(10, "b"));
  const auto r = clean(c.tweets, c.pairs, lenient());
  CHECK(r.report.short_text == 1);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].tweet_id == "t2");
  check_accounting(r.report);
}

TEST_CASE("non-English tweets are removed before length is checked") {
  Corpus c;
  c.add("m", "t1", words(3, "a"), "fr");
  c.add("m", "t2", words(12, "b"), "de");
  c.add("m", "t3", words(12, "c"));
  const auto r = clean(c.tweets, c.pairs, lenient());
  CHECK(r.report.non_english == 2);
  CHECK(r.report.short_text == 0);
  CHECK(r.report.surviving == 1);
}

TEST_CASE("duplicate tweet ids keep exactly one pair") {
  Corpus c;
  c.add("m1", "t1", words(12));
  c.pairs.push_back({"m2", "t1", QueryType::Title, std::nullopt, false, std::nullopt});
  c.pairs.push_back({"m3", "t1", QueryType::Title, std::nullopt, false, std::nullopt});
  std::set<std::string> kept_items;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto cfg = lenient();
    cfg.seed = seed;
    const auto r = clean(c.tweets, c.pairs, cfg);
    CHECK(r.report.duplicate_id == 2);
    REQUIRE(r.pairs.size() == 1);
    kept_items.insert(r.pairs[0].misinfo_id);
    // Same seed, same choice.
    CHECK(clean(c.tweets, c.pairs, cfg).pairs == r.pairs);
  }
  // The kept pair is chosen at random, not always the first.
  CHECK(kept_items.size() == 3);
}

TEST_CASE("near-duplicates above the threshold keep one") {
  Corpus c;
  const std::string base = "the vaccine contains a microchip that tracks people everywhere they go today";
  c.add("m", "t1", base);
  c.add("m", "t2", base + " wow");
  c.add("m", "t3", "drinking hot water every fifteen minutes kills the virus in your throat");
  const auto r = clean(c.tweets, c.pairs, lenient());
  CHECK(r.report.near_duplicate == 1);
  CHECK(r.report.surviving == 2);
  std::set<std::string> ids;
  for (const auto& p : r.pairs) ids.insert(p.tweet_id);
  CHECK(ids.count("t3") == 1);
  CHECK(ids.count("t1") + ids.count("t2") == 1);
}

TEST_CASE("an item left with 23 tweets loses all its pairs") {
  Corpus c;
  for (int i = 0; i < 23; ++i) c.add("small", "s" + std::to_string(i), words(12, "s" + std::to_string(i) + "_"));
  for (int i = 0; i < 24; ++i) c.add("big", "b" + std::to_string(i), words(12, "b" + std::to_string(i) + "_"));
  const auto r = clean(c.tweets, c.pairs, CleaningConfig{});
  CHECK(r.report.low_support_item == 23);
  CHECK(r.report.surviving == 24);
  for (const auto& p : r.pairs) CHECK(p.misinfo_id == "big");
  check_accounting(r.report);
}

TEST_CASE("unknown tweets are a data error; empty output is fine") {
  Corpus c;
  c.pairs.push_back({"m", "ghost", QueryType::Title, std::nullopt, false, std::nullopt});
  CHECK_THROWS_AS(clean(c.tweets, c.pairs, lenient()), DataError);
  const auto r = clean({}, {}, CleaningConfig{});
  CHECK(r.pairs.empty());
  CHECK(r.report.surviving == 0);
}

TEST_CASE("cleaning report JSON names every step") {
  CleaningReport r;
  r.input_pairs = 5;
  r.short_text = 1;
  r.surviving = 4;
  const auto j = r.to_json();
  for (const char* k : {"duplicate_id", "non_english", "short", "near_duplicate", "low_support_item", "surviving"}) {
    CHECK(j.find(k) != std::string::npos);
  }
}

TEST_CASE("cleaning converges after one extra pass on random corpora") {
  std::mt19937_64 gen(99);
  const std::vector<std::string> vocab = {"virus", "vaccine", "5g", "lab", "cure", "garlic", "bleach", "mask",
                                          "china", "bill", "gates", "chip", "water", "heat", "sun", "tower"};
  for (int trial = 0; trial < 15; ++trial) {
    Corpus c;
    const int n = 60 + static_cast<int>(gen() % 60);
    for (int i = 0; i < n; ++i) {
      std::string text;
      const auto len = 6 + gen() % 10;
      for (std::size_t k = 0; k < len; ++k) text += (k ? " " : "") + vocab[gen() % vocab.size()];
      c.add("m" + std::to_string(gen() % 3), "t" + std::to_string(gen() % (n + 5)) + "_" + std::to_string(i % 2 ? 0 : i),
            text, gen() % 10 == 0 ? "es" : "en");
    }
    CleaningConfig cfg;
    cfg.min_item_tweets = 3;
    cfg.seed = static_cast<std::uint64_t>(trial);
    auto pass = [&](const std::vector<StancePair>& pairs) { return clean(c.tweets, pairs, cfg); };
    const auto one = pass(c.pairs);
    check_accounting(one.report);
    const auto two = pass(one.pairs);
    const auto three = pass(two.pairs);
    CHECK(two.report.duplicate_id == 0);
    CHECK(two.report.non_english == 0);
    CHECK(two.report.short_text == 0);
    CHECK(three.report.removed() == 0);
    CHECK(three.pairs == two.pairs);
  }
}

TEST_CASE("near-duplicate grouping examples") {
  const SparseVector v{{{0, 1.0}, {1, 1.0}}};
  std::vector<std::pair<std::string, SparseVector>> same = {{"a", v}, {"b", v}, {"c", v}};
  const auto g1 = near_duplicate_groups(same, 0.8);
  REQUIRE(g1.size() == 1);
  CHECK(g1[0].size() == 3);

  // a~b (cos 0.894), b~c (cos 0.894), a-c (cos 0.6): one group by closure.
  std::vector<std::pair<std::string, SparseVector>> chain = {
      {"a", SparseVector{{{0, 1.0}, {1, 0.5}}}},
      {"b", SparseVector{{{1, 1.0}, {0, 0.0}}}},
      {"c", SparseVector{{{1, 0.5}, {2, 1.0}}}},
  };
  chain[0].second = SparseVector{{{0, 2.0}, {1, 1.0}}};
  chain[1].second = SparseVector{{{0, 1.0}, {1, 1.0}, {2, 1.0}}};
  chain[2].second = SparseVector{{{1, 1.0}, {2, 2.0}}};
  // Hand check of the three cosines.
  CHECK(cosine(chain[0].second, chain[1].second) > 0.77);
  const auto g2 = near_duplicate_groups(chain, 0.75);
  CHECK(cosine(chain[0].second, chain[2].second) < 0.75);
  REQUIRE(g2.size() == 1);
  CHECK(g2[0].size() == 3);

  std::vector<std::pair<std::string, SparseVector>> apart = {
      {"a", SparseVector{{{0, 1.0}}}}, {"b", SparseVector{{{1, 1.0}}}}, {"c", SparseVector{}}};
  CHECK(near_duplicate_groups(apart, 0.8).size() == 3);

  CHECK_THROWS_AS(near_duplicate_groups(apart, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(near_duplicate_groups(apart, 1.5), std::invalid_argument);
}

TEST_CASE("grouping matches brute-force components and is a partition") {
  std::mt19937_64 gen(1234);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + gen() % 20;
    const std::size_t dims = 2 + gen() % 5;
    std::vector<SparseVector> vs(n);
    for (auto& v : vs)
      for (std::uint32_t d = 0; d < dims; ++d)
        if (U(gen) < 0.6) v.entries.emplace_back(d, U(gen));
    const double thr = 0.5 + 0.45 * U(gen);
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) adj[i][j] = i != j && cosine(vs[i], vs[j]) > thr;
    auto got = near_duplicate_components(vs, thr);
    for (auto& g : got) std::sort(g.begin(), g.end());
    std::sort(got.begin(), got.end());
    CHECK(got == covmis::test::components_oracle(adj));
    std::size_t total = 0;
    std::set<std::size_t> seen;
    for (const auto& g : got)
      for (auto i : g) {
        ++total;
        seen.insert(i);
      }
    CHECK(total == n);
    CHECK(seen.size() == n);
  }
}

TEST_CASE("selection probabilities") {
  const auto small = selection_probabilities(make_item({{QueryType::Title, 5}}));
  for (const auto& e : small.entries) CHECK(e.p == 1.0);

  // Title N = 12, news URL N = 20, fact-check N = 2, keywords N = 6:
  // first round 6 + 6 + 2 + 6 = 20, so m = 4 and N_r = 6 + 14 = 20.
  const auto plan = selection_probabilities(make_item(
      {{QueryType::Title, 12}, {QueryType::NewsUrl, 20}, {QueryType::FactCheckUrl, 2}, {QueryType::Keywords, 6}}));
  CHECK(plan.still_needed == 4);
  CHECK(plan.remainder_pool == 20);
  for (const auto& e : plan.entries) {
    if (e.query_type == QueryType::Title) CHECK(e.p == doctest::Approx(0.6).epsilon(1e-12));
    if (e.query_type == QueryType::NewsUrl) CHECK(e.p == doctest::Approx(0.3 + 0.7 * 4.0 / 20.0).epsilon(1e-12));
    if (e.query_type == QueryType::FactCheckUrl || e.query_type == QueryType::Keywords) CHECK(e.p == 1.0);
  }
  CHECK(plan.expected_count() == doctest::Approx(24.0));

  const auto tiny = selection_probabilities(make_item({{QueryType::Title, 4}, {QueryType::Keywords, 6}}));
  for (const auto& e : tiny.entries) CHECK(e.p == 1.0);

  // Oversupplied first round: m = 0, oversized types keep only the quota share.
  const auto full = selection_probabilities(make_item(
      {{QueryType::Title, 30}, {QueryType::NewsUrl, 30}, {QueryType::FactCheckUrl, 30}, {QueryType::Keywords, 30}}));
  CHECK(full.still_needed == 0);
  for (const auto& e : full.entries) CHECK(e.p == doctest::Approx(0.2));
}

TEST_CASE("selection probabilities stay in [0, 1] and N <= 6 gives 1") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 500; ++trial) {
    ItemTweets it;
    int k = 0;
    for (auto q : kQueryTypes) {
      const auto n = gen() % 40;
      for (std::size_t i = 0; i < n; ++i) it[q].push_back("t" + std::to_string(k++));
    }
    const auto plan = selection_probabilities(it);
    for (const auto& e : plan.entries) {
      CHECK(e.p >= 0.0);
      CHECK(e.p <= 1.0);
      if (plan.type_counts[static_cast<int>(e.query_type)] <= 6) CHECK(e.p == 1.0);
    }
  }
}

TEST_CASE("draw_sample frequencies follow p") {
  SelectionPlan plan;
  plan.entries = {{"one", QueryType::Title, 1.0, 1.0}, {"zero", QueryType::Title, 0.0, 0.0},
                  {"six", QueryType::Title, 0.6, 0.6}};
  int six = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto s = draw_sample(plan, seed);
    const std::set<std::string> got(s.begin(), s.end());
    CHECK(got.count("one") == 1);
    CHECK(got.count("zero") == 0);
    six += static_cast<int>(got.count("six"));
  }
  CHECK(six / 10000.0 == doctest::Approx(0.6).epsilon(0.015 / 0.6));
  CHECK(draw_sample(plan, 77) == draw_sample(plan, 77));
}

TEST_CASE("both remainder modes average about 24 on feasible items") {
  const auto item = make_item(
      {{QueryType::Title, 9}, {QueryType::NewsUrl, 15}, {QueryType::FactCheckUrl, 7}, {QueryType::Keywords, 40}});
  for (auto mode : {RemainderMode::Expected, RemainderMode::Realized}) {
    SamplingConfig cfg;
    cfg.remainder = mode;
    const auto plan = selection_probabilities(item, cfg);
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) total += static_cast<double>(draw_sample(plan, seed).size());
    CHECK(total / 10000.0 == doctest::Approx(24.0).epsilon(0.5 / 24.0));
  }
}

TEST_CASE("sample_corpus is deterministic and keeps only chosen pairs") {
  std::vector<StancePair> pairs;
  for (int m = 0; m < 4; ++m)
    for (int i = 0; i < 50; ++i)
      pairs.push_back({"m" + std::to_string(m), "t" + std::to_string(m) + "_" + std::to_string(i),
                       kQueryTypes[static_cast<std::size_t>(i % 4)], std::nullopt, false, std::nullopt});
  const auto a = sample_corpus(pairs, SamplingConfig{}, 5);
  const auto b = sample_corpus(pairs, SamplingConfig{}, 5);
  CHECK(a.pairs == b.pairs);
  CHECK(a.plans.size() == 4);
  CHECK(a.pairs.size() < pairs.size());
  const auto csv = selection_csv(a.plans);
  CHECK(csv.rfind("misinfo_id,tweet_id,query_type,p\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 201);
}
