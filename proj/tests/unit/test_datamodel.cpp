// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include <doctest.h>

#include <random>
#include <sstream>

#include "covmis/datamodel.hpp"
#include "covmis/errors.hpp"
#include "support.hpp"

using namespace covmis;
using covmis::test::TempDir;

namespace {

std::vector<StancePair> random_pairs(std::mt19937_64& gen, std::size_t n) {
  std::vector<StancePair> out;
  std::uniform_int_distribution<int> qt(0, 3), lab(-1, 2), sp(-1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    StancePair p;
    p.misinfo_id = "m" + std::to_string(i % 7);
    p.tweet_id = "t" + std::to_string(i);
    p.query_type = kQueryTypes[qt(gen)];
    const int l = lab(gen);
    if (l >= 0) p.label = label_from_code(l);
    if (p.query_type == QueryType::FactCheckUrl && p.label == Label::Against) p.auto_labeled = true;
    const int s = sp(gen);
    if (s >= 0) p.split = s == 0 ? Split::Validation : Split::Test;
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("label codes are fixed") {
  CHECK(code(Label::Favor) == 0);
  CHECK(code(Label::Against) == 1);
  CHECK(code(Label::Neither) == 2);
  for (auto l : kLabels) {
    CHECK(label_from_code(code(l)) == l);
    CHECK(parse_label(to_string(l)) == l);
  }
  CHECK(parse_label("FAVOR") == Label::Favor);
  CHECK_THROWS_AS(parse_label("agree"), DataError);
  CHECK_THROWS_AS(label_from_code(3), DataError);
}

TEST_CASE("news and fact-check URLs share the URL group") {
  CHECK(group_of(QueryType::NewsUrl) == QueryGroup::Url);
  CHECK(group_of(QueryType::FactCheckUrl) == QueryGroup::Url);
  CHECK(group_of(QueryType::Title) == QueryGroup::Title);
  CHECK(group_of(QueryType::Keywords) == QueryGroup::Keywords);
  for (auto q : kQueryTypes) CHECK(parse_query_type(to_string(q)) == q);
}

TEST_CASE("read_pairs on an empty file gives an empty list") {
  TempDir dir;
  CHECK(read_pairs(dir.write("empty.jsonl", "")).empty());
}

TEST_CASE("pair round-trip is the identity") {
  std::mt19937_64 gen(7);
  TempDir dir;
  for (int trial = 0; trial < 20; ++trial) {
    const auto pairs = random_pairs(gen, 1 + trial * 5);
    write_pairs(dir / "p.jsonl", pairs);
    CHECK(read_pairs(dir / "p.jsonl") == pairs);
  }
}

TEST_CASE("missing tweet_id is reported at its line") {
  std::istringstream in(
      "{\"misinfo_id\":\"m1\",\"tweet_id\":\"t1\",\"query_type\":\"title\"}\n"
      "\n"
      "{\"misinfo_id\":\"m1\",\"query_type\":\"title\"}\n");
  try {
    parse_pairs(in, "pairs.jsonl");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("pairs.jsonl:3") != std::string::npos);
    CHECK(std::string(e.what()).find("tweet_id") != std::string::npos);
  }
}

TEST_CASE("duplicate pairs and inconsistent auto labels are rejected") {
  std::istringstream dup(
      "{\"misinfo_id\":\"m1\",\"tweet_id\":\"t1\",\"query_type\":\"title\"}\n"
      "{\"misinfo_id\":\"m1\",\"tweet_id\":\"t1\",\"query_type\":\"keywords\"}\n");
  CHECK_THROWS_AS(parse_pairs(dup), ParseError);
  std::istringstream bad_auto(
      "{\"misinfo_id\":\"m1\",\"tweet_id\":\"t1\",\"query_type\":\"factcheck_url\","
      "\"label\":\"favor\",\"auto_labeled\":true}\n");
  CHECK_THROWS_AS(parse_pairs(bad_auto), ParseError);

  StancePair p{"m", "t", QueryType::Title, Label::Favor, true, std::nullopt};
  CHECK_THROWS_AS(validate_pairs({p}), DataError);
}

TEST_CASE("tweet word counts follow whitespace tokens") {
  CHECK(count_words("") == 0);
  CHECK(count_words("  one\ttwo\nthree  ") == 3);
  CHECK(make_tweet("t", "a b c", "en").word_count == 3);
  std::istringstream wrong("{\"id\":\"t1\",\"text\":\"a b\",\"lang\":\"en\",\"word_count\":3}\n");
  CHECK_THROWS_AS(parse_tweets(wrong), ParseError);
  std::istringstream right("{\"id\":\"t1\",\"text\":\"a b\",\"lang\":\"en\",\"word_count\":2}\n");
  CHECK(parse_tweets(right).at(0).word_count == 2);
}

TEST_CASE("items round-trip and reject empty text") {
  TempDir dir;
  MisinfoItem m;
  m.id = "m1";
  m.text = "Vitamin C cures it.";
  m.news_title = "A title";
  m.keywords = {"Shanghai", "Vitamin C"};
  write_items(dir / "items.jsonl", {m});
  const auto back = read_items(dir / "items.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == "m1");
  CHECK(back[0].news_title == m.news_title);
  CHECK(!back[0].news_url);
  CHECK(back[0].keywords == m.keywords);
  std::istringstream empty("{\"id\":\"m2\",\"text\":\"\"}\n");
  CHECK_THROWS_AS(parse_items(empty), ParseError);
}

TEST_CASE("dataset_stats on tiny inputs") {
  const auto empty = dataset_stats({});
  CHECK(empty.total() == 0);
  CHECK(empty.group_percent(QueryGroup::Title) == 0.0);

  StancePair p{"m", "t", QueryType::Keywords, Label::Favor, false, std::nullopt};
  const auto one = dataset_stats({p});
  for (auto q : kQueryTypes)
    for (auto l : kLabels) CHECK(one.cell(q, l) == ((q == QueryType::Keywords && l == Label::Favor) ? 1u : 0u));

  StancePair unl{"m9", "t9", QueryType::Title, std::nullopt, false, std::nullopt};
  try {
    dataset_stats({p, unl});
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("m9:t9") != std::string::npos);
  }
}

TEST_CASE("stats cells sum to the input length and percentages to 100") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto pairs = random_pairs(gen, 50 + trial);
    for (auto& p : pairs)
      if (!p.label) p.label = Label::Neither, p.auto_labeled = false;
    const auto t = dataset_stats(pairs);
    std::size_t sum = 0;
    for (auto q : kQueryTypes)
      for (auto l : kLabels) sum += t.cell(q, l);
    CHECK(sum == pairs.size());
    CHECK(t.total() == pairs.size());
    double pct = 0.0;
    for (auto g : kQueryGroups) pct += t.group_percent(g);
    CHECK(pct == doctest::Approx(100.0).epsilon(0.0002));
  }
}

TEST_CASE("stats csv has the fixed header and the merged url row") {
  std::vector<StancePair> pairs = {
      {"m", "t1", QueryType::NewsUrl, Label::Favor, false, std::nullopt},
      {"m", "t2", QueryType::FactCheckUrl, Label::Against, true, std::nullopt},
      {"m", "t3", QueryType::Title, Label::Neither, false, std::nullopt},
      {"m", "t4", QueryType::Keywords, Label::Favor, false, std::nullopt},
  };
  const auto csv = stats_csv(dataset_stats(pairs));
  CHECK(csv.rfind("row,favor,against,neither,total,percent\n", 0) == 0);
  CHECK(csv.find("\nurl,1,1,0,2,50.00\n") != std::string::npos);
  CHECK(csv.find("\ntotal,2,1,1,4,100.00\n") != std::string::npos);
}

TEST_CASE("split_validation uses floor and a seeded partition") {
  std::vector<StancePair> pairs;
  for (int i = 0; i < 2631; ++i) pairs.push_back({"m", "t" + std::to_string(i), QueryType::Keywords, Label::Favor, false, std::nullopt});
  const auto a = split_validation(pairs, 0.2, 5);
  const auto n_val = std::count_if(a.begin(), a.end(), [](const StancePair& p) { return p.split == Split::Validation; });
  const auto n_test = std::count_if(a.begin(), a.end(), [](const StancePair& p) { return p.split == Split::Test; });
  CHECK(n_val == 526);
  CHECK(n_test == 2105);
  CHECK(split_validation(pairs, 0.2, 5) == a);
  CHECK(split_validation(pairs, 0.2, 6) != a);

  const auto none = split_validation(pairs, 0.0, 1);
  CHECK(std::all_of(none.begin(), none.end(), [](const StancePair& p) { return p.split == Split::Test; }));
  CHECK_THROWS_AS(split_validation(pairs, 1.5, 1), std::invalid_argument);
}
