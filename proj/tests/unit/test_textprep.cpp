// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include <doctest.h>

#include <random>
#include <regex>

#include "covmis/textprep.hpp"

using namespace covmis;

TEST_CASE("mention and URL runs are counted") {
  CHECK(normalize_tweet("@user @user hello").text == "2 twitteruser hello");
  CHECK(normalize_tweet("see http://a.b http://c.d").text == "see 2 twitterurl");
  CHECK(normalize_tweet("hi @bob").text == "hi twitteruser");
  CHECK(normalize_tweet("https://x.y/z?q=1 done").text == "twitterurl done");
  CHECK(normalize_tweet("@a @b @c https://u https://v").text == "3 twitteruser 2 twitterurl");
  // Separate runs stay separate.
  CHECK(normalize_tweet("@a x @b").text == "twitteruser x twitteruser");
}

TEST_CASE("email-like text is not a mention") {
  CHECK(normalize_tweet("mail me at bob@example.com").text == "mail me at bob@example.com");
}

TEST_CASE("whitespace is collapsed and trimmed") {
  CHECK(normalize_tweet("  a\t\tb\n\rc   ").text == "a b c");
  CHECK(normalize_tweet("").text.empty());
  CHECK(normalize_tweet(" \n\t ").text.empty());
}

TEST_CASE("emoji become aliases") {
  CHECK(normalize_tweet("\xF0\x9F\x91\x8D").text == ":thumbs_up");
  CHECK(emoji_alias("\xF0\x9F\x91\x8D") == ":thumbs_up");
  CHECK(normalize_tweet("great \xF0\x9F\x91\x8D").text == "great :thumbs_up");
  // Skin-tone modifier sequences match as a whole.
  CHECK(replace_emoji("\xF0\x9F\x91\x8D\xF0\x9F\x8F\xBD") == ":thumbs_up_medium_skin_tone");
  // Non-emoji code points pass through.
  CHECK(replace_emoji("caf\xC3\xA9") == "caf\xC3\xA9");
  CHECK(emoji_alias("x").empty());
}

TEST_CASE("tokenize lowercases and strips edge punctuation") {
  CHECK(tokenize(NormalizedText{"Hello, world"}) == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize(NormalizedText{""}).empty());
  CHECK(tokenize(normalize_tweet("a  b")) == std::vector<std::string>{"a", "b"});
  CHECK(tokenize(NormalizedText{"(COVID-19) don't !!!"}) == std::vector<std::string>{"covid-19", "don't"});
}

TEST_CASE("ngrams") {
  const std::vector<std::string> abc{"a", "b", "c"};
  CHECK(ngrams(abc, {2}) == std::vector<std::string>{"a b", "b c"});
  CHECK(ngrams(abc, {1, 2}) == std::vector<std::string>{"a", "b", "c", "a b", "b c"});
  CHECK(ngrams({}, {1, 2}).empty());
  CHECK_THROWS_AS(ngrams(abc, {3}), std::invalid_argument);

  std::mt19937_64 gen(3);
  for (std::size_t L = 1; L <= 10; ++L) {
    std::vector<std::string> toks;
    for (std::size_t i = 0; i < L; ++i) toks.push_back(std::to_string(gen() % 5));
    const auto g = ngrams(toks, {1, 2});
    CHECK(g.size() == 2 * L - 1);
    // Brute-force reconstruction in document order.
    std::vector<std::string> expect = toks;
    for (std::size_t i = 0; i + 1 < L; ++i) expect.push_back(toks[i] + " " + toks[i + 1]);
    CHECK(g == expect);
  }
}

namespace {

std::string random_tweet(std::mt19937_64& gen) {
  static const std::vector<std::string> pieces = {
      "word", "COVID", "@user", "@x_1", "http://a.b/c", "https://t.co/xyz", "\xF0\x9F\x91\x8D",
      "\xF0\x9F\x98\x82", "\xE2\x9D\xA4\xEF\xB8\x8F", "5G", "a@b.c", "@@odd", "!!", "caf\xC3\xA9",
      "\xF0\x9F\x87\xBA\xF0\x9F\x87\xB8", "#tag", "2", "twitteruser"};
  static const std::vector<std::string> gaps = {" ", "  ", "\t", "\n", " \r\n ", ""};
  std::string s;
  const auto n = gen() % 12;
  for (std::size_t i = 0; i < n; ++i) {
    s += gaps[gen() % gaps.size()];
    s += pieces[gen() % pieces.size()];
  }
  if (gen() % 2) s += gaps[gen() % gaps.size()];
  return s;
}

}  // namespace

TEST_CASE("normalization is idempotent and leaves no raw mentions or URLs") {
  std::mt19937_64 gen(42);
  const std::regex mention(R"((^|[^A-Za-z0-9_@])@[A-Za-z0-9_])");
  const std::regex url(R"((^|[^A-Za-z0-9_])https?://)");
  for (int i = 0; i < 2000; ++i) {
    const auto raw = random_tweet(gen);
    const auto once = normalize_tweet(raw);
    CHECK(normalize_tweet(once.text) == once);
    CHECK(once.text.find_first_of("\t\n\r") == std::string::npos);
    CHECK(once.text.find("  ") == std::string::npos);
    CHECK_FALSE(std::regex_search(once.text, mention));
    CHECK_FALSE(std::regex_search(once.text, url));
  }
}
