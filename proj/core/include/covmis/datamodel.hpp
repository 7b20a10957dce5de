// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

// Domain types shared by every pipeline stage, the JSON-lines dataset
// format, Table-4 style statistics and the validation/test split.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covmis/errors.hpp"

namespace covmis {

/// Stance label. Integer codes are fixed: Favor = 0, Against = 1, Neither = 2.
enum class Label : int { Favor = 0, Against = 1, Neither = 2 };

inline constexpr std::array<Label, 3> kLabels = {Label::Favor, Label::Against,
                                                 Label::Neither};
inline constexpr std::size_t kNumLabels = 3;

constexpr int code(Label l) { return static_cast<int>(l); }
Label label_from_code(int code);

/// "favor" / "against" / "neither".
std::string_view to_string(Label l);
/// Case-insensitive inverse of to_string. Throws DataError on anything else.
Label parse_label(std::string_view s);

/// Retrieval route that linked a tweet to a misinformation item.
enum class QueryType : int { Title = 0, NewsUrl = 1, FactCheckUrl = 2, Keywords = 3 };

inline constexpr std::array<QueryType, 4> kQueryTypes = {
    QueryType::Title, QueryType::NewsUrl, QueryType::FactCheckUrl, QueryType::Keywords};
inline constexpr std::size_t kNumQueryTypes = 4;

/// "title" / "news_url" / "factcheck_url" / "keywords".
std::string_view to_string(QueryType q);
QueryType parse_query_type(std::string_view s);

/// The three reporting groups used in published tables: news and
/// fact-check URLs are merged into one "url" row.
enum class QueryGroup : int { Title = 0, Url = 1, Keywords = 2 };
inline constexpr std::array<QueryGroup, 3> kQueryGroups = {QueryGroup::Title, QueryGroup::Url,
                                                           QueryGroup::Keywords};
QueryGroup group_of(QueryType q);
std::string_view to_string(QueryGroup g);

enum class Split : int { Validation = 0, Test = 1 };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct MisinfoItem {
  std::string id;
  std::string text;
  std::optional<std::string> news_title;
  std::optional<std::string> news_url;
  std::optional<std::string> factcheck_url;
  std::vector<std::string> keywords;

  friend bool operator==(const MisinfoItem&, const MisinfoItem&) = default;
};

struct Tweet {
  std::string id;
  std::string text;
  std::string lang;
  std::size_t word_count = 0;

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

/// Number of whitespace-separated tokens in raw text.
std::size_t count_words(std::string_view text);

/// Tweet with word_count computed from the text.
Tweet make_tweet(std::string id, std::string text, std::string lang);

struct StancePair {
  std::string misinfo_id;
  std::string tweet_id;
  QueryType query_type = QueryType::Keywords;
  std::optional<Label> label;
  bool auto_labeled = false;
  std::optional<Split> split;

  friend bool operator==(const StancePair&, const StancePair&) = default;
};

/// Stable textual key "misinfo_id:tweet_id" used by the annotation service.
std::string pair_key(const StancePair& p);

// --- JSON-lines serialization -------------------------------------------
//
// Pair record:
//   {"misinfo_id": str, "tweet_id": str, "query_type": "title"|"news_url"|
//    "factcheck_url"|"keywords", "label": "favor"|"against"|"neither"|null,
//    "auto_labeled": bool, "split": "validation"|"test"|null}
// "label", "auto_labeled" and "split" may be omitted.
//
// Tweet record:  {"id", "text", "lang", "word_count"?}  (word_count is
//                recomputed when absent and checked when present)
// Item record:   {"id", "text", "news_title"?, "news_url"?, "factcheck_url"?,
//                 "keywords"?: [str]}

std::string to_json_line(const StancePair& p);
std::string to_json_line(const Tweet& t);
std::string to_json_line(const MisinfoItem& m);

/// Parses pair records from a stream. `source` names the stream in errors.
/// Blank lines are skipped; line numbers still count them.
std::vector<StancePair> parse_pairs(std::istream& in, const std::string& source = "<stream>");
std::vector<StancePair> read_pairs(const std::filesystem::path& path);
void write_pairs(const std::filesystem::path& path, const std::vector<StancePair>& pairs);

std::vector<Tweet> parse_tweets(std::istream& in, const std::string& source = "<stream>");
std::vector<Tweet> read_tweets(const std::filesystem::path& path);
void write_tweets(const std::filesystem::path& path, const std::vector<Tweet>& tweets);

std::vector<MisinfoItem> parse_items(std::istream& in, const std::string& source = "<stream>");
std::vector<MisinfoItem> read_items(const std::filesystem::path& path);
void write_items(const std::filesystem::path& path, const std::vector<MisinfoItem>& items);

/// Throws DataError when a pair list violates a pair invariant
/// (duplicate key, auto_labeled without Against).
void validate_pairs(const std::vector<StancePair>& pairs);

// --- statistics ----------------------------------------------------------

struct StatsTable {
  std::array<std::array<std::size_t, kNumLabels>, kNumQueryTypes> counts{};

  std::size_t cell(QueryType q, Label l) const {
    return counts[static_cast<int>(q)][code(l)];
  }
  std::size_t row_total(QueryType q) const;
  std::size_t group_cell(QueryGroup g, Label l) const;
  std::size_t group_total(QueryGroup g) const;
  std::size_t label_total(Label l) const;
  std::size_t total() const;

  /// Percentages with two decimals, 0 when the table is empty.
  double group_percent(QueryGroup g) const;
  double label_percent(Label l) const;
};

/// Counts per (QueryType, Label). Throws DataError listing unlabeled pairs.
StatsTable dataset_stats(const std::vector<StancePair>& pairs);

/// CSV with header "row,favor,against,neither,total,percent". Rows: the four
/// query types, the merged "url" row, "total", and a final "percent" row
/// holding the label shares of the grand total.
std::string stats_csv(const StatsTable& t);

/// Aligned text table in the published layout (Title, URL, Keywords, Total).
std::string stats_text(const StatsTable& t);

/// Marks floor(ratio * n) pairs as validation and the rest as test using a
/// seeded permutation. Throws std::invalid_argument when ratio is outside [0, 1].
std::vector<StancePair> split_validation(std::vector<StancePair> pairs, double ratio,
                                         std::uint64_t seed);

}  // namespace covmis
