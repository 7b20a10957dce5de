// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

// Corpus cleaning (five ordered steps) and the per-item sampler that picks
// roughly 24 annotation candidates per misinformation item.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "covmis/datamodel.hpp"
#include "covmis/vectorize.hpp"

namespace covmis {

struct CleaningConfig {
  double dedup_threshold = 0.8;
  std::size_t min_words = 10;
  std::size_t min_item_tweets = 24;
  std::string language = "en";
  /// N-gram orders of the vectorizer used for near-duplicate detection.
  std::vector<int> dedup_orders = {1};
  std::uint64_t seed = 0;
};

struct CleaningReport {
  std::size_t input_pairs = 0;
  std::size_t duplicate_id = 0;
  std::size_t non_english = 0;
  std::size_t short_text = 0;
  std::size_t near_duplicate = 0;
  std::size_t low_support_item = 0;
  std::size_t surviving = 0;

  std::size_t removed() const {
    return duplicate_id + non_english + short_text + near_duplicate + low_support_item;
  }
  std::string to_json() const;
};

struct CleanResult {
  std::vector<StancePair> pairs;
  CleaningReport report;
};

/// Runs the cleaning steps in order:
///   1. duplicate tweet ids: one pair per tweet id survives, chosen at random;
///   2. tweets whose language is not config.language;
///   3. tweets with fewer than config.min_words words;
///   4. near-duplicate texts: TF-IDF fitted on the tweets surviving step 3,
///      pairs with cosine > threshold grouped transitively, one random
///      member kept per group;
///   5. items left with fewer than config.min_item_tweets pairs.
/// Surviving pairs keep their input order. Throws DataError when a pair
/// references a tweet id missing from `tweets`.
CleanResult clean(const std::vector<Tweet>& tweets, const std::vector<StancePair>& pairs,
                  const CleaningConfig& config);

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t x);
  bool unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Connected components of the graph whose edges join vectors with
/// cosine > threshold. Groups are ordered by their first member, members
/// keep input order. Throws std::invalid_argument unless threshold is in (0, 1].
std::vector<std::vector<std::string>> near_duplicate_groups(
    const std::vector<std::pair<std::string, SparseVector>>& vectors, double threshold);

/// Index-based form of near_duplicate_groups.
std::vector<std::vector<std::size_t>> near_duplicate_components(
    const std::vector<SparseVector>& vectors, double threshold);

/// How the second-round population N_r is counted.
enum class RemainderMode {
  /// N_r = sum over oversized types of (N - quota); fixed before drawing.
  Expected,
  /// N_r = tweets of oversized types not picked in a realized first round.
  Realized,
};

struct SamplingConfig {
  std::size_t per_type_quota = 6;
  std::size_t target = 24;
  RemainderMode remainder = RemainderMode::Expected;
};

struct SelectionEntry {
  std::string tweet_id;
  QueryType query_type;
  /// First-round probability p1 (1 for types within quota).
  double first_round = 1.0;
  /// Selection probability p = p1 + p2, clamped to [0, 1].
  double p = 1.0;
};

/// Per-item selection probabilities.
struct SelectionPlan {
  std::string misinfo_id;
  std::array<std::size_t, kNumQueryTypes> type_counts{};  // N per query type
  std::size_t still_needed = 0;                           // m
  std::size_t remainder_pool = 0;                         // N_r
  SamplingConfig config;
  std::vector<SelectionEntry> entries;

  double expected_count() const;
};

/// Tweets of one misinformation item grouped by query type.
using ItemTweets = std::map<QueryType, std::vector<std::string>>;

/// Types with N <= quota get p = 1. For larger types p = p1 + p2 with
/// p1 = quota / N and p2 = (1 - p1) * m / N_r, where
/// m = max(0, target - sum_type min(quota, N_type)) and N_r counts the
/// tweets of oversized types beyond their quota.
SelectionPlan selection_probabilities(const ItemTweets& item_tweets,
                                      const SamplingConfig& config = {},
                                      std::string misinfo_id = {});

/// Independent Bernoulli draw per tweet; returns selected tweet ids in plan
/// order. In Realized mode the second round is drawn with m / (unpicked
/// oversized tweets) after the first round.
std::vector<std::string> draw_sample(const SelectionPlan& plan, std::uint64_t seed);

struct SampleResult {
  std::vector<StancePair> pairs;
  std::vector<SelectionPlan> plans;
};

/// Builds a plan per misinformation item (in order of first appearance) and
/// draws from it with a per-item seed derived from `seed`.
SampleResult sample_corpus(const std::vector<StancePair>& pairs, const SamplingConfig& config,
                           std::uint64_t seed);

/// CSV "misinfo_id,tweet_id,query_type,p".
std::string selection_csv(const std::vector<SelectionPlan>& plans);

}  // namespace covmis
