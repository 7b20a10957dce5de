// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "covmis/datamodel.hpp"

namespace covmis {

struct SearchQuery {
  QueryType kind;
  std::string text;

  friend bool operator==(const SearchQuery&, const SearchQuery&) = default;
};

/// One query per present field, in the order title, news URL, fact-check
/// URL, keywords. Keywords form a single conjunction; multi-word terms are
/// double-quoted. Throws DataError when the item has no query field.
std::vector<SearchQuery> build_queries(const MisinfoItem& item);

class SearchError : public std::runtime_error {
 public:
  enum class Kind { NotImplemented, RateLimited, Transport };

  SearchError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct HydrationResult {
  std::vector<Tweet> tweets;
  std::vector<std::string> missing;
};

/// Tweet search and hydration. Implementations must tolerate concurrent calls.
class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> search(const SearchQuery& query) const = 0;
  /// Deduplicates ids (first occurrence wins); ids without a tweet are
  /// reported in `missing`, not thrown.
  virtual HydrationResult hydrate(const std::vector<std::string>& ids) const = 0;
};

/// Immutable in-memory backend: query text -> tweet ids, id -> tweet.
class FixtureBackend final : public SearchBackend {
 public:
  FixtureBackend(std::map<std::string, std::vector<std::string>> results, std::vector<Tweet> tweets);

  /// Query file: JSON object {query text: [tweet ids]}; tweet file: JSONL
  /// tweets in the dataset schema.
  static FixtureBackend load(const std::filesystem::path& queries,
                             const std::filesystem::path& tweets);

  std::string name() const override { return "fixture"; }
  std::vector<std::string> search(const SearchQuery& query) const override;
  HydrationResult hydrate(const std::vector<std::string>& ids) const override;

 private:
  std::map<std::string, std::vector<std::string>> results_;
  std::map<std::string, Tweet> tweets_;
};

/// Placeholder for a live search client; every call throws
/// SearchError::Kind::NotImplemented.
class LiveStubBackend final : public SearchBackend {
 public:
  std::string name() const override { return "live-stub"; }
  std::vector<std::string> search(const SearchQuery& query) const override;
  HydrationResult hydrate(const std::vector<std::string>& ids) const override;
};

/// Lower rank wins when one tweet is retrieved by several query kinds:
/// Title, FactCheckUrl, NewsUrl, Keywords.
int attribution_rank(QueryType kind);

struct RetrievalResult {
  std::vector<StancePair> pairs;
  std::vector<Tweet> tweets;
  std::vector<std::string> missing;
  std::vector<SearchQuery> queries;
};

/// Searches every query of every item, attributes each (item, tweet) pair
/// to its best-ranked query kind and hydrates all retrieved ids. Pairs whose
/// tweet could not be hydrated are dropped; their ids land in `missing`.
RetrievalResult retrieve(const std::vector<MisinfoItem>& items, const SearchBackend& backend);

}  // namespace covmis
