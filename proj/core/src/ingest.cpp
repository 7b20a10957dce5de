// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/ingest.hpp"

#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace covmis {

std::vector<SearchQuery> build_queries(const MisinfoItem& item) {
  std::vector<SearchQuery> out;
  if (item.news_title && !item.news_title->empty()) out.push_back({QueryType::Title, *item.news_title});
  if (item.news_url && !item.news_url->empty()) out.push_back({QueryType::NewsUrl, *item.news_url});
  if (item.factcheck_url && !item.factcheck_url->empty()) {
    out.push_back({QueryType::FactCheckUrl, *item.factcheck_url});
  }
  std::string conj;
  for (const auto& k : item.keywords) {
    if (k.empty()) continue;
    if (!conj.empty()) conj += ' ';
    conj += k.find(' ') == std::string::npos ? k : "\"" + k + "\"";
  }
  if (!conj.empty()) out.push_back({QueryType::Keywords, std::move(conj)});
  if (out.empty()) throw DataError("misinformation item '" + item.id + "' has no query fields");
  return out;
}

FixtureBackend::FixtureBackend(std::map<std::string, std::vector<std::string>> results,
                               std::vector<Tweet> tweets)
    : results_(std::move(results)) {
  for (auto& t : tweets) {
    auto id = t.id;
    tweets_.emplace(std::move(id), std::move(t));
  }
}

FixtureBackend FixtureBackend::load(const std::filesystem::path& queries,
                                    const std::filesystem::path& tweets) {
  std::ifstream in(queries);
  if (!in) throw DataError("cannot open " + queries.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(queries.string() + ": " + e.what());
  }
  if (!j.is_object()) throw DataError(queries.string() + ": expected a JSON object");
  std::map<std::string, std::vector<std::string>> results;
  for (auto it = j.begin(); it != j.end(); ++it) {
    try {
      results[it.key()] = it.value().get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
      throw DataError(queries.string() + ": value for '" + it.key() + "' must be a list of ids");
    }
  }
  return FixtureBackend(std::move(results), read_tweets(tweets));
}

std::vector<std::string> FixtureBackend::search(const SearchQuery& query) const {
  auto it = results_.find(query.text);
  return it == results_.end() ? std::vector<std::string>{} : it->second;
}

HydrationResult FixtureBackend::hydrate(const std::vector<std::string>& ids) const {
  HydrationResult r;
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) continue;
    auto it = tweets_.find(id);
    if (it == tweets_.end()) r.missing.push_back(id);
    else r.tweets.push_back(it->second);
  }
  return r;
}

std::vector<std::string> LiveStubBackend::search(const SearchQuery&) const {
  throw SearchError(SearchError::Kind::NotImplemented,
                    "live search backend is not implemented; use the fixture backend");
}

HydrationResult LiveStubBackend::hydrate(const std::vector<std::string>&) const {
  throw SearchError(SearchError::Kind::NotImplemented,
                    "live hydration backend is not implemented; use the fixture backend");
}

int attribution_rank(QueryType kind) {
  switch (kind) {
    case QueryType::Title: return 0;
    case QueryType::FactCheckUrl: return 1;
    case QueryType::NewsUrl: return 2;
    case QueryType::Keywords: return 3;
  }
  return 4;
}

RetrievalResult retrieve(const std::vector<MisinfoItem>& items, const SearchBackend& backend) {
  RetrievalResult r;
  std::vector<std::string> all_ids;
  std::set<std::string> seen_ids;
  for (const auto& item : items) {
    std::vector<std::string> order;
    std::unordered_map<std::string, QueryType> best;
    for (const auto& q : build_queries(item)) {
      r.queries.push_back(q);
      for (const auto& id : backend.search(q)) {
        auto [it, inserted] = best.try_emplace(id, q.kind);
        if (inserted) order.push_back(id);
        else if (attribution_rank(q.kind) < attribution_rank(it->second)) it->second = q.kind;
      }
    }
    for (const auto& id : order) {
      StancePair p;
      p.misinfo_id = item.id;
      p.tweet_id = id;
      p.query_type = best[id];
      r.pairs.push_back(std::move(p));
      if (seen_ids.insert(id).second) all_ids.push_back(id);
    }
  }
  auto h = backend.hydrate(all_ids);
  r.tweets = std::move(h.tweets);
  r.missing = std::move(h.missing);
  if (!r.missing.empty()) {
    const std::set<std::string> missing(r.missing.begin(), r.missing.end());
    std::erase_if(r.pairs, [&](const StancePair& p) { return missing.count(p.tweet_id) > 0; });
  }
  return r;
}

}  // namespace covmis
