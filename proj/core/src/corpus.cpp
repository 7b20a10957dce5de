// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "covmis/random.hpp"
#include "covmis/textprep.hpp"

namespace covmis {

std::string CleaningReport::to_json() const {
  nlohmann::ordered_json j;
  j["input_pairs"] = input_pairs;
  j["removed"] = {{"duplicate_id", duplicate_id},
                  {"non_english", non_english},
                  {"short", short_text},
                  {"near_duplicate", near_duplicate},
                  {"low_support_item", low_support_item}};
  j["surviving"] = surviving;
  return j.dump(2);
}

UnionFind::UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

std::vector<std::vector<std::size_t>> near_duplicate_components(
    const std::vector<SparseVector>& vectors, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("near-duplicate threshold must lie in (0, 1]");
  }
  const std::size_t n = vectors.size();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = l2_norm(vectors[i]);

  // Inverted index over the vectors seen so far: only pairs sharing a term
  // can have a positive dot product.
  std::unordered_map<std::uint32_t, std::vector<std::pair<std::size_t, double>>> postings;
  UnionFind uf(n);
  std::unordered_map<std::size_t, double> acc;
  for (std::size_t i = 0; i < n; ++i) {
    acc.clear();
    for (const auto& [term, w] : vectors[i].entries) {
      auto it = postings.find(term);
      if (it == postings.end()) continue;
      for (const auto& [j, wj] : it->second) acc[j] += w * wj;
    }
    for (const auto& [j, d] : acc) {
      if (norms[i] == 0.0 || norms[j] == 0.0) continue;
      if (d / (norms[i] * norms[j]) > threshold) uf.unite(i, j);
    }
    for (const auto& [term, w] : vectors[i].entries) postings[term].emplace_back(i, w);
  }

  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::size_t, std::size_t> group_of_root;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = uf.find(i);
    auto [it, inserted] = group_of_root.emplace(root, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

std::vector<std::vector<std::string>> near_duplicate_groups(
    const std::vector<std::pair<std::string, SparseVector>>& vectors, double threshold) {
  std::vector<SparseVector> vs;
  vs.reserve(vectors.size());
  for (const auto& [id, v] : vectors) vs.push_back(v);
  std::vector<std::vector<std::string>> out;
  for (const auto& comp : near_duplicate_components(vs, threshold)) {
    auto& g = out.emplace_back();
    for (auto i : comp) g.push_back(vectors[i].first);
  }
  return out;
}

CleanResult clean(const std::vector<Tweet>& tweets, const std::vector<StancePair>& pairs,
                  const CleaningConfig& config) {
  std::unordered_map<std::string, const Tweet*> by_id;
  for (const auto& t : tweets) by_id.emplace(t.id, &t);
  for (const auto& p : pairs) {
    if (!by_id.count(p.tweet_id)) {
      throw DataError("pair (" + p.misinfo_id + ", " + p.tweet_id + ") references an unknown tweet");
    }
  }

  CleaningReport report;
  report.input_pairs = pairs.size();
  std::vector<bool> alive(pairs.size(), true);

  // 1. duplicate tweet ids
  {
    Rng rng(derive_seed(config.seed, "clean/duplicate_id"));
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      auto [it, inserted] = groups.try_emplace(pairs[i].tweet_id);
      if (inserted) order.push_back(pairs[i].tweet_id);
      it->second.push_back(i);
    }
    for (const auto& id : order) {
      const auto& members = groups[id];
      if (members.size() < 2) continue;
      const auto keep = members[rng.below(members.size())];
      for (auto i : members) {
        if (i != keep) {
          alive[i] = false;
          ++report.duplicate_id;
        }
      }
    }
  }

  // 2. language, 3. length
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!alive[i]) continue;
    const Tweet& t = *by_id.at(pairs[i].tweet_id);
    if (t.lang != config.language) {
      alive[i] = false;
      ++report.non_english;
    } else if (t.word_count < config.min_words) {
      alive[i] = false;
      ++report.short_text;
    }
  }

  // 4. near-duplicate contents
  {
    std::vector<std::size_t> idx;
    std::vector<std::vector<std::string>> docs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!alive[i]) continue;
      idx.push_back(i);
      docs.push_back(tokenize(normalize_tweet(by_id.at(pairs[i].tweet_id)->text)));
    }
    const bool has_tokens =
        std::any_of(docs.begin(), docs.end(), [](const auto& d) { return !d.empty(); });
    if (idx.size() > 1 && has_tokens) {
      const auto model = fit_tfidf(docs, config.dedup_orders);
      std::vector<SparseVector> vecs;
      vecs.reserve(docs.size());
      for (const auto& d : docs) vecs.push_back(transform(model, d));
      Rng rng(derive_seed(config.seed, "clean/near_duplicate"));
      for (const auto& group : near_duplicate_components(vecs, config.dedup_threshold)) {
        if (group.size() < 2) continue;
        const auto keep = group[rng.below(group.size())];
        for (auto g : group) {
          if (g != keep) {
            alive[idx[g]] = false;
            ++report.near_duplicate;
          }
        }
      }
    }
  }

  // 5. low-support items
  {
    std::unordered_map<std::string, std::size_t> support;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (alive[i]) ++support[pairs[i].misinfo_id];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (alive[i] && support[pairs[i].misinfo_id] < config.min_item_tweets) {
        alive[i] = false;
        ++report.low_support_item;
      }
    }
  }

  CleanResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (alive[i]) result.pairs.push_back(pairs[i]);
  report.surviving = result.pairs.size();
  result.report = report;
  return result;
}

double SelectionPlan::expected_count() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.p;
  return s;
}

SelectionPlan selection_probabilities(const ItemTweets& item_tweets, const SamplingConfig& config,
                                      std::string misinfo_id) {
  SelectionPlan plan;
  plan.misinfo_id = std::move(misinfo_id);
  plan.config = config;
  const std::size_t quota = config.per_type_quota;

  std::size_t first_round_total = 0;
  for (const auto& [type, ids] : item_tweets) {
    plan.type_counts[static_cast<int>(type)] = ids.size();
    first_round_total += std::min(quota, ids.size());
    if (ids.size() > quota) plan.remainder_pool += ids.size() - quota;
  }
  plan.still_needed = config.target > first_round_total ? config.target - first_round_total : 0;

  for (const auto& [type, ids] : item_tweets) {
    const std::size_t n = ids.size();
    double p1 = 1.0, p = 1.0;
    if (n > quota) {
      p1 = static_cast<double>(quota) / static_cast<double>(n);
      const double p2 = plan.remainder_pool == 0
                            ? 0.0
                            : (1.0 - p1) * static_cast<double>(plan.still_needed) /
                                  static_cast<double>(plan.remainder_pool);
      p = std::clamp(p1 + p2, 0.0, 1.0);
    }
    for (const auto& id : ids) plan.entries.push_back({id, type, p1, p});
  }
  return plan;
}

std::vector<std::string> draw_sample(const SelectionPlan& plan, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> selected;
  if (plan.config.remainder == RemainderMode::Expected) {
    for (const auto& e : plan.entries)
      if (rng.uniform01() < e.p) selected.push_back(e.tweet_id);
    return selected;
  }

  std::vector<bool> picked(plan.entries.size(), false);
  std::size_t unpicked = 0;
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const auto& e = plan.entries[i];
    picked[i] = rng.uniform01() < e.first_round;
    if (!picked[i]) ++unpicked;
  }
  const double p2 = unpicked == 0 ? 0.0
                                  : std::min(1.0, static_cast<double>(plan.still_needed) /
                                                      static_cast<double>(unpicked));
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    if (!picked[i]) picked[i] = rng.uniform01() < p2;
    if (picked[i]) selected.push_back(plan.entries[i].tweet_id);
  }
  return selected;
}

SampleResult sample_corpus(const std::vector<StancePair>& pairs, const SamplingConfig& config,
                           std::uint64_t seed) {
  std::vector<std::string> item_order;
  std::unordered_map<std::string, ItemTweets> items;
  for (const auto& p : pairs) {
    auto [it, inserted] = items.try_emplace(p.misinfo_id);
    if (inserted) item_order.push_back(p.misinfo_id);
    it->second[p.query_type].push_back(p.tweet_id);
  }

  SampleResult result;
  std::set<std::pair<std::string, std::string>> chosen;
  for (const auto& id : item_order) {
    auto plan = selection_probabilities(items[id], config, id);
    for (auto& t : draw_sample(plan, derive_seed(seed, "sample/" + id))) chosen.emplace(id, std::move(t));
    result.plans.push_back(std::move(plan));
  }
  for (const auto& p : pairs)
    if (chosen.count({p.misinfo_id, p.tweet_id})) result.pairs.push_back(p);
  return result;
}

std::string selection_csv(const std::vector<SelectionPlan>& plans) {
  std::ostringstream os;
  os << "misinfo_id,tweet_id,query_type,p\n" << std::setprecision(17);
  for (const auto& plan : plans)
    for (const auto& e : plan.entries)
      os << plan.misinfo_id << ',' << e.tweet_id << ',' << to_string(e.query_type) << ',' << e.p << '\n';
  return os.str();
}

}  // namespace covmis
