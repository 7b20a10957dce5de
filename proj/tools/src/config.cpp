// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "covmis/cli.hpp"
#include "covmis/errors.hpp"

namespace covmis {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw DataError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw DataError("unknown config key '" + where + "." + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!in_unit(dedup_threshold)) throw DataError("thresholds.dedup must be in (0, 1]");
  if (!in_unit(bertscore_threshold)) throw DataError("thresholds.bertscore must be in (0, 1]");
  if (undersample_covidlies == 0) throw DataError("undersample.covidlies must be positive");
  if (undersample_rumoureval == 0) throw DataError("undersample.rumoureval must be positive");
  if (!(split_ratio >= 0.0 && split_ratio <= 1.0)) throw DataError("split_ratio must be in [0, 1]");
  if (per_type_quota == 0 || sample_target == 0) throw DataError("sampling values must be positive");
  if (items_per_batch == 0) throw DataError("annotation.items_per_batch must be positive");
  if (annotators[0].empty() || annotators[1].empty() || annotators[0] == annotators[1]) {
    throw DataError("annotation.annotators must be two distinct non-empty ids");
  }
  if (!(train.learning_rate > 0.0)) throw DataError("train.learning_rate must be positive");
  if (train.weight_decay < 0.0) throw DataError("train.weight_decay must be non-negative");
  if (train.epochs == 0) throw DataError("train.epochs must be positive");
}

std::string RunConfig::to_json() const {
  ojson j;
  j["seed"] = seed;
  j["paths"] = {{"corpus", paths.corpus},
                {"embeddings", paths.embeddings},
                {"fixtures", paths.fixtures},
                {"out", paths.out}};
  j["thresholds"] = {{"dedup", dedup_threshold}, {"bertscore", bertscore_threshold}};
  j["undersample"] = {{"covidlies", undersample_covidlies}, {"rumoureval", undersample_rumoureval}};
  j["split_ratio"] = split_ratio;
  j["sampling"] = {{"per_type_quota", per_type_quota}, {"target", sample_target}};
  j["cleaning"] = {{"min_words", min_words}, {"min_item_tweets", min_item_tweets}};
  j["annotation"] = {{"annotators", annotators}, {"items_per_batch", items_per_batch}};
  j["train"] = {{"learning_rate", train.learning_rate},
                {"weight_decay", train.weight_decay},
                {"epochs", train.epochs},
                {"batch_size", train.batch_size}};
  return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& json_text, const std::string& source) {
  RunConfig c;
  try {
    const json j = json::parse(json_text);
    check_keys(j, "config",
               {"seed", "paths", "thresholds", "undersample", "split_ratio", "sampling", "cleaning",
                "annotation", "train"});
    read(j, "seed", c.seed);
    read(j, "split_ratio", c.split_ratio);
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      check_keys(p, "paths", {"corpus", "embeddings", "fixtures", "out"});
      read(p, "corpus", c.paths.corpus);
      read(p, "embeddings", c.paths.embeddings);
      read(p, "fixtures", c.paths.fixtures);
      read(p, "out", c.paths.out);
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      check_keys(t, "thresholds", {"dedup", "bertscore"});
      read(t, "dedup", c.dedup_threshold);
      read(t, "bertscore", c.bertscore_threshold);
    }
    if (j.contains("undersample")) {
      const auto& u = j["undersample"];
      check_keys(u, "undersample", {"covidlies", "rumoureval"});
      read(u, "covidlies", c.undersample_covidlies);
      read(u, "rumoureval", c.undersample_rumoureval);
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      check_keys(s, "sampling", {"per_type_quota", "target"});
      read(s, "per_type_quota", c.per_type_quota);
      read(s, "target", c.sample_target);
    }
    if (j.contains("cleaning")) {
      const auto& s = j["cleaning"];
      check_keys(s, "cleaning", {"min_words", "min_item_tweets"});
      read(s, "min_words", c.min_words);
      read(s, "min_item_tweets", c.min_item_tweets);
    }
    if (j.contains("annotation")) {
      const auto& a = j["annotation"];
      check_keys(a, "annotation", {"annotators", "items_per_batch"});
      read(a, "annotators", c.annotators);
      read(a, "items_per_batch", c.items_per_batch);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      check_keys(t, "train", {"learning_rate", "weight_decay", "epochs", "batch_size"});
      read(t, "learning_rate", c.train.learning_rate);
      read(t, "weight_decay", c.train.weight_decay);
      read(t, "epochs", c.train.epochs);
      read(t, "batch_size", c.train.batch_size);
    }
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  } catch (const json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace covmis
