// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include <fstream>

#include <json.hpp>

#include "covmis/cli.hpp"
#include "covmis/errors.hpp"
#include "covmis/textprep.hpp"

namespace covmis {

using json = nlohmann::json;

std::vector<ExampleRow> read_examples(const std::filesystem::path& path, LabelScheme scheme) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<ExampleRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ExampleRow r;
      if (j.contains("misinfo_id")) {
        r.target_id = j.at("misinfo_id").get<std::string>();
        r.text_id = j.at("tweet_id").get<std::string>();
        if (j.contains("label") && j["label"].is_string()) r.label = parse_label(j["label"].get<std::string>());
        if (j.contains("query_type")) r.query_type = parse_query_type(j["query_type"].get<std::string>());
      } else {
        r.target_id = j.at("target_id").get<std::string>();
        r.text_id = j.at("text_id").get<std::string>();
        if (j.contains("label") && j["label"].is_string()) {
          r.label = map_label(j["label"].get<std::string>(), scheme);
        }
      }
      rows.push_back(std::move(r));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return rows;
}

FeatureKind parse_feature_kind(std::string_view s) {
  if (s == "sbert") return FeatureKind::Sbert;
  if (s == "glove") return FeatureKind::Glove;
  if (s == "tfidf") return FeatureKind::Tfidf;
  throw DataError("unknown feature kind '" + std::string(s) + "' (expected sbert, glove or tfidf)");
}

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Sbert: return "sbert";
    case FeatureKind::Glove: return "glove";
    case FeatureKind::Tfidf: return "tfidf";
  }
  return "?";
}

std::size_t FeatureSource::dim() const {
  switch (kind) {
    case FeatureKind::Sbert:
      if (!sentences) throw DataError("sbert features need sentence embeddings");
      return 3 * sentences->dim;
    case FeatureKind::Glove:
      if (!words) throw DataError("glove features need word embeddings");
      return 2 * words->dim();
    case FeatureKind::Tfidf:
      if (!tfidf) throw DataError("tfidf features need a fitted vocabulary");
      return 2 * tfidf->size();
  }
  return 0;
}

std::string FeatureSource::spec() const {
  return std::string(to_string(kind)) + ";dim=" + std::to_string(dim()) + ";orientation=" +
         (orientation == Orientation::TweetAsPremise ? "tweet_as_premise" : "misinfo_as_premise");
}

namespace {

const std::vector<std::string>& tokens_of(const std::map<std::string, std::vector<std::string>>& t,
                                          const std::string& id) {
  auto it = t.find(id);
  if (it == t.end()) throw DataError("no text for id '" + id + "'");
  return it->second;
}

}  // namespace

void FeatureSource::add_row(FeatureMatrix& m, const ExampleRow& row) const {
  const auto [premise, hypothesis] = orient(row.target_id, row.text_id, orientation);
  switch (kind) {
    case FeatureKind::Sbert: {
      const auto f = sbert_features(sentences->at(premise), sentences->at(hypothesis));
      m.add_dense(f);
      break;
    }
    case FeatureKind::Glove: {
      const auto f = glove_pair_features(*words, tokens_of(tokens, premise), tokens_of(tokens, hypothesis));
      m.add_dense(f);
      break;
    }
    case FeatureKind::Tfidf:
      m.add_sparse(tfidf_pair_features(*tfidf, tokens_of(tokens, premise), tokens_of(tokens, hypothesis)));
      break;
  }
}

std::map<std::string, std::vector<std::string>> read_token_texts(
    const std::vector<std::filesystem::path>& paths) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const json j = json::parse(line);
        out[j.at("id").get<std::string>()] = tokenize(normalize_tweet(j.at("text").get<std::string>()));
      } catch (const std::exception& e) {
        throw ParseError(path.string(), line_no, e.what());
      }
    }
  }
  return out;
}

}  // namespace covmis
