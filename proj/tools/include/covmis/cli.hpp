// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "covmis/datamodel.hpp"
#include "covmis/stance.hpp"
#include "covmis/vectorize.hpp"

namespace covmis {

/// Exit statuses of the command-line driver.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInternal = 3 };

struct RunConfig {
  std::uint64_t seed = 0;

  struct Paths {
    std::string corpus;      // default pair file
    std::string embeddings;  // default embedding file
    std::string fixtures;
    std::string out = "runs";
  } paths;

  double dedup_threshold = 0.8;
  double bertscore_threshold = 0.4;
  std::size_t undersample_covidlies = 400;
  std::size_t undersample_rumoureval = 550;
  double split_ratio = 0.2;

  std::size_t per_type_quota = 6;
  std::size_t sample_target = 24;
  std::size_t min_words = 10;
  std::size_t min_item_tweets = 24;

  std::array<std::string, 2> annotators{"annotator_a", "annotator_b"};
  std::size_t items_per_batch = 12;

  TrainConfig train;

  /// Throws DataError naming the offending field.
  void validate() const;
  std::string to_json() const;
};

/// Overlays a JSON config file on the defaults. Unknown keys are errors.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text, const std::string& source = "<config>");

/// One row of an example file. Accepts both the pair record
/// (misinfo_id/tweet_id, identity labels, query_type) and the training
/// record (target_id/text_id, labels in `scheme`).
struct ExampleRow {
  std::string target_id;  // misinformation / claim / hypothesis side
  std::string text_id;    // tweet / premise side
  std::optional<Label> label;
  std::optional<QueryType> query_type;

  std::string key() const { return target_id + ":" + text_id; }
};

std::vector<ExampleRow> read_examples(const std::filesystem::path& path,
                                      LabelScheme scheme = LabelScheme::Identity);

enum class FeatureKind { Sbert, Glove, Tfidf };
FeatureKind parse_feature_kind(std::string_view s);
std::string_view to_string(FeatureKind k);

/// Everything needed to turn an (target, text) pair into a feature row.
struct FeatureSource {
  FeatureKind kind = FeatureKind::Sbert;
  Orientation orientation = Orientation::TweetAsPremise;
  std::optional<SentenceEmbeddingStore> sentences;  // sbert
  std::optional<EmbeddingTable> words;              // glove
  std::optional<TfidfModel> tfidf;                  // tfidf
  std::map<std::string, std::vector<std::string>> tokens;  // id -> tokens (glove, tfidf)

  std::size_t dim() const;
  /// Stable description stored with a trained head.
  std::string spec() const;
  void add_row(FeatureMatrix& m, const ExampleRow& row) const;
};

/// id -> tokens from JSONL {"id", "text"} files (tweets and items both fit).
std::map<std::string, std::vector<std::string>> read_token_texts(
    const std::vector<std::filesystem::path>& paths);

/// Runs the driver. argv[0] is the program name. Output that would go to the
/// terminal is written to `out` / `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace covmis
