// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace covmis {

/// Tweet text after normalize_tweet. Holds no tab, newline or carriage
/// return characters and no runs of spaces.
struct NormalizedText {
  std::string text;

  friend bool operator==(const NormalizedText&, const NormalizedText&) = default;
};

/// Tweet normalization, applied in this order:
///   1. tab/newline/carriage return become spaces; space runs collapse to
///      one space; leading and trailing spaces are dropped;
///   2. a run of k @-mentions separated only by whitespace becomes
///      "k twitteruser" ("twitteruser" when k = 1);
///   3. a run of k http(s) URLs becomes "k twitterurl" likewise;
///   4. emoji become their ":alias" text form.
///
/// A mention is '@' followed by [A-Za-z0-9_]+ and not preceded by a word
/// character or another '@'. A URL is "http://" or "https://" plus the
/// following non-space characters. Mentions inside URLs are left alone.
NormalizedText normalize_tweet(std::string_view raw);

/// ":alias" for an emoji sequence, or empty when `seq` is not an emoji.
std::string_view emoji_alias(std::string_view seq);

/// Replaces every emoji (longest match) with its alias. Unknown pictographs
/// pass through unchanged.
std::string replace_emoji(std::string_view text);

/// Lowercased whitespace tokens with leading/trailing ASCII punctuation
/// stripped; tokens left empty are dropped.
std::vector<std::string> tokenize(const NormalizedText& text);

/// N-grams of the given orders (each 1 or 2), all unigrams first, then all
/// bigrams, in document order. Bigrams join tokens with one space.
std::vector<std::string> ngrams(const std::vector<std::string>& tokens,
                                const std::vector<int>& orders);

}  // namespace covmis
