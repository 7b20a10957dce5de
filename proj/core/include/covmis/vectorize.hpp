// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

// TF-IDF vectors, cosine similarity, averaged word embeddings and loaders
// for externally produced sentence and token embeddings.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "covmis/linalg.hpp"

namespace covmis {

/// Sparse vector as (index, weight) entries with strictly increasing indices.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool is_zero() const { return entries.empty(); }
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

double dot(const SparseVector& a, const SparseVector& b);
double l2_norm(const SparseVector& v);

/// Fitted n-gram TF-IDF vectorizer.
///
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1, vocabulary sorted lexicographically.
class TfidfModel {
 public:
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const std::vector<double>& idf() const { return idf_; }
  const std::vector<int>& orders() const { return orders_; }
  std::size_t size() const { return vocab_.size(); }

  /// Column index of an n-gram, or -1 when unseen.
  std::int64_t index_of(const std::string& term) const;

  friend TfidfModel fit_tfidf(const std::vector<std::vector<std::string>>& docs,
                              const std::vector<int>& orders);
  /// Rebuilds a fitted model from its parts (vocabulary must be sorted and
  /// unique, idf the same length). Throws std::invalid_argument otherwise.
  static TfidfModel restore(std::vector<std::string> vocabulary, std::vector<double> idf,
                            std::vector<int> orders);

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<double> idf_;
  std::vector<int> orders_;
};

/// Fits over token lists; n-grams are generated internally. Throws
/// std::invalid_argument when no document has a token.
TfidfModel fit_tfidf(const std::vector<std::vector<std::string>>& docs,
                     const std::vector<int>& orders = {1, 2});

/// Raw term counts times idf, L2-normalized. Unseen n-grams are ignored.
SparseVector transform(const TfidfModel& model, const std::vector<std::string>& tokens);

/// dot(a, b) / (|a| |b|); 0 when either side is all-zero.
double cosine(const SparseVector& a, const SparseVector& b);
/// Dense variant. Throws std::invalid_argument on a dimension mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

/// word -> dense vector, uniform dimension.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }

  /// Throws std::invalid_argument when the dimension differs or the word
  /// is already present.
  void add(const std::string& word, std::span<const double> vec);
  const double* find(const std::string& word) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

/// Mean of the vectors of in-vocabulary tokens; zero vector when none are
/// known. Throws std::invalid_argument on an empty table.
std::vector<double> avg_embedding(const std::vector<std::string>& tokens,
                                  const EmbeddingTable& table);

/// id -> sentence vector.
struct SentenceEmbeddingStore {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> vectors;

  const std::vector<double>& at(const std::string& id) const;
  friend bool operator==(const SentenceEmbeddingStore&, const SentenceEmbeddingStore&) = default;
};

/// id -> token matrix (tokens x dim) with the token strings alongside.
struct TokenEmbeddingStore {
  struct Entry {
    std::vector<std::string> tokens;
    Matrix vectors;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::size_t dim = 0;
  std::map<std::string, Entry> entries;

  const Entry& at(const std::string& id) const;
  friend bool operator==(const TokenEmbeddingStore&, const TokenEmbeddingStore&) = default;
};

enum class EmbeddingKind { Word, Sentence, Token };
EmbeddingKind parse_embedding_kind(std::string_view s);

// File formats (floats are decimal text):
//   word:     "<token> <d floats>" per line, space separated (GloVe text).
//   sentence: "<id> <d floats>" per line, space separated.
//   token:    JSONL {"id": str, "tokens": [str], "vectors": [[d floats], ...]}
// The dimension comes from the first record; any later record with a
// different dimension is a ParseError naming its line.

EmbeddingTable load_word_embeddings(const std::filesystem::path& path);
SentenceEmbeddingStore load_sentence_embeddings(const std::filesystem::path& path);
TokenEmbeddingStore load_token_embeddings(const std::filesystem::path& path);

using EmbeddingStore = std::variant<EmbeddingTable, SentenceEmbeddingStore, TokenEmbeddingStore>;
EmbeddingStore load_embeddings(const std::filesystem::path& path, EmbeddingKind kind);

void write_sentence_embeddings(const std::filesystem::path& path,
                               const SentenceEmbeddingStore& store);
void write_token_embeddings(const std::filesystem::path& path, const TokenEmbeddingStore& store);

}  // namespace covmis
