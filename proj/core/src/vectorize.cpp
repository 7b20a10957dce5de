// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/vectorize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "covmis/errors.hpp"
#include "covmis/textprep.hpp"

namespace covmis {

using json = nlohmann::json;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  auto i = a.entries.begin();
  auto j = b.entries.begin();
  while (i != a.entries.end() && j != b.entries.end()) {
    if (i->first == j->first) {
      s += i->second * j->second;
      ++i;
      ++j;
    } else if (i->first < j->first) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

double l2_norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [idx, w] : v.entries) s += w * w;
  return std::sqrt(s);
}

std::int64_t TfidfModel::index_of(const std::string& term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

TfidfModel fit_tfidf(const std::vector<std::vector<std::string>>& docs,
                     const std::vector<int>& orders) {
  std::map<std::string, std::size_t> df;
  bool any = false;
  for (const auto& doc : docs) {
    auto grams = ngrams(doc, orders);
    any = any || !grams.empty();
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[std::move(g)];
  }
  if (!any) throw std::invalid_argument("fit_tfidf: corpus has no tokens");

  TfidfModel m;
  m.orders_ = orders;
  const double n = static_cast<double>(docs.size());
  m.vocab_.reserve(df.size());
  m.idf_.reserve(df.size());
  for (auto& [term, count] : df) {
    m.index_.emplace(term, static_cast<std::uint32_t>(m.vocab_.size()));
    m.vocab_.push_back(term);
    m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return m;
}

TfidfModel TfidfModel::restore(std::vector<std::string> vocabulary, std::vector<double> idf,
                               std::vector<int> orders) {
  if (vocabulary.size() != idf.size()) throw std::invalid_argument("tfidf: vocabulary and idf differ in size");
  for (std::size_t i = 1; i < vocabulary.size(); ++i) {
    if (!(vocabulary[i - 1] < vocabulary[i])) throw std::invalid_argument("tfidf: vocabulary not sorted");
  }
  ngrams({}, orders);  // validates the orders
  TfidfModel m;
  m.vocab_ = std::move(vocabulary);
  m.idf_ = std::move(idf);
  m.orders_ = std::move(orders);
  for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.index_.emplace(m.vocab_[i], static_cast<std::uint32_t>(i));
  return m;
}

SparseVector transform(const TfidfModel& model, const std::vector<std::string>& tokens) {
  std::map<std::uint32_t, double> counts;
  for (const auto& g : ngrams(tokens, model.orders())) {
    const auto idx = model.index_of(g);
    if (idx >= 0) counts[static_cast<std::uint32_t>(idx)] += 1.0;
  }
  SparseVector v;
  v.entries.reserve(counts.size());
  double norm2 = 0.0;
  for (const auto& [idx, c] : counts) {
    const double w = c * model.idf()[idx];
    v.entries.emplace_back(idx, w);
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& e : v.entries) e.second *= inv;
  }
  return v;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

void EmbeddingTable::add(const std::string& word, std::span<const double> vec) {
  if (dim_ == 0 && index_.empty()) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw std::invalid_argument("embedding for '" + word + "' has dimension " +
                                std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
  }
  if (!index_.emplace(word, data_.size()).second) {
    throw std::invalid_argument("duplicate embedding for '" + word + "'");
  }
  data_.insert(data_.end(), vec.begin(), vec.end());
}

const double* EmbeddingTable::find(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? nullptr : data_.data() + it->second;
}

std::vector<double> avg_embedding(const std::vector<std::string>& tokens,
                                  const EmbeddingTable& table) {
  if (table.empty()) throw std::invalid_argument("avg_embedding: empty embedding table");
  std::vector<double> out(table.dim(), 0.0);
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    if (const double* v = table.find(t)) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
      ++hits;
    }
  }
  if (hits > 0) {
    for (auto& x : out) x /= static_cast<double>(hits);
  }
  return out;
}

const std::vector<double>& SentenceEmbeddingStore::at(const std::string& id) const {
  auto it = vectors.find(id);
  if (it == vectors.end()) throw DataError("no sentence embedding for id '" + id + "'");
  return it->second;
}

const TokenEmbeddingStore::Entry& TokenEmbeddingStore::at(const std::string& id) const {
  auto it = entries.find(id);
  if (it == entries.end()) throw DataError("no token embeddings for id '" + id + "'");
  return it->second;
}

EmbeddingKind parse_embedding_kind(std::string_view s) {
  if (s == "word") return EmbeddingKind::Word;
  if (s == "sentence") return EmbeddingKind::Sentence;
  if (s == "token") return EmbeddingKind::Token;
  throw DataError("unknown embedding kind '" + std::string(s) + "'");
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

double parse_double(std::string_view tok) {
  // strtod accepts the full decimal grammar; from_chars for double is not
  // available on every supported standard library.
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) {
    throw DataError("not a number: '" + s + "'");
  }
  return v;
}

// Reads "<key> <floats...>" lines and calls fn(key, values, line_no).
template <typename Fn>
void read_keyed_vectors(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<double> values;
    std::string tok;
    try {
      while (ls >> tok) values.push_back(parse_double(tok));
    } catch (const DataError& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    if (values.empty()) throw ParseError(path.string(), line_no, "record '" + key + "' has no values");
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw ParseError(path.string(), line_no,
                       "record '" + key + "' has dimension " + std::to_string(values.size()) +
                           ", expected " + std::to_string(dim));
    }
    fn(key, values, line_no);
  }
}

}  // namespace

EmbeddingTable load_word_embeddings(const std::filesystem::path& path) {
  EmbeddingTable table;
  read_keyed_vectors(path, [&](const std::string& word, const std::vector<double>& v, std::size_t line_no) {
    try {
      table.add(word, v);
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  });
  return table;
}

SentenceEmbeddingStore load_sentence_embeddings(const std::filesystem::path& path) {
  SentenceEmbeddingStore store;
  read_keyed_vectors(path, [&](const std::string& id, const std::vector<double>& v, std::size_t line_no) {
    store.dim = v.size();
    if (!store.vectors.emplace(id, v).second) {
      throw ParseError(path.string(), line_no, "duplicate id '" + id + "'");
    }
  });
  return store;
}

TokenEmbeddingStore load_token_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  TokenEmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto id = j.at("id").get<std::string>();
      auto tokens = j.at("tokens").get<std::vector<std::string>>();
      const auto& vecs = j.at("vectors");
      if (!vecs.is_array() || vecs.empty()) throw DataError("'vectors' must be a non-empty array");
      if (vecs.size() != tokens.size()) throw DataError("tokens/vectors length mismatch");
      const std::size_t d = vecs.front().size();
      if (store.dim == 0) store.dim = d;
      Matrix m(vecs.size(), store.dim);
      for (std::size_t r = 0; r < vecs.size(); ++r) {
        if (vecs[r].size() != store.dim) {
          throw DataError("record '" + id + "' has dimension " + std::to_string(vecs[r].size()) +
                          ", expected " + std::to_string(store.dim));
        }
        for (std::size_t c = 0; c < store.dim; ++c) m(r, c) = vecs[r][c].get<double>();
      }
      if (!store.entries.emplace(id, TokenEmbeddingStore::Entry{std::move(tokens), std::move(m)}).second) {
        throw DataError("duplicate id '" + id + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path, EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::Word: return load_word_embeddings(path);
    case EmbeddingKind::Sentence: return load_sentence_embeddings(path);
    case EmbeddingKind::Token: return load_token_embeddings(path);
  }
  throw std::invalid_argument("unknown embedding kind");
}

namespace {

void put_double(std::ostream& os, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

}  // namespace

void write_sentence_embeddings(const std::filesystem::path& path,
                               const SentenceEmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [id, vec] : store.vectors) {
    out << id;
    for (double v : vec) {
      out << ' ';
      put_double(out, v);
    }
    out << '\n';
  }
}

void write_token_embeddings(const std::filesystem::path& path, const TokenEmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [id, entry] : store.entries) {
    json j;
    j["id"] = id;
    j["tokens"] = entry.tokens;
    json vecs = json::array();
    for (std::size_t r = 0; r < entry.vectors.rows(); ++r) {
      auto row = entry.vectors.row(r);
      vecs.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["vectors"] = std::move(vecs);
    out << j.dump() << '\n';
  }
}

}  // namespace covmis
