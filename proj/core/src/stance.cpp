// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/stance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "covmis/random.hpp"

namespace covmis {

using json = nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

ClassWeights class_weights(const std::array<std::size_t, kNumLabels>& counts) {
  for (auto c : counts) {
    if (c == 0) throw std::invalid_argument("class_weights: every class needs a positive count");
  }
  const double mx = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  ClassWeights cw;
  for (std::size_t k = 0; k < kNumLabels; ++k) cw.w[k] = mx / static_cast<double>(counts[k]);
  return cw;
}

std::array<std::size_t, kNumLabels> label_counts(std::span<const Label> labels) {
  std::array<std::size_t, kNumLabels> c{};
  for (auto l : labels) ++c[code(l)];
  return c;
}

std::vector<std::size_t> undersample_indices(std::span<const Label> labels, std::size_t expected,
                                             std::uint64_t seed) {
  const auto counts = label_counts(labels);
  std::array<double, kNumLabels> keep{};
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    keep[k] = counts[k] == 0 ? 1.0
                             : std::min(1.0, static_cast<double>(expected) / static_cast<double>(counts[k]));
  }
  keep[code(Label::Against)] = 1.0;

  Rng rng(seed);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = keep[code(labels[i])];
    // Always consume one draw so the stream does not depend on the class mix.
    const double u = rng.uniform01();
    if (p >= 1.0 || u < p) kept.push_back(i);
  }
  return kept;
}

std::vector<StancePair> undersample(const std::vector<StancePair>& pairs, std::size_t expected,
                                    std::uint64_t seed) {
  std::vector<Label> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.label) throw DataError("undersample: pair " + pair_key(p) + " has no label");
    labels.push_back(*p.label);
  }
  std::vector<StancePair> out;
  for (auto i : undersample_indices(labels, expected, seed)) out.push_back(pairs[i]);
  return out;
}

LabelScheme parse_label_scheme(std::string_view s) {
  const auto v = lower(s);
  if (v == "identity") return LabelScheme::Identity;
  if (v == "nli") return LabelScheme::Nli;
  if (v == "rumoureval") return LabelScheme::RumourEval;
  if (v == "covidlies") return LabelScheme::CovidLies;
  throw DataError("unknown label scheme '" + std::string(s) + "'");
}

std::string_view to_string(LabelScheme s) {
  switch (s) {
    case LabelScheme::Identity: return "identity";
    case LabelScheme::Nli: return "nli";
    case LabelScheme::RumourEval: return "rumoureval";
    case LabelScheme::CovidLies: return "covidlies";
  }
  return "?";
}

Label map_label(std::string_view source, LabelScheme scheme) {
  const auto v = lower(source);
  switch (scheme) {
    case LabelScheme::Identity:
      if (v == "favor") return Label::Favor;
      if (v == "against") return Label::Against;
      if (v == "neither") return Label::Neither;
      break;
    case LabelScheme::Nli:
      if (v == "entailment") return Label::Favor;
      if (v == "contradiction") return Label::Against;
      if (v == "neutral") return Label::Neither;
      break;
    case LabelScheme::RumourEval:
      if (v == "support") return Label::Favor;
      if (v == "deny") return Label::Against;
      if (v == "query" || v == "comment") return Label::Neither;
      break;
    case LabelScheme::CovidLies:
      if (v == "agree") return Label::Favor;
      if (v == "disagree") return Label::Against;
      if (v == "no stance" || v == "no_stance" || v == "none") return Label::Neither;
      break;
  }
  throw DataError("label '" + std::string(source) + "' is not in the " +
                  std::string(to_string(scheme)) + " scheme");
}

std::string_view inverse_label(Label label, LabelScheme scheme) {
  static constexpr std::string_view table[4][3] = {
      {"favor", "against", "neither"},
      {"entailment", "contradiction", "neutral"},
      {"support", "deny", "comment"},
      {"agree", "disagree", "no stance"},
  };
  return table[static_cast<int>(scheme)][code(label)];
}

std::vector<TrainingExample> read_training_examples(const std::filesystem::path& path,
                                                    LabelScheme scheme) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<TrainingExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("target_id").get<std::string>(), j.at("text_id").get<std::string>(),
                     map_label(j.at("label").get<std::string>(), scheme)});
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return out;
}

void write_training_examples(const std::filesystem::path& path,
                             const std::vector<TrainingExample>& examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& e : examples) {
    out << json{{"target_id", e.target_id}, {"text_id", e.text_id}, {"label", to_string(e.label)}}.dump()
        << '\n';
  }
}

ThreadFilterResult filter_denied_sources(const std::vector<Thread>& threads) {
  ThreadFilterResult r;
  for (const auto& t : threads) {
    if (!t.source_stance) {
      ++r.skipped_missing_flag;
      continue;
    }
    if (lower(*t.source_stance) == "deny") {
      ++r.dropped_deny_threads;
      continue;
    }
    for (const auto& reply : t.replies) {
      r.examples.push_back({t.source_id, reply.id, map_label(reply.label, LabelScheme::RumourEval)});
    }
  }
  return r;
}

std::vector<Thread> read_threads(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Thread> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Thread t;
      t.source_id = j.at("source_id").get<std::string>();
      if (j.contains("source_stance") && j["source_stance"].is_string()) {
        t.source_stance = j["source_stance"].get<std::string>();
      }
      for (const auto& r : j.at("replies")) {
        t.replies.push_back({r.at("id").get<std::string>(), r.at("label").get<std::string>()});
      }
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return out;
}

Orientation parse_orientation(std::string_view s) {
  const auto v = lower(s);
  if (v == "tweet_as_premise" || v == "p-tweet") return Orientation::TweetAsPremise;
  if (v == "misinfo_as_premise" || v == "p-mis") return Orientation::MisinfoAsPremise;
  throw DataError("unknown orientation '" + std::string(s) + "'");
}

namespace {

Matrix unit_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double n = l2_norm(row);
    if (n > 0.0)
      for (auto& x : row) x /= n;
  }
  return out;
}

}  // namespace

BertScoreResult bertscore(const Matrix& candidate, const Matrix& reference) {
  if (candidate.empty() || reference.empty()) throw std::invalid_argument("bertscore: empty token matrix");
  if (candidate.cols() != reference.cols()) throw std::invalid_argument("bertscore: dimension mismatch");
  const Matrix c = unit_rows(candidate);
  const Matrix r = unit_rows(reference);

  // sim(i, j) = <reference_i, candidate_j>
  std::vector<double> best_for_ref(r.rows(), -std::numeric_limits<double>::infinity());
  std::vector<double> best_for_cand(c.rows(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < r.rows(); ++i) {
    for (std::size_t j = 0; j < c.rows(); ++j) {
      const double s = dot(r.row(i), c.row(j));
      best_for_ref[i] = std::max(best_for_ref[i], s);
      best_for_cand[j] = std::max(best_for_cand[j], s);
    }
  }
  BertScoreResult out;
  out.recall = std::accumulate(best_for_ref.begin(), best_for_ref.end(), 0.0) / static_cast<double>(r.rows());
  out.precision = std::accumulate(best_for_cand.begin(), best_for_cand.end(), 0.0) / static_cast<double>(c.rows());
  const double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

std::string feature_spec_hash(std::string_view spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : spec) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_head(const std::filesystem::path& path, const HeadModel& model) {
  nlohmann::ordered_json j;
  j["shape"] = {model.weights.rows(), model.weights.cols()};
  j["weights"] = model.weights.data();
  j["bias"] = model.bias;
  j["feature_spec"] = model.feature_spec;
  j["feature_spec_hash"] = feature_spec_hash(model.feature_spec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump() << '\n';
}

HeadModel load_head(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[1] != kNumLabels) throw DataError("shape must be [features, 3]");
    HeadModel m;
    m.weights = Matrix(shape[0], shape[1], j.at("weights").get<std::vector<double>>());
    m.bias = j.at("bias").get<std::array<double, kNumLabels>>();
    m.feature_spec = j.value("feature_spec", std::string{});
    if (j.contains("feature_spec_hash") &&
        j["feature_spec_hash"].get<std::string>() != feature_spec_hash(m.feature_spec)) {
      throw DataError("feature_spec_hash does not match feature_spec");
    }
    return m;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Probs softmax(const Probs& z) {
  const double mx = std::max({z[0], z[1], z[2]});
  Probs p;
  double s = 0.0;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    p[k] = std::exp(z[k] - mx);
    s += p[k];
  }
  for (auto& x : p) x /= s;
  return p;
}

void FeatureMatrix::add_dense(std::span<const double> row) {
  if (rows.empty() && dim == 0) dim = row.size();
  if (row.size() != dim) throw std::invalid_argument("FeatureMatrix: dense row has the wrong dimension");
  SparseVector v;
  v.entries.reserve(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) v.entries.emplace_back(static_cast<std::uint32_t>(i), row[i]);
  rows.push_back(std::move(v));
}

void FeatureMatrix::add_sparse(SparseVector row) {
  if (!row.entries.empty() && row.entries.back().first >= dim) {
    throw std::invalid_argument("FeatureMatrix: sparse index beyond dimension");
  }
  rows.push_back(std::move(row));
}

Probs logits(const HeadModel& model, const SparseVector& x) {
  Probs z = model.bias;
  for (const auto& [i, v] : x.entries) {
    if (i >= model.weights.rows()) throw std::invalid_argument("feature index beyond model size");
    for (std::size_t k = 0; k < kNumLabels; ++k) z[k] += model.weights(i, k) * v;
  }
  return z;
}

Probs logits(const HeadModel& model, std::span<const double> x) {
  if (x.size() != model.weights.rows()) {
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) +
                                " does not match model size " + std::to_string(model.weights.rows()));
  }
  Probs z = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t k = 0; k < kNumLabels; ++k) z[k] += model.weights(i, k) * x[i];
  return z;
}

std::vector<double> sbert_features(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("sbert_features: u and v differ in dimension");
  std::vector<double> f;
  f.reserve(3 * u.size());
  f.insert(f.end(), u.begin(), u.end());
  f.insert(f.end(), v.begin(), v.end());
  for (std::size_t i = 0; i < u.size(); ++i) f.push_back(std::abs(u[i] - v[i]));
  return f;
}

Probs sbert_head_forward(std::span<const double> u, std::span<const double> v, const HeadModel& model) {
  if (model.weights.rows() != 3 * u.size()) {
    throw std::invalid_argument("sbert head expects " + std::to_string(model.weights.rows()) +
                                " features, got 3 x " + std::to_string(u.size()));
  }
  const auto f = sbert_features(u, v);
  return softmax(logits(model, std::span<const double>(f)));
}

LossAndGradient weighted_ce(std::span<const Probs> probs, std::span<const Label> labels,
                            const ClassWeights& weights) {
  if (probs.size() != labels.size()) throw std::invalid_argument("weighted_ce: batch size mismatch");
  LossAndGradient out;
  out.grad.resize(probs.size());
  if (probs.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const int y = code(labels[i]);
    const double w = weights.w[y];
    out.loss -= w * std::log(probs[i][y]);
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      out.grad[i][k] = w * inv_n * (probs[i][k] - (static_cast<int>(k) == y ? 1.0 : 0.0));
    }
  }
  out.loss *= inv_n;
  return out;
}

LossAndGradient weighted_ce_from_logits(std::span<const Probs> z, std::span<const Label> labels,
                                        const ClassWeights& weights) {
  std::vector<Probs> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = softmax(z[i]);
  if (z.size() != labels.size()) throw std::invalid_argument("weighted_ce: batch size mismatch");
  // Log-softmax directly keeps the loss finite for extreme logits.
  LossAndGradient out = weighted_ce(p, labels, weights);
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double mx = std::max({z[i][0], z[i][1], z[i][2]});
    double s = 0.0;
    for (double v : z[i]) s += std::exp(v - mx);
    const int y = code(labels[i]);
    loss += weights.w[y] * (mx + std::log(s) - z[i][y]);
  }
  out.loss = z.empty() ? 0.0 : loss / static_cast<double>(z.size());
  return out;
}

double training_objective(const HeadModel& model, const FeatureMatrix& features,
                          std::span<const Label> labels, const ClassWeights& weights,
                          double weight_decay) {
  std::vector<Probs> z(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) z[i] = logits(model, features.rows[i]);
  double obj = weighted_ce_from_logits(z, labels, weights).loss;
  double sq = 0.0;
  for (double w : model.weights.data()) sq += w * w;
  return obj + 0.5 * weight_decay * sq;
}

TrainResult train_head(const FeatureMatrix& features, std::span<const Label> labels,
                       const ClassWeights& weights, const TrainConfig& config,
                       std::string feature_spec) {
  if (features.size() != labels.size()) throw std::invalid_argument("train_head: features/labels size mismatch");
  if (features.size() == 0) throw std::invalid_argument("train_head: empty training set");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("train_head: learning rate must be positive");
  if (config.weight_decay < 0.0) throw std::invalid_argument("train_head: weight decay must be non-negative");

  TrainResult result;
  HeadModel& m = result.model;
  m.weights = Matrix(features.dim, kNumLabels, 0.0);
  m.feature_spec = std::move(feature_spec);

  const std::size_t n = features.size();
  const std::size_t bs = config.batch_size == 0 ? n : std::min(config.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);
  Matrix grad_w(features.dim, kNumLabels, 0.0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (bs < n) rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(n, start + bs);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      std::fill(grad_w.data().begin(), grad_w.data().end(), 0.0);
      std::array<double, kNumLabels> grad_b{};
      for (std::size_t t = start; t < end; ++t) {
        const auto i = order[t];
        const Probs p = softmax(logits(m, features.rows[i]));
        const int y = code(labels[i]);
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
          throw TrainingError("non-finite probabilities at epoch " + std::to_string(epoch + 1) +
                              ", example " + std::to_string(i) + "; lower the learning rate");
        }
        for (std::size_t k = 0; k < kNumLabels; ++k) {
          const double g = weights.w[y] * inv_b * (p[k] - (static_cast<int>(k) == y ? 1.0 : 0.0));
          grad_b[k] += g;
          for (const auto& [idx, v] : features.rows[i].entries) grad_w(idx, k) += g * v;
        }
      }
      auto& w = m.weights.data();
      const auto& gw = grad_w.data();
      for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] -= config.learning_rate * (gw[j] + config.weight_decay * w[j]);
      }
      for (std::size_t k = 0; k < kNumLabels; ++k) m.bias[k] -= config.learning_rate * grad_b[k];
    }
    const double obj = training_objective(m, features, labels, weights, config.weight_decay);
    if (!std::isfinite(obj)) {
      throw TrainingError("non-finite loss after epoch " + std::to_string(epoch + 1) +
                          "; lower the learning rate");
    }
    result.loss_trace.push_back(obj);
  }
  return result;
}

Label argmax_label(const Probs& p) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumLabels; ++k)
    if (p[k] > p[best]) best = k;
  return label_from_code(static_cast<int>(best));
}

Label predict(const HeadModel& model, const SparseVector& x) {
  return argmax_label(softmax(logits(model, x)));
}

Label predict(const HeadModel& model, std::span<const double> x) {
  return argmax_label(softmax(logits(model, x)));
}

std::vector<Label> predict_batch(const HeadModel& model, const FeatureMatrix& features) {
  std::vector<Label> out;
  out.reserve(features.size());
  for (const auto& row : features.rows) out.push_back(predict(model, row));
  return out;
}

TwoStepDecision two_step(const Matrix& tweet_tokens, const Matrix& misinfo_tokens,
                         std::span<const double> u, std::span<const double> v, double threshold,
                         const HeadModel& head) {
  TwoStepDecision d;
  d.score = bertscore(tweet_tokens, misinfo_tokens);
  if (d.score.f1 <= threshold) {
    d.label = Label::Neither;
    return d;
  }
  d.head_probs = sbert_head_forward(u, v, head);
  const double favor = d.head_probs[code(Label::Favor)];
  const double against = d.head_probs[code(Label::Against)];
  // Renormalizing over the two stance classes does not move the argmax.
  d.label = against > favor ? Label::Against : Label::Favor;
  return d;
}

SparseVector tfidf_pair_features(const TfidfModel& model, const std::vector<std::string>& premise,
                                 const std::vector<std::string>& hypothesis) {
  SparseVector a = transform(model, premise);
  const SparseVector b = transform(model, hypothesis);
  const auto offset = static_cast<std::uint32_t>(model.size());
  for (const auto& [i, w] : b.entries) a.entries.emplace_back(i + offset, w);
  return a;
}

std::vector<double> glove_pair_features(const EmbeddingTable& table,
                                        const std::vector<std::string>& premise,
                                        const std::vector<std::string>& hypothesis) {
  auto f = avg_embedding(premise, table);
  const auto g = avg_embedding(hypothesis, table);
  f.insert(f.end(), g.begin(), g.end());
  return f;
}

}  // namespace covmis
