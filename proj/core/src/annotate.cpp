// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/annotate.hpp"

#include <algorithm>
#include <istream>

#include <json.hpp>

namespace covmis {

using json = nlohmann::json;

std::vector<StancePair> auto_label(std::vector<StancePair> pairs) {
  for (auto& p : pairs) {
    if (p.query_type == QueryType::FactCheckUrl) {
      p.label = Label::Against;
      p.auto_labeled = true;
    }
  }
  return pairs;
}

AgreementReport cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cohen_kappa: label lists differ in length");
  if (a.empty()) throw std::invalid_argument("cohen_kappa: no labels");

  AgreementReport r;
  r.n = a.size();
  for (std::size_t i = 0; i < a.size(); ++i) ++r.confusion[code(a[i])][code(b[i])];

  const double n = static_cast<double>(r.n);
  std::size_t agree = 0;
  for (std::size_t k = 0; k < kNumLabels; ++k) agree += r.confusion[k][k];
  r.observed = static_cast<double>(agree) / n;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      row += r.confusion[k][j];
      col += r.confusion[j][k];
    }
    r.expected += (static_cast<double>(row) / n) * (static_cast<double>(col) / n);
  }
  if (r.expected >= 1.0) {
    r.degenerate = true;
    if (r.observed < 1.0) throw DataError("cohen_kappa: chance agreement is 1 but observed agreement is not");
    r.kappa = 1.0;
    return r;
  }
  r.kappa = (r.observed - r.expected) / (1.0 - r.expected);
  return r;
}

std::string_view to_string(AnnotationError::Code code) {
  using C = AnnotationError::Code;
  switch (code) {
    case C::UnknownAnnotator: return "unknown_annotator";
    case C::UnknownPair: return "unknown_pair";
    case C::NotAssigned: return "not_assigned";
    case C::BatchFrozen: return "batch_frozen";
    case C::BatchIncomplete: return "batch_incomplete";
    case C::NoSuchBatch: return "no_such_batch";
    case C::NotDisagreement: return "not_disagreement";
    case C::NoData: return "no_data";
  }
  return "error";
}

std::string to_json_line(const AnnotationEvent& e) {
  json j;
  j["event"] = e.kind == AnnotationEvent::Kind::Label ? "label" : "resolve";
  j["pair_id"] = e.pair_id;
  if (e.kind == AnnotationEvent::Kind::Label) j["annotator"] = e.annotator;
  j["label"] = to_string(e.label);
  if (e.kind == AnnotationEvent::Kind::Resolve) j["escalated"] = e.escalated;
  j["ts"] = e.timestamp;
  return j.dump();
}

std::vector<AnnotationEvent> parse_events(std::istream& in, const std::string& source) {
  std::vector<AnnotationEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      AnnotationEvent e;
      const auto kind = j.at("event").get<std::string>();
      if (kind == "label") {
        e.kind = AnnotationEvent::Kind::Label;
        e.annotator = j.at("annotator").get<std::string>();
      } else if (kind == "resolve") {
        e.kind = AnnotationEvent::Kind::Resolve;
        e.escalated = j.value("escalated", false);
      } else {
        throw DataError("unknown event '" + kind + "'");
      }
      e.pair_id = j.at("pair_id").get<std::string>();
      e.label = parse_label(j.at("label").get<std::string>());
      e.timestamp = j.value("ts", std::int64_t{0});
      events.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw ParseError(source, line_no, ex.what());
    }
  }
  return events;
}

AnnotationStore::AnnotationStore(std::vector<StancePair> pairs, std::array<std::string, 2> annotators,
                                 std::size_t items_per_batch)
    : pairs_(std::move(pairs)), annotators_(std::move(annotators)) {
  if (items_per_batch == 0) throw std::invalid_argument("items_per_batch must be positive");
  if (annotators_[0].empty() || annotators_[1].empty() || annotators_[0] == annotators_[1]) {
    throw std::invalid_argument("two distinct non-empty annotator ids are required");
  }
  validate_pairs(pairs_);

  std::unordered_map<std::string, std::size_t> item_batch;
  std::size_t n_items = 0;
  pair_batch_.resize(pairs_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    pair_index_.emplace(pair_key(p), i);
    auto [it, inserted] = item_batch.try_emplace(p.misinfo_id, n_items / items_per_batch);
    if (inserted) {
      if (it->second == batch_items_.size()) {
        batch_items_.emplace_back();
        batch_pairs_.emplace_back();
      }
      batch_items_[it->second].push_back(p.misinfo_id);
      ++n_items;
    }
    pair_batch_[i] = it->second;
    batch_pairs_[it->second].push_back(i);
  }
  current_.resize(pairs_.size());
}

std::size_t AnnotationStore::annotator_index(const std::string& annotator) const {
  if (annotator == annotators_[0]) return 0;
  if (annotator == annotators_[1]) return 1;
  throw AnnotationError(AnnotationError::Code::UnknownAnnotator, "unknown annotator '" + annotator + "'");
}

std::size_t AnnotationStore::require_pair(const std::string& pair_id) const {
  auto it = pair_index_.find(pair_id);
  if (it == pair_index_.end()) {
    throw AnnotationError(AnnotationError::Code::UnknownPair, "unknown pair '" + pair_id + "'");
  }
  return it->second;
}

void AnnotationStore::require_batch(std::size_t k) const {
  if (k >= batch_items_.size()) {
    throw AnnotationError(AnnotationError::Code::NoSuchBatch, "no batch " + std::to_string(k));
  }
}

std::size_t AnnotationStore::batch_of(const std::string& pair_id) const {
  return pair_batch_[require_pair(pair_id)];
}

const StancePair& AnnotationStore::pair(const std::string& pair_id) const {
  return pairs_[require_pair(pair_id)];
}

std::vector<std::size_t> AnnotationStore::manual_pairs(std::size_t k) const {
  std::vector<std::size_t> out;
  for (auto i : batch_pairs_[k])
    if (!pairs_[i].auto_labeled) out.push_back(i);
  return out;
}

std::optional<std::string> AnnotationStore::next_task(const std::string& annotator) const {
  const auto a = annotator_index(annotator);
  for (std::size_t k = 0; k < batch_pairs_.size(); ++k) {
    for (auto i : batch_pairs_[k]) {
      if (!pairs_[i].auto_labeled && !current_[i][a]) return pair_key(pairs_[i]);
    }
  }
  return std::nullopt;
}

void AnnotationStore::submit_label(const std::string& annotator, const std::string& pair_id,
                                   Label label, std::int64_t timestamp) {
  const auto a = annotator_index(annotator);
  const auto i = require_pair(pair_id);
  if (pairs_[i].auto_labeled) {
    throw AnnotationError(AnnotationError::Code::NotAssigned,
                          "pair '" + pair_id + "' is auto-labeled and not in any queue");
  }
  if (batch_resolved(pair_batch_[i])) {
    throw AnnotationError(AnnotationError::Code::BatchFrozen,
                          "batch " + std::to_string(pair_batch_[i]) + " is resolved; labels are frozen");
  }
  current_[i][a] = label;
  log_.push_back({AnnotationEvent::Kind::Label, pair_id, annotator, label, false, timestamp});
}

std::optional<Label> AnnotationStore::label_of(const std::string& annotator,
                                               const std::string& pair_id) const {
  return current_[require_pair(pair_id)][annotator_index(annotator)];
}

bool AnnotationStore::batch_complete(std::size_t k) const {
  require_batch(k);
  for (auto i : manual_pairs(k))
    if (!current_[i][0] || !current_[i][1]) return false;
  return true;
}

bool AnnotationStore::batch_resolved(std::size_t k) const {
  if (!batch_complete(k)) return false;
  for (auto i : manual_pairs(k)) {
    if (*current_[i][0] != *current_[i][1] && !resolutions_.count(i)) return false;
  }
  return true;
}

ReviewBatch AnnotationStore::review_batch(std::size_t k) const {
  require_batch(k);
  ReviewBatch b;
  b.index = k;
  b.items = batch_items_[k];
  std::vector<std::string> missing;
  for (auto i : batch_pairs_[k]) {
    const auto& p = pairs_[i];
    if (p.auto_labeled) {
      b.auto_labeled.push_back(pair_key(p));
      continue;
    }
    if (!current_[i][0] || !current_[i][1]) {
      missing.push_back(pair_key(p));
      continue;
    }
    if (*current_[i][0] != *current_[i][1]) {
      Disagreement d;
      d.pair_id = pair_key(p);
      d.labels = {*current_[i][0], *current_[i][1]};
      if (auto it = resolutions_.find(i); it != resolutions_.end()) {
        d.resolution = it->second.label;
        d.escalated = it->second.escalated;
      }
      b.disagreements.push_back(std::move(d));
    }
  }
  if (!missing.empty()) {
    throw AnnotationError(AnnotationError::Code::BatchIncomplete,
                          "batch " + std::to_string(k) + " has " + std::to_string(missing.size()) +
                              " pairs without two labels",
                          std::move(missing));
  }
  b.resolved = std::all_of(b.disagreements.begin(), b.disagreements.end(),
                           [](const Disagreement& d) { return d.resolution.has_value(); });
  return b;
}

void AnnotationStore::resolve(std::size_t k, const std::string& pair_id, Label label,
                              bool escalated, std::int64_t timestamp) {
  require_batch(k);
  const auto i = require_pair(pair_id);
  if (pair_batch_[i] != k) {
    throw AnnotationError(AnnotationError::Code::UnknownPair,
                          "pair '" + pair_id + "' is not in batch " + std::to_string(k));
  }
  if (!batch_complete(k)) {
    // Reuse review_batch to produce the list of missing pairs.
    (void)review_batch(k);
  }
  if (batch_resolved(k)) {
    throw AnnotationError(AnnotationError::Code::BatchFrozen,
                          "batch " + std::to_string(k) + " is already resolved");
  }
  if (pairs_[i].auto_labeled || *current_[i][0] == *current_[i][1]) {
    throw AnnotationError(AnnotationError::Code::NotDisagreement,
                          "pair '" + pair_id + "' is not a disagreement");
  }
  resolutions_[i] = Resolution{label, escalated};
  log_.push_back({AnnotationEvent::Kind::Resolve, pair_id, "", label, escalated, timestamp});
}

AgreementReport AnnotationStore::agreement(std::optional<std::size_t> batch) const {
  std::vector<Label> a, b;
  auto collect = [&](std::size_t k) {
    for (auto i : manual_pairs(k)) {
      if (current_[i][0] && current_[i][1]) {
        a.push_back(*current_[i][0]);
        b.push_back(*current_[i][1]);
      }
    }
  };
  if (batch) {
    require_batch(*batch);
    collect(*batch);
  } else {
    for (std::size_t k = 0; k < batch_pairs_.size(); ++k) collect(k);
  }
  if (a.empty()) {
    throw AnnotationError(AnnotationError::Code::NoData, "no doubly annotated pairs");
  }
  return cohen_kappa(a, b);
}

AnnotatorProgress AnnotationStore::progress(const std::string& annotator,
                                            std::optional<std::size_t> batch) const {
  const auto a = annotator_index(annotator);
  AnnotatorProgress pr;
  for (std::size_t k = 0; k < batch_pairs_.size(); ++k) {
    if (batch && *batch != k) continue;
    for (auto i : manual_pairs(k)) {
      ++pr.total;
      if (current_[i][a]) ++pr.labeled;
    }
  }
  if (batch) require_batch(*batch);
  return pr;
}

std::vector<StancePair> AnnotationStore::final_labels() const {
  std::vector<StancePair> out = pairs_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].auto_labeled) continue;
    out[i].label.reset();
    if (!batch_resolved(pair_batch_[i])) continue;
    if (*current_[i][0] == *current_[i][1]) out[i].label = *current_[i][0];
    else out[i].label = resolutions_.at(i).label;
  }
  return out;
}

void AnnotationStore::apply(const AnnotationEvent& e) {
  if (e.kind == AnnotationEvent::Kind::Label) {
    submit_label(e.annotator, e.pair_id, e.label, e.timestamp);
  } else {
    resolve(batch_of(e.pair_id), e.pair_id, e.label, e.escalated, e.timestamp);
  }
}

std::string_view annotation_guidelines() {
  return R"(Label the stance of the tweet toward the misinformation item.

Favor   - the tweet supports the claim, or helps spread the news article that makes it.
Against - the tweet rejects the claim, or helps spread a fact-checking article about it.
Neither - any other case, for example:
          * the tweet is not about the claim;
          * the tweet only asks whether the claim is true;
          * the tweet takes no clear position on the claim.

Pairs retrieved through a fact-checking article URL are labeled Against
automatically and are shown read-only. Every 12 misinformation items the two
annotators compare labels and settle each disagreement; when no agreement is
reached, a third person decides (mark the resolution as escalated).
)";
}

}  // namespace covmis
