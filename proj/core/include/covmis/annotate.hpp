// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

// Annotation workflow: automatic Against labels for fact-check URL pairs,
// two-annotator task queues, Cohen's kappa and 12-item review batches.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "covmis/datamodel.hpp"

namespace covmis {

/// Labels every FactCheckUrl pair Against and flags it auto_labeled.
std::vector<StancePair> auto_label(std::vector<StancePair> pairs);

struct AgreementReport {
  /// Rows: first annotator, columns: second annotator.
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> confusion{};
  std::size_t n = 0;
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  double kappa = 0.0;
  /// Set when p_e = 1 (both annotators used one identical label throughout).
  bool degenerate = false;
};

/// Two-rater Cohen's kappa with chance agreement from the marginal products.
/// Throws std::invalid_argument on empty or unequal-length input and
/// DataError when p_e = 1 but p_o < 1.
AgreementReport cohen_kappa(std::span<const Label> a, std::span<const Label> b);

class AnnotationError : public std::runtime_error {
 public:
  enum class Code {
    UnknownAnnotator,
    UnknownPair,
    NotAssigned,
    BatchFrozen,
    BatchIncomplete,
    NoSuchBatch,
    NotDisagreement,
    NoData,
  };

  AnnotationError(Code code, const std::string& what, std::vector<std::string> details = {})
      : std::runtime_error(what), code_(code), details_(std::move(details)) {}

  Code code() const { return code_; }
  /// Pair ids relevant to the error (e.g. the pairs missing from a window).
  const std::vector<std::string>& details() const { return details_; }

 private:
  Code code_;
  std::vector<std::string> details_;
};

std::string_view to_string(AnnotationError::Code code);

struct AnnotationEvent {
  enum class Kind { Label, Resolve };
  Kind kind = Kind::Label;
  std::string pair_id;
  std::string annotator;  // empty for resolutions
  Label label = Label::Neither;
  bool escalated = false;  // resolution settled by a third person
  std::int64_t timestamp = 0;

  friend bool operator==(const AnnotationEvent&, const AnnotationEvent&) = default;
};

std::string to_json_line(const AnnotationEvent& e);
std::vector<AnnotationEvent> parse_events(std::istream& in, const std::string& source = "<stream>");

struct Disagreement {
  std::string pair_id;
  std::array<Label, 2> labels{};
  std::optional<Label> resolution;
  bool escalated = false;
};

struct ReviewBatch {
  std::size_t index = 0;
  std::vector<std::string> items;
  std::vector<std::string> auto_labeled;
  std::vector<Disagreement> disagreements;
  bool resolved = false;
};

struct AnnotatorProgress {
  std::size_t labeled = 0;
  std::size_t total = 0;
};

/// Append-only log of label submissions and resolutions with a derived
/// current-state view. Not internally synchronized; see AnnotationService.
class AnnotationStore {
 public:
  AnnotationStore(std::vector<StancePair> pairs, std::array<std::string, 2> annotators,
                  std::size_t items_per_batch = 12);

  const std::vector<StancePair>& pairs() const { return pairs_; }
  const std::array<std::string, 2>& annotators() const { return annotators_; }
  const std::vector<AnnotationEvent>& log() const { return log_; }

  std::size_t batch_count() const { return batch_items_.size(); }
  std::size_t batch_of(const std::string& pair_id) const;
  const StancePair& pair(const std::string& pair_id) const;

  /// Next manual pair the annotator has not labeled yet, in item order.
  std::optional<std::string> next_task(const std::string& annotator) const;

  /// Records or overwrites the annotator's label. Rejected once the pair's
  /// batch is resolved, for auto-labeled pairs and unknown ids.
  void submit_label(const std::string& annotator, const std::string& pair_id, Label label,
                    std::int64_t timestamp = 0);

  std::optional<Label> label_of(const std::string& annotator, const std::string& pair_id) const;

  bool batch_complete(std::size_t k) const;
  /// Complete and every disagreement has a resolution. Records are frozen.
  bool batch_resolved(std::size_t k) const;

  /// Disagreements of a fully double-annotated batch. Throws
  /// AnnotationError(BatchIncomplete) naming the missing pairs otherwise.
  ReviewBatch review_batch(std::size_t k) const;

  /// Sets the final label of a disagreement pair in batch k.
  void resolve(std::size_t k, const std::string& pair_id, Label label, bool escalated = false,
               std::int64_t timestamp = 0);

  /// Kappa over doubly annotated pairs of batch k, or of all batches.
  AgreementReport agreement(std::optional<std::size_t> batch = std::nullopt) const;

  AnnotatorProgress progress(const std::string& annotator,
                             std::optional<std::size_t> batch = std::nullopt) const;

  /// Pairs with final labels: auto labels, agreed labels and resolutions of
  /// resolved batches. Pairs of unresolved batches keep no label.
  std::vector<StancePair> final_labels() const;

  /// Applies a logged event through the same validation as the live calls.
  void apply(const AnnotationEvent& e);

 private:
  struct Resolution {
    Label label;
    bool escalated;
  };

  std::size_t annotator_index(const std::string& annotator) const;
  std::size_t require_pair(const std::string& pair_id) const;
  void require_batch(std::size_t k) const;
  std::vector<std::size_t> manual_pairs(std::size_t k) const;

  std::vector<StancePair> pairs_;
  std::array<std::string, 2> annotators_;
  std::unordered_map<std::string, std::size_t> pair_index_;
  std::vector<std::size_t> pair_batch_;
  std::vector<std::vector<std::string>> batch_items_;
  std::vector<std::vector<std::size_t>> batch_pairs_;
  std::vector<std::array<std::optional<Label>, 2>> current_;
  std::map<std::size_t, Resolution> resolutions_;
  std::vector<AnnotationEvent> log_;
};

/// Annotation instructions served to annotators.
std::string_view annotation_guidelines();

}  // namespace covmis
