// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covmis/datamodel.hpp"

namespace covmis {

/// Gold rows x predicted columns.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> cells{};

  std::size_t& at(Label gold, Label pred) { return cells[code(gold)][code(pred)]; }
  std::size_t at(Label gold, Label pred) const { return cells[code(gold)][code(pred)]; }
  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(Label gold) const;
  std::size_t col_sum(Label pred) const;
  std::size_t tp(Label l) const { return at(l, l); }
  std::size_t fp(Label l) const { return col_sum(l) - tp(l); }
  std::size_t fn(Label l) const { return row_sum(l) - tp(l); }

  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws std::invalid_argument when the lists differ in length.
ConfusionMatrix confusion(std::span<const Label> gold, std::span<const Label> pred);

/// A zero denominator yields 0 with the matching flag set. F1 is undefined
/// when either of its constituents is.
struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;

  bool f1_undefined() const { return precision_undefined || recall_undefined; }
};

ClassMetrics prf(const ConfusionMatrix& m, Label l);

struct Metrics {
  ConfusionMatrix confusion;
  std::array<ClassMetrics, kNumLabels> per_class{};
  /// Unweighted means over the three classes; null when any constituent is
  /// undefined.
  std::optional<double> macro_precision;
  std::optional<double> macro_recall;
  std::optional<double> macro_f1;
  /// trace / total (0 for an empty input).
  double accuracy = 0.0;
};

Metrics metrics(const ConfusionMatrix& m);

struct MetricReport {
  Metrics overall;
  std::map<QueryGroup, Metrics> by_group;
  std::map<QueryType, Metrics> by_type;
};

/// pred[i] is the prediction for pairs[i]; gold labels come from the pairs.
/// Throws DataError on an unlabeled pair and std::invalid_argument on a
/// length mismatch.
MetricReport report(const std::vector<StancePair>& pairs, std::span<const Label> pred);
MetricReport report(std::span<const Label> gold, std::span<const Label> pred,
                    const std::vector<StancePair>& pairs);

/// Predicts each pair's query-group majority gold label (ties to the lowest
/// class code).
std::vector<Label> majority_baseline(const std::vector<StancePair>& pairs);

/// Same baseline evaluated straight from label counts: max count / total per
/// group (0 for an empty group).
std::map<QueryGroup, double> majority_accuracy(const StatsTable& t);

// --- aggregation across seeds ---------------------------------------------

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample SD, n - 1 denominator
  std::size_t n = 0;
  std::vector<double> values;
};

/// Mean and sample SD. Throws std::invalid_argument on fewer than 2 values.
Summary summarize(std::span<const double> values);

/// Named scalar results of one seeded run. A run may omit a metric (e.g. an
/// undefined macro F1); summaries then cover the runs that reported it.
using RunMetrics = std::map<std::string, double>;
using SeededRun = std::function<RunMetrics(std::uint64_t seed)>;

/// Calls run with derive_seed(root_seed, i) for i < k. Throws
/// std::invalid_argument when k < 2. A metric reported by fewer than two
/// runs gets sd = 0.
std::map<std::string, Summary> multi_seed(const SeededRun& run, std::size_t k = 5,
                                          std::uint64_t root_seed = 0);

/// Scalars of a report suitable for multi_seed: accuracy and, when defined,
/// macro_f1.
RunMetrics run_metrics(const MetricReport& r);

// --- dataset ablation -----------------------------------------------------

struct AblationCell {
  enum class Kind { Only, Without, All };
  Kind kind = Kind::All;
  std::string name;                   // "only X", "w/o X", "all"
  std::vector<std::string> datasets;  // training sets actually used
  bool failed = false;
  std::string error;
  std::map<std::string, Summary> results;
};

struct AblationTable {
  std::vector<AblationCell> cells;
  std::vector<std::string> notes;
};

/// Trains/evaluates on the given subset of dataset names with one seed.
using AblationRunner =
    std::function<RunMetrics(const std::vector<std::string>& datasets, std::uint64_t seed)>;

struct AblationOptions {
  std::size_t seeds = 5;
  std::uint64_t root_seed = 0;
  /// Cells run on separate threads; only set when the runner is thread-safe.
  bool parallel = false;
};

/// Only-one rows, all-without-one rows, then the all-datasets row. With two
/// datasets the without rows duplicate the only rows and are dropped (with a
/// note). A runner exception marks that cell failed; the grid continues.
/// Throws std::invalid_argument on fewer than two or duplicate names.
AblationTable ablation(const std::vector<std::string>& datasets, const AblationRunner& runner,
                       const AblationOptions& options = {});

// --- export ----------------------------------------------------------------

std::string to_json(const MetricReport& r);
std::string to_json(const AblationTable& t);
std::string to_json(const std::map<std::string, Summary>& s);

/// Per-class P/R/F1 plus macro and accuracy, in percent with two decimals;
/// undefined values print as "-".
std::string report_table(const MetricReport& r);

/// Title / URL / Keywords accuracy (and macro F1) columns.
std::string group_table(const MetricReport& r);

/// Training data | Acc | SD | Macro F1 | SD.
std::string ablation_table(const AblationTable& t);

}  // namespace covmis
