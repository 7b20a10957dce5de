// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "covmis/errors.hpp"
#include "covmis/random.hpp"

namespace covmis {

using ojson = nlohmann::ordered_json;

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (const auto& row : cells)
    for (auto c : row) s += c;
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t k = 0; k < kNumLabels; ++k) s += cells[k][k];
  return s;
}

std::size_t ConfusionMatrix::row_sum(Label gold) const {
  std::size_t s = 0;
  for (auto c : cells[code(gold)]) s += c;
  return s;
}

std::size_t ConfusionMatrix::col_sum(Label pred) const {
  std::size_t s = 0;
  for (const auto& row : cells) s += row[code(pred)];
  return s;
}

ConfusionMatrix confusion(std::span<const Label> gold, std::span<const Label> pred) {
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(gold.size()) + " gold labels but " +
                                std::to_string(pred.size()) + " predictions");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < gold.size(); ++i) ++m.at(gold[i], pred[i]);
  return m;
}

ClassMetrics prf(const ConfusionMatrix& m, Label l) {
  ClassMetrics c;
  const double tp = static_cast<double>(m.tp(l));
  const std::size_t predicted = m.col_sum(l);
  const std::size_t actual = m.row_sum(l);
  if (predicted == 0) {
    c.precision_undefined = true;
  } else {
    c.precision = tp / static_cast<double>(predicted);
  }
  if (actual == 0) {
    c.recall_undefined = true;
  } else {
    c.recall = tp / static_cast<double>(actual);
  }
  if (c.precision + c.recall > 0.0) c.f1 = 2.0 * c.precision * c.recall / (c.precision + c.recall);
  return c;
}

Metrics metrics(const ConfusionMatrix& m) {
  Metrics out;
  out.confusion = m;
  bool p_ok = true, r_ok = true;
  double ps = 0.0, rs = 0.0, fs = 0.0;
  for (auto l : kLabels) {
    const auto c = prf(m, l);
    out.per_class[code(l)] = c;
    p_ok = p_ok && !c.precision_undefined;
    r_ok = r_ok && !c.recall_undefined;
    ps += c.precision;
    rs += c.recall;
    fs += c.f1;
  }
  if (p_ok) out.macro_precision = ps / 3.0;
  if (r_ok) out.macro_recall = rs / 3.0;
  if (p_ok && r_ok) out.macro_f1 = fs / 3.0;
  const auto total = m.total();
  out.accuracy = total == 0 ? 0.0 : static_cast<double>(m.trace()) / static_cast<double>(total);
  return out;
}

namespace {

std::vector<Label> gold_labels(const std::vector<StancePair>& pairs) {
  std::vector<Label> gold;
  gold.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.label) throw DataError("pair " + pair_key(p) + " has no gold label");
    gold.push_back(*p.label);
  }
  return gold;
}

}  // namespace

MetricReport report(std::span<const Label> gold, std::span<const Label> pred,
                    const std::vector<StancePair>& pairs) {
  if (gold.size() != pairs.size()) {
    throw std::invalid_argument("report: gold labels and pairs differ in length");
  }
  MetricReport r;
  r.overall = metrics(confusion(gold, pred));
  std::map<QueryGroup, ConfusionMatrix> groups;
  std::map<QueryType, ConfusionMatrix> types;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ++groups[group_of(pairs[i].query_type)].at(gold[i], pred[i]);
    ++types[pairs[i].query_type].at(gold[i], pred[i]);
  }
  for (const auto& [g, m] : groups) r.by_group[g] = metrics(m);
  for (const auto& [t, m] : types) r.by_type[t] = metrics(m);
  return r;
}

MetricReport report(const std::vector<StancePair>& pairs, std::span<const Label> pred) {
  const auto gold = gold_labels(pairs);
  return report(gold, pred, pairs);
}

std::vector<Label> majority_baseline(const std::vector<StancePair>& pairs) {
  std::map<QueryGroup, std::array<std::size_t, kNumLabels>> counts;
  for (const auto& p : pairs) {
    if (!p.label) throw DataError("pair " + pair_key(p) + " has no gold label");
    ++counts[group_of(p.query_type)][code(*p.label)];
  }
  std::map<QueryGroup, Label> majority;
  for (const auto& [g, c] : counts) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < kNumLabels; ++k)
      if (c[k] > c[best]) best = k;
    majority[g] = label_from_code(static_cast<int>(best));
  }
  std::vector<Label> pred;
  pred.reserve(pairs.size());
  for (const auto& p : pairs) pred.push_back(majority.at(group_of(p.query_type)));
  return pred;
}

std::map<QueryGroup, double> majority_accuracy(const StatsTable& t) {
  std::map<QueryGroup, double> out;
  for (auto g : kQueryGroups) {
    std::size_t best = 0;
    for (auto l : kLabels) best = std::max(best, t.group_cell(g, l));
    const auto total = t.group_total(g);
    out[g] = total == 0 ? 0.0 : static_cast<double>(best) / static_cast<double>(total);
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("summarize: need at least two values");
  Summary s;
  s.n = values.size();
  s.values.assign(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(sq / static_cast<double>(s.n - 1));
  return s;
}

std::map<std::string, Summary> multi_seed(const SeededRun& run, std::size_t k,
                                          std::uint64_t root_seed) {
  if (k < 2) throw std::invalid_argument("multi_seed: k must be at least 2");
  std::map<std::string, std::vector<double>> values;
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& [name, v] : run(derive_seed(root_seed, static_cast<std::uint64_t>(i)))) {
      values[name].push_back(v);
    }
  }
  std::map<std::string, Summary> out;
  for (const auto& [name, vs] : values) {
    if (vs.size() >= 2) {
      out[name] = summarize(vs);
    } else {
      out[name] = Summary{vs[0], 0.0, 1, vs};
    }
  }
  return out;
}

RunMetrics run_metrics(const MetricReport& r) {
  RunMetrics m{{"accuracy", r.overall.accuracy}};
  if (r.overall.macro_f1) m["macro_f1"] = *r.overall.macro_f1;
  return m;
}

AblationTable ablation(const std::vector<std::string>& datasets, const AblationRunner& runner,
                       const AblationOptions& options) {
  if (datasets.size() < 2) throw std::invalid_argument("ablation: need at least two datasets");
  if (std::set<std::string>(datasets.begin(), datasets.end()).size() != datasets.size()) {
    throw std::invalid_argument("ablation: duplicate dataset name");
  }

  AblationTable table;
  for (const auto& d : datasets) {
    table.cells.push_back({AblationCell::Kind::Only, "only " + d, {d}, false, {}, {}});
  }
  if (datasets.size() > 2) {
    for (const auto& d : datasets) {
      AblationCell c{AblationCell::Kind::Without, "w/o " + d, {}, false, {}, {}};
      for (const auto& o : datasets)
        if (o != d) c.datasets.push_back(o);
      table.cells.push_back(std::move(c));
    }
  } else {
    table.notes.push_back("with two datasets each w/o row equals an only row; w/o rows omitted");
  }
  table.cells.push_back({AblationCell::Kind::All, "all", datasets, false, {}, {}});

  auto run_cell = [&](AblationCell& cell) {
    try {
      const auto subset = cell.datasets;
      cell.results = multi_seed([&](std::uint64_t seed) { return runner(subset, seed); },
                                options.seeds, derive_seed(options.root_seed, cell.name));
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
      cell.results.clear();
    }
  };

  if (options.parallel) {
    std::vector<std::thread> threads;
    for (auto& cell : table.cells) threads.emplace_back(run_cell, std::ref(cell));
    for (auto& t : threads) t.join();
  } else {
    for (auto& cell : table.cells) run_cell(cell);
  }
  return table;
}

namespace {

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson metrics_json(const Metrics& m) {
  ojson j;
  j["accuracy"] = m.accuracy;
  j["macro"] = {{"precision", opt_json(m.macro_precision)},
                {"recall", opt_json(m.macro_recall)},
                {"f1", opt_json(m.macro_f1)}};
  ojson per = ojson::object();
  for (auto l : kLabels) {
    const auto& c = m.per_class[code(l)];
    per[std::string(to_string(l))] = {{"precision", c.precision},
                                      {"recall", c.recall},
                                      {"f1", c.f1},
                                      {"precision_undefined", c.precision_undefined},
                                      {"recall_undefined", c.recall_undefined}};
  }
  j["per_class"] = per;
  ojson cm = ojson::array();
  for (const auto& row : m.confusion.cells) cm.push_back(row);
  j["confusion"] = cm;
  j["total"] = m.confusion.total();
  return j;
}

ojson summaries_json(const std::map<std::string, Summary>& s) {
  ojson j = ojson::object();
  for (const auto& [name, v] : s) {
    j[name] = {{"mean", v.mean}, {"sd", v.sd}, {"n", v.n}, {"values", v.values}};
  }
  return j;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string pct(const std::optional<double>& v) { return v ? pct(*v) : "-"; }

std::string pad(const std::string& s, std::size_t w, bool left = false) {
  if (s.size() >= w) return s;
  return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
}

std::string group_label(QueryGroup g) {
  switch (g) {
    case QueryGroup::Title: return "Title";
    case QueryGroup::Url: return "URL";
    case QueryGroup::Keywords: return "Keywords";
  }
  return "?";
}

}  // namespace

std::string to_json(const MetricReport& r) {
  ojson j;
  j["overall"] = metrics_json(r.overall);
  ojson groups = ojson::object();
  for (const auto& [g, m] : r.by_group) groups[std::string(to_string(g))] = metrics_json(m);
  j["by_group"] = groups;
  ojson types = ojson::object();
  for (const auto& [t, m] : r.by_type) types[std::string(to_string(t))] = metrics_json(m);
  j["by_type"] = types;
  return j.dump(2) + "\n";
}

std::string to_json(const std::map<std::string, Summary>& s) { return summaries_json(s).dump(2) + "\n"; }

std::string to_json(const AblationTable& t) {
  ojson cells = ojson::array();
  for (const auto& c : t.cells) {
    ojson j;
    j["name"] = c.name;
    j["kind"] = c.kind == AblationCell::Kind::Only      ? "only"
                : c.kind == AblationCell::Kind::Without ? "without"
                                                        : "all";
    j["datasets"] = c.datasets;
    j["failed"] = c.failed;
    if (c.failed) j["error"] = c.error;
    j["results"] = summaries_json(c.results);
    cells.push_back(j);
  }
  ojson j;
  j["cells"] = cells;
  j["notes"] = t.notes;
  return j.dump(2) + "\n";
}

std::string report_table(const MetricReport& r) {
  const auto& m = r.overall;
  std::string out = pad("", 10, true) + pad("P", 8) + pad("R", 8) + pad("F1", 8) + "\n";
  for (auto l : kLabels) {
    const auto& c = m.per_class[code(l)];
    std::string name(to_string(l));
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    out += pad(name, 10, true) + pad(c.precision_undefined ? "-" : pct(c.precision), 8) +
           pad(c.recall_undefined ? "-" : pct(c.recall), 8) + pad(c.f1_undefined() ? "-" : pct(c.f1), 8) +
           "\n";
  }
  out += pad("Macro", 10, true) + pad(pct(m.macro_precision), 8) + pad(pct(m.macro_recall), 8) +
         pad(pct(m.macro_f1), 8) + "\n";
  out += pad("Accuracy", 10, true) + pad(pct(m.accuracy), 8) + "\n";
  return out;
}

std::string group_table(const MetricReport& r) {
  std::string out = pad("", 10, true);
  for (auto g : kQueryGroups) out += pad(group_label(g), 10);
  out += "\n" + pad("Acc", 10, true);
  for (auto g : kQueryGroups) {
    auto it = r.by_group.find(g);
    out += pad(it == r.by_group.end() ? "-" : pct(it->second.accuracy), 10);
  }
  out += "\n" + pad("Macro F1", 10, true);
  for (auto g : kQueryGroups) {
    auto it = r.by_group.find(g);
    out += pad(it == r.by_group.end() ? "-" : pct(it->second.macro_f1), 10);
  }
  return out + "\n";
}

std::string ablation_table(const AblationTable& t) {
  std::size_t w = 13;
  for (const auto& c : t.cells) w = std::max(w, c.name.size() + 2);
  std::string out = pad("Training data", w, true) + pad("Acc", 8) + pad("SD", 8) + pad("Macro F1", 10) +
                    pad("SD", 8) + "\n";
  auto cols = [](const AblationCell& c, const char* key, std::size_t width) {
    auto it = c.results.find(key);
    if (c.failed || it == c.results.end()) return pad("-", width) + pad("-", 8);
    return pad(pct(it->second.mean), width) + pad(pct(it->second.sd), 8);
  };
  for (const auto& c : t.cells) {
    out += pad(c.name, w, true) + cols(c, "accuracy", 8) + cols(c, "macro_f1", 10);
    if (c.failed) out += "  failed: " + c.error;
    out += "\n";
  }
  for (const auto& n : t.notes) out += "note: " + n + "\n";
  return out;
}

}  // namespace covmis
