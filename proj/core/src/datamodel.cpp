// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/datamodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "covmis/random.hpp"

namespace covmis {

using json = nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

const json* field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string required_string(const json& j, const char* name) {
  const json* f = field(j, name);
  if (f == nullptr) throw DataError(std::string("missing field '") + name + "'");
  if (!f->is_string()) throw DataError(std::string("field '") + name + "' must be a string");
  return f->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* name) {
  const json* f = field(j, name);
  if (f == nullptr) return std::nullopt;
  if (!f->is_string()) throw DataError(std::string("field '") + name + "' must be a string");
  auto s = f->get<std::string>();
  if (s.empty()) return std::nullopt;
  return s;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// Calls fn(json, line_number) on every non-blank line; wraps failures in
// ParseError so the caller sees the offending line.
template <typename Fn>
void for_each_record(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(source, line_no, "record is not a JSON object");
    try {
      fn(j, line_no);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
}

StancePair pair_from_json(const json& j) {
  StancePair p;
  p.misinfo_id = required_string(j, "misinfo_id");
  p.tweet_id = required_string(j, "tweet_id");
  if (p.misinfo_id.empty() || p.tweet_id.empty()) throw DataError("empty id");
  p.query_type = parse_query_type(required_string(j, "query_type"));
  if (auto l = optional_string(j, "label")) p.label = parse_label(*l);
  if (const json* a = field(j, "auto_labeled")) {
    if (!a->is_boolean()) throw DataError("field 'auto_labeled' must be a boolean");
    p.auto_labeled = a->get<bool>();
  }
  if (auto s = optional_string(j, "split")) p.split = parse_split(*s);
  if (p.auto_labeled && p.label != Label::Against) {
    throw DataError("auto_labeled pair must carry label 'against'");
  }
  return p;
}

Tweet tweet_from_json(const json& j) {
  Tweet t;
  t.id = required_string(j, "id");
  if (t.id.empty()) throw DataError("empty id");
  t.text = required_string(j, "text");
  t.lang = optional_string(j, "lang").value_or("und");
  t.word_count = count_words(t.text);
  if (const json* w = field(j, "word_count")) {
    if (!w->is_number_unsigned() || w->get<std::size_t>() != t.word_count) {
      throw DataError("word_count does not match the whitespace token count of text");
    }
  }
  return t;
}

MisinfoItem item_from_json(const json& j) {
  MisinfoItem m;
  m.id = required_string(j, "id");
  if (m.id.empty()) throw DataError("empty id");
  m.text = required_string(j, "text");
  if (m.text.empty()) throw DataError("empty misinformation text");
  m.news_title = optional_string(j, "news_title");
  m.news_url = optional_string(j, "news_url");
  m.factcheck_url = optional_string(j, "factcheck_url");
  if (const json* k = field(j, "keywords")) {
    if (!k->is_array()) throw DataError("field 'keywords' must be an array");
    for (const auto& e : *k) {
      if (!e.is_string()) throw DataError("keywords must be strings");
      m.keywords.push_back(e.get<std::string>());
    }
  }
  return m;
}

template <typename T>
void write_lines(const std::filesystem::path& path, const std::vector<T>& records) {
  auto out = open_output(path);
  for (const auto& r : records) out << to_json_line(r) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

double percent(std::size_t part, std::size_t whole) {
  if (whole == 0) return 0.0;
  return std::round(10000.0 * static_cast<double>(part) / static_cast<double>(whole)) / 100.0;
}

}  // namespace

Label label_from_code(int c) {
  if (c < 0 || c > 2) throw DataError("label code out of range: " + std::to_string(c));
  return static_cast<Label>(c);
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::Favor: return "favor";
    case Label::Against: return "against";
    case Label::Neither: return "neither";
  }
  return "?";
}

Label parse_label(std::string_view s) {
  const auto v = lower(s);
  if (v == "favor") return Label::Favor;
  if (v == "against") return Label::Against;
  if (v == "neither") return Label::Neither;
  throw DataError("unknown label '" + std::string(s) + "'");
}

std::string_view to_string(QueryType q) {
  switch (q) {
    case QueryType::Title: return "title";
    case QueryType::NewsUrl: return "news_url";
    case QueryType::FactCheckUrl: return "factcheck_url";
    case QueryType::Keywords: return "keywords";
  }
  return "?";
}

QueryType parse_query_type(std::string_view s) {
  const auto v = lower(s);
  if (v == "title") return QueryType::Title;
  if (v == "news_url") return QueryType::NewsUrl;
  if (v == "factcheck_url") return QueryType::FactCheckUrl;
  if (v == "keywords") return QueryType::Keywords;
  throw DataError("unknown query type '" + std::string(s) + "'");
}

QueryGroup group_of(QueryType q) {
  switch (q) {
    case QueryType::Title: return QueryGroup::Title;
    case QueryType::NewsUrl:
    case QueryType::FactCheckUrl: return QueryGroup::Url;
    case QueryType::Keywords: return QueryGroup::Keywords;
  }
  return QueryGroup::Keywords;
}

std::string_view to_string(QueryGroup g) {
  switch (g) {
    case QueryGroup::Title: return "title";
    case QueryGroup::Url: return "url";
    case QueryGroup::Keywords: return "keywords";
  }
  return "?";
}

std::string_view to_string(Split s) {
  return s == Split::Validation ? "validation" : "test";
}

Split parse_split(std::string_view s) {
  const auto v = lower(s);
  if (v == "validation") return Split::Validation;
  if (v == "test") return Split::Test;
  throw DataError("unknown split '" + std::string(s) + "'");
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

Tweet make_tweet(std::string id, std::string text, std::string lang) {
  Tweet t{std::move(id), std::move(text), std::move(lang), 0};
  t.word_count = count_words(t.text);
  return t;
}

std::string pair_key(const StancePair& p) { return p.misinfo_id + ":" + p.tweet_id; }

std::string to_json_line(const StancePair& p) {
  json j = json::object();
  j["misinfo_id"] = p.misinfo_id;
  j["tweet_id"] = p.tweet_id;
  j["query_type"] = to_string(p.query_type);
  j["label"] = p.label ? json(to_string(*p.label)) : json(nullptr);
  j["auto_labeled"] = p.auto_labeled;
  j["split"] = p.split ? json(to_string(*p.split)) : json(nullptr);
  return j.dump();
}

std::string to_json_line(const Tweet& t) {
  json j = json::object();
  j["id"] = t.id;
  j["text"] = t.text;
  j["lang"] = t.lang;
  j["word_count"] = t.word_count;
  return j.dump();
}

std::string to_json_line(const MisinfoItem& m) {
  json j = json::object();
  j["id"] = m.id;
  j["text"] = m.text;
  if (m.news_title) j["news_title"] = *m.news_title;
  if (m.news_url) j["news_url"] = *m.news_url;
  if (m.factcheck_url) j["factcheck_url"] = *m.factcheck_url;
  j["keywords"] = m.keywords;
  return j.dump();
}

std::vector<StancePair> parse_pairs(std::istream& in, const std::string& source) {
  std::vector<StancePair> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_record(in, source, [&](const json& j, std::size_t line_no) {
    auto p = pair_from_json(j);
    if (!seen.emplace(p.misinfo_id, p.tweet_id).second) {
      throw ParseError(source, line_no,
                       "duplicate pair (" + p.misinfo_id + ", " + p.tweet_id + ")");
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

std::vector<StancePair> read_pairs(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_pairs(in, path.string());
}

void write_pairs(const std::filesystem::path& path, const std::vector<StancePair>& pairs) {
  write_lines(path, pairs);
}

std::vector<Tweet> parse_tweets(std::istream& in, const std::string& source) {
  std::vector<Tweet> tweets;
  for_each_record(in, source, [&](const json& j, std::size_t) {
    tweets.push_back(tweet_from_json(j));
  });
  return tweets;
}

std::vector<Tweet> read_tweets(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_tweets(in, path.string());
}

void write_tweets(const std::filesystem::path& path, const std::vector<Tweet>& tweets) {
  write_lines(path, tweets);
}

std::vector<MisinfoItem> parse_items(std::istream& in, const std::string& source) {
  std::vector<MisinfoItem> items;
  std::set<std::string> seen;
  for_each_record(in, source, [&](const json& j, std::size_t line_no) {
    auto m = item_from_json(j);
    if (!seen.insert(m.id).second) {
      throw ParseError(source, line_no, "duplicate misinformation id " + m.id);
    }
    items.push_back(std::move(m));
  });
  return items;
}

std::vector<MisinfoItem> read_items(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_items(in, path.string());
}

void write_items(const std::filesystem::path& path, const std::vector<MisinfoItem>& items) {
  write_lines(path, items);
}

void validate_pairs(const std::vector<StancePair>& pairs) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : pairs) {
    if (!seen.emplace(p.misinfo_id, p.tweet_id).second) {
      throw DataError("duplicate pair (" + p.misinfo_id + ", " + p.tweet_id + ")");
    }
    if (p.auto_labeled && p.label != Label::Against) {
      throw DataError("auto_labeled pair (" + p.misinfo_id + ", " + p.tweet_id +
                      ") is not labeled against");
    }
  }
}

std::size_t StatsTable::row_total(QueryType q) const {
  const auto& row = counts[static_cast<int>(q)];
  return std::accumulate(row.begin(), row.end(), std::size_t{0});
}

std::size_t StatsTable::group_cell(QueryGroup g, Label l) const {
  std::size_t n = 0;
  for (auto q : kQueryTypes)
    if (group_of(q) == g) n += cell(q, l);
  return n;
}

std::size_t StatsTable::group_total(QueryGroup g) const {
  std::size_t n = 0;
  for (auto l : kLabels) n += group_cell(g, l);
  return n;
}

std::size_t StatsTable::label_total(Label l) const {
  std::size_t n = 0;
  for (auto q : kQueryTypes) n += cell(q, l);
  return n;
}

std::size_t StatsTable::total() const {
  std::size_t n = 0;
  for (auto q : kQueryTypes) n += row_total(q);
  return n;
}

double StatsTable::group_percent(QueryGroup g) const { return percent(group_total(g), total()); }
double StatsTable::label_percent(Label l) const { return percent(label_total(l), total()); }

StatsTable dataset_stats(const std::vector<StancePair>& pairs) {
  StatsTable t;
  std::vector<std::string> unlabeled;
  for (const auto& p : pairs) {
    if (!p.label) {
      unlabeled.push_back(pair_key(p));
      continue;
    }
    ++t.counts[static_cast<int>(p.query_type)][code(*p.label)];
  }
  if (!unlabeled.empty()) {
    std::string msg = "unlabeled pairs (" + std::to_string(unlabeled.size()) + "):";
    const std::size_t shown = std::min<std::size_t>(unlabeled.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg += " " + unlabeled[i];
    if (shown < unlabeled.size()) msg += " ...";
    throw DataError(msg);
  }
  return t;
}

std::string stats_csv(const StatsTable& t) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "row,favor,against,neither,total,percent\n";
  auto row = [&](std::string_view name, std::size_t f, std::size_t a, std::size_t n) {
    const std::size_t tot = f + a + n;
    os << name << ',' << f << ',' << a << ',' << n << ',' << tot << ','
       << percent(tot, t.total()) << '\n';
  };
  for (auto q : kQueryTypes) {
    row(to_string(q), t.cell(q, Label::Favor), t.cell(q, Label::Against),
        t.cell(q, Label::Neither));
  }
  row("url", t.group_cell(QueryGroup::Url, Label::Favor),
      t.group_cell(QueryGroup::Url, Label::Against), t.group_cell(QueryGroup::Url, Label::Neither));
  row("total", t.label_total(Label::Favor), t.label_total(Label::Against),
      t.label_total(Label::Neither));
  os << "percent," << t.label_percent(Label::Favor) << ',' << t.label_percent(Label::Against)
     << ',' << t.label_percent(Label::Neither) << ',' << (t.total() ? 100.0 : 0.0) << ','
     << (t.total() ? 100.0 : 0.0) << '\n';
  return os.str();
}

std::string stats_text(const StatsTable& t) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  auto pct = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << v << '%';
    return s.str();
  };
  os << std::left << std::setw(10) << "" << std::right << std::setw(16) << "Favor"
     << std::setw(16) << "Against" << std::setw(16) << "Neither" << std::setw(18) << "Total"
     << '\n';
  const char* names[] = {"Title", "URL", "Keywords"};
  for (auto g : kQueryGroups) {
    os << std::left << std::setw(10) << names[static_cast<int>(g)] << std::right;
    for (auto l : kLabels) os << std::setw(16) << t.group_cell(g, l);
    os << std::setw(18)
       << (std::to_string(t.group_total(g)) + " (" + pct(t.group_percent(g)) + ")") << '\n';
  }
  os << std::left << std::setw(10) << "Total" << std::right;
  for (auto l : kLabels) {
    os << std::setw(16) << (std::to_string(t.label_total(l)) + " (" + pct(t.label_percent(l)) + ")");
  }
  os << std::setw(18) << t.total() << '\n';
  return os.str();
}

std::vector<StancePair> split_validation(std::vector<StancePair> pairs, double ratio,
                                         std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("split ratio must lie in [0, 1]");
  }
  const std::size_t n = pairs.size();
  // The epsilon keeps decimal ratios such as 0.29 * 100 from flooring to 28.
  auto n_val = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  n_val = std::min(n_val, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  for (std::size_t i = 0; i < n; ++i) {
    pairs[order[i]].split = i < n_val ? Split::Validation : Split::Test;
  }
  return pairs;
}

}  // namespace covmis
