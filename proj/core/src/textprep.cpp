// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include "covmis/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace covmis {

namespace {

struct EmojiEntry {
  const char* seq;
  const char* alias;
};

constexpr EmojiEntry kEmojiTable[] = {
#include "emoji_data.inc"
};

// Decodes one UTF-8 code point at `pos`; returns 0 and advances one byte on
// malformed input.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      len = 2;
      return static_cast<char32_t>(((b0 & 0x1F) << 6) | c1);
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      len = 3;
      return static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2);
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      len = 4;
      return static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3);
    }
  }
  len = 1;
  return 0;
}

// Emoji sequences indexed by their first code point, longest first.
class EmojiIndex {
 public:
  EmojiIndex() {
    for (const auto& e : kEmojiTable) {
      std::string_view seq(e.seq);
      std::size_t len = 0;
      const char32_t first = decode_utf8(seq, 0, len);
      by_first_[first].push_back(&e);
      exact_.emplace(seq, e.alias);
    }
    for (auto& [cp, entries] : by_first_) {
      std::stable_sort(entries.begin(), entries.end(), [](const EmojiEntry* a, const EmojiEntry* b) {
        return std::string_view(a->seq).size() > std::string_view(b->seq).size();
      });
    }
  }

  // Longest emoji sequence starting at `pos`, or nullptr.
  const EmojiEntry* match(std::string_view text, std::size_t pos, char32_t first) const {
    auto it = by_first_.find(first);
    if (it == by_first_.end()) return nullptr;
    for (const EmojiEntry* e : it->second) {
      std::string_view seq(e->seq);
      if (text.compare(pos, seq.size(), seq) == 0) return e;
    }
    return nullptr;
  }

  std::string_view exact(std::string_view seq) const {
    auto it = exact_.find(seq);
    return it == exact_.end() ? std::string_view{} : std::string_view(it->second);
  }

 private:
  std::unordered_map<char32_t, std::vector<const EmojiEntry*>> by_first_;
  std::unordered_map<std::string_view, const char*> exact_;
};

const EmojiIndex& emoji_index() {
  static const EmojiIndex index;
  return index;
}

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_';
}

std::string collapse_whitespace(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

enum class SpanKind { Mention, Url };

struct Span {
  SpanKind kind;
  std::size_t begin;
  std::size_t end;
};

bool starts_url(std::string_view s, std::size_t i) {
  return s.compare(i, 7, "http://") == 0 || s.compare(i, 8, "https://") == 0;
}

// Mentions and URLs in document order. Operates on whitespace-collapsed text.
std::vector<Span> find_spans(std::string_view s) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    if (starts_url(s, i) && (i == 0 || !is_word_char(s[i - 1]))) {
      std::size_t j = i;
      while (j < s.size() && s[j] != ' ') ++j;
      spans.push_back({SpanKind::Url, i, j});
      i = j;
      continue;
    }
    if (s[i] == '@' && i + 1 < s.size() && is_word_char(s[i + 1]) &&
        (i == 0 || (!is_word_char(s[i - 1]) && s[i - 1] != '@'))) {
      std::size_t j = i + 1;
      while (j < s.size() && is_word_char(s[j])) ++j;
      spans.push_back({SpanKind::Mention, i, j});
      i = j;
      continue;
    }
    ++i;
  }
  return spans;
}

std::string replace_runs(const std::string& s) {
  const auto spans = find_spans(s);
  std::string out;
  out.reserve(s.size());
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < spans.size();) {
    // Extend the run while the next span has the same kind and only a single
    // space separates them.
    std::size_t last = k;
    while (last + 1 < spans.size() && spans[last + 1].kind == spans[k].kind &&
           spans[last + 1].begin == spans[last].end + 1 && s[spans[last].end] == ' ') {
      ++last;
    }
    out.append(s, cursor, spans[k].begin - cursor);
    const std::size_t count = last - k + 1;
    if (count > 1) out += std::to_string(count) + " ";
    out += spans[k].kind == SpanKind::Mention ? "twitteruser" : "twitterurl";
    cursor = spans[last].end;
    k = last + 1;
  }
  out.append(s, cursor, std::string::npos);
  return out;
}

}  // namespace

std::string_view emoji_alias(std::string_view seq) { return emoji_index().exact(seq); }

std::string replace_emoji(std::string_view text) {
  const auto& index = emoji_index();
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = 0;
    const char32_t cp = decode_utf8(text, i, len);
    if (const EmojiEntry* e = index.match(text, i, cp)) {
      out += e->alias;
      i += std::string_view(e->seq).size();
      continue;
    }
    out.append(text, i, len);
    i += len;
  }
  return out;
}

NormalizedText normalize_tweet(std::string_view raw) {
  std::string s = collapse_whitespace(raw);
  s = replace_runs(s);
  s = replace_emoji(s);
  return NormalizedText{std::move(s)};
}

std::vector<std::string> tokenize(const NormalizedText& text) {
  std::vector<std::string> tokens;
  const std::string& s = text.text;
  std::size_t i = 0;
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_punct(s[b])) ++b;
    while (e > b && is_punct(s[e - 1])) --e;
    if (b < e) {
      std::string tok = s.substr(b, e - b);
      std::transform(tok.begin(), tok.end(), tok.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens,
                                const std::vector<int>& orders) {
  bool uni = false, bi = false;
  for (int o : orders) {
    if (o == 1) uni = true;
    else if (o == 2) bi = true;
    else throw std::invalid_argument("n-gram order must be 1 or 2");
  }
  std::vector<std::string> out;
  if (uni) out.insert(out.end(), tokens.begin(), tokens.end());
  if (bi) {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) out.push_back(tokens[i] + " " + tokens[i + 1]);
  }
  return out;
}

}  // namespace covmis
