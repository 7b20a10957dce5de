// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

// Test helpers and independent reference implementations. Oracles here are
// written from the formulas directly and share no code with the library.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace covmis::test {

inline std::filesystem::path source_dir() { return COVMIS_SOURCE_DIR; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("covmis-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& f) const { return path_ / f; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    std::ofstream out(path_ / name, std::ios::binary);
    out << content;
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Rows = std::vector<std::vector<double>>;

inline Rows random_rows(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  std::normal_distribution<double> N(0.0, 1.0);
  Rows r(n, std::vector<double>(d));
  for (auto& row : r)
    for (auto& x : row) x = N(gen);
  return r;
}

/// Greedy-matching similarity computed by explicit double loops over
/// normalized copies. Returns {P, R, F1}.
inline std::array<double, 3> bertscore_oracle(const Rows& cand, const Rows& ref) {
  auto unit = [](std::vector<double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double& x : v) x /= s;
    return v;
  };
  Rows c, r;
  for (const auto& v : cand) c.push_back(unit(v));
  for (const auto& v : ref) r.push_back(unit(v));
  auto sim = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  };
  double recall = 0.0;
  for (const auto& ri : r) {
    double best = -1e300;
    for (const auto& cj : c) best = std::max(best, sim(ri, cj));
    recall += best;
  }
  recall /= static_cast<double>(r.size());
  double precision = 0.0;
  for (const auto& cj : c) {
    double best = -1e300;
    for (const auto& ri : r) best = std::max(best, sim(ri, cj));
    precision += best;
  }
  precision /= static_cast<double>(c.size());
  const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return {precision, recall, f1};
}

/// Connected components by repeated depth-first search over an adjacency
/// matrix; each component sorted, components sorted by first element.
inline std::vector<std::vector<std::size_t>> components_oracle(const std::vector<std::vector<bool>>& adj) {
  const std::size_t n = adj.size();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<std::size_t> stack{s}, members;
    comp[s] = static_cast<int>(out.size());
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      members.push_back(u);
      for (std::size_t v = 0; v < n; ++v) {
        if (adj[u][v] && comp[v] < 0) {
          comp[v] = comp[s];
          stack.push_back(v);
        }
      }
    }
    std::sort(members.begin(), members.end());
    out.push_back(members);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Cohen's kappa straight from a square confusion table.
inline double kappa_oracle(const std::vector<std::vector<double>>& table) {
  double n = 0.0, diag = 0.0;
  const std::size_t k = table.size();
  std::vector<double> rows(k, 0.0), cols(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      n += table[i][j];
      rows[i] += table[i][j];
      cols[j] += table[i][j];
      if (i == j) diag += table[i][j];
    }
  double pe = 0.0;
  for (std::size_t i = 0; i < k; ++i) pe += rows[i] * cols[i] / (n * n);
  return (diag / n - pe) / (1.0 - pe);
}

}  // namespace covmis::test
