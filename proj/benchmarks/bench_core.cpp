// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include <random>

#include <benchmark/benchmark.h>

#include "covmis/annotate.hpp"
#include "covmis/corpus.hpp"
#include "covmis/stance.hpp"
#include "covmis/textprep.hpp"
#include "covmis/vectorize.hpp"

using namespace covmis;

namespace {

Matrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> N(0.0, 1.0);
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = N(gen);
  return m;
}

void BM_Bertscore(benchmark::State& state) {
  std::mt19937_64 gen(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(gen, n, 768), b = random_matrix(gen, n, 768);
  for (auto _ : state) benchmark::DoNotOptimize(bertscore(a, b));
}
BENCHMARK(BM_Bertscore)->Arg(16)->Arg(64);

void BM_NearDuplicates(benchmark::State& state) {
  std::mt19937_64 gen(2);
  const std::vector<std::string> vocab = {"virus", "vaccine", "5g", "lab", "cure", "garlic", "bleach", "mask",
                                          "china", "bill", "gates", "chip", "water", "heat", "sun", "tower"};
  std::vector<std::vector<std::string>> docs(static_cast<std::size_t>(state.range(0)));
  for (auto& d : docs)
    for (int k = 0; k < 12; ++k) d.push_back(vocab[gen() % vocab.size()] + std::to_string(gen() % 40));
  const auto model = fit_tfidf(docs, {1});
  std::vector<SparseVector> vs;
  for (const auto& d : docs) vs.push_back(transform(model, d));
  for (auto _ : state) benchmark::DoNotOptimize(near_duplicate_components(vs, 0.8));
}
BENCHMARK(BM_NearDuplicates)->Arg(1000)->Arg(5000);

void BM_NormalizeTweet(benchmark::State& state) {
  const std::string raw =
      "@someone @other RT this!!! 5G towers spread it 👍🏽 see https://t.co/abc and mail me@example.com   now";
  for (auto _ : state) benchmark::DoNotOptimize(normalize_tweet(raw));
}
BENCHMARK(BM_NormalizeTweet);

void BM_Kappa(benchmark::State& state) {
  std::mt19937_64 gen(3);
  std::vector<Label> a, b;
  for (int i = 0; i < state.range(0); ++i) {
    a.push_back(label_from_code(static_cast<int>(gen() % 3)));
    b.push_back(label_from_code(static_cast<int>(gen() % 3)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(cohen_kappa(a, b));
}
BENCHMARK(BM_Kappa)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
